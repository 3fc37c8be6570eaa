#include "trick/tables.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "trick/errors.hpp"

namespace trick {
namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return format_number(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_seconds(long double value) {
  if (std::isnan(value)) return "nan";
  if (value == 0) value = 0;  // no "-0" in tables
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string residual_csv(const std::vector<ResidualRow>& rows) {
  std::ostringstream out;
  out << kResidualHeader << '\n';
  for (const auto& r : rows) {
    out << num(r.offset_m) << ',' << num(r.sigma_m) << ',' << r.trial << ',' << num(r.direction_deg) << ','
        << num(r.backward_delay_s) << ',' << num(r.max_residual_m) << ',' << num(r.solution_error_m) << ',' << (r.feasible ? 1 : 0) << ','
        << (r.converged ? 1 : 0) << ',' << csv_field(r.flag) << '\n';
  }
  return out.str();
}

std::string residual_summary_csv(const std::vector<CellSummary>& cells) {
  std::ostringstream out;
  out << kResidualSummaryHeader << '\n';
  for (const auto& c : cells) {
    out << num(c.offset_m) << ',' << num(c.sigma_m) << ',' << c.trials << ',' << num(c.min) << ',' << num(c.q1)
        << ',' << num(c.median) << ',' << num(c.q3) << ',' << num(c.max) << '\n';
  }
  return out.str();
}

std::string coverage_csv(const std::vector<AvailabilityRow>& rows) {
  std::ostringstream out;
  out << kCoverageHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.mode) << ',' << csv_field(r.station) << ',' << (r.dt_s ? num(*r.dt_s) : std::string()) << ','
        << r.epochs << ',' << r.passing << ',' << num(r.availability_pct) << '\n';
  }
  return out.str();
}

std::string trace_csv(const std::vector<SignalEvent>& events) {
  std::ostringstream out;
  out << kTraceHeader << '\n';
  for (const auto& e : events) {
    out << e.link << ',' << e.sender << ',' << e.receiver << ',' << format_seconds(e.depart_true) << ','
        << format_seconds(e.arrive_true) << ',' << format_seconds(e.depart_local.value) << ','
        << to_string(e.depart_local.clock) << ',' << format_seconds(e.arrive_local.value) << ','
        << to_string(e.arrive_local.clock) << ',' << format_seconds(e.delay_applied) << ','
        << format_seconds(e.toa_error) << '\n';
  }
  return out.str();
}

std::filesystem::path write_text(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, dir.string() + ": " + ec.message());
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, path.string() + ": cannot open for writing");
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::io_error, path.string() + ": write failed");
  return path;
}

std::filesystem::path write_json(const std::filesystem::path& dir, const std::string& name,
                                 const nlohmann::ordered_json& j) {
  return write_text(dir, name, j.dump(2) + "\n");
}

}  // namespace trick
