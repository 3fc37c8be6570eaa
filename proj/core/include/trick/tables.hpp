#pragma once

// Deterministic text emitters for experiment results. Numbers use the
// shortest representation that round-trips, so reruns are byte-identical.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trick/config.hpp"
#include "trick/experiments.hpp"

namespace trick {

inline constexpr const char* kResidualHeader =
    "offset_m,sigma_m,trial,direction_deg,backward_delay_s,max_residual_m,solution_error_m,feasible,converged,flag";
inline constexpr const char* kResidualSummaryHeader = "offset_m,sigma_m,trials,min_m,q1_m,median_m,q3_m,max_m";
inline constexpr const char* kCoverageHeader = "mode,station,dt_s,epochs,passing,availability_pct";
inline constexpr const char* kTraceHeader =
    "link,sender,receiver,depart_true_s,arrive_true_s,depart_local_s,depart_clock,arrive_local_s,arrive_clock,"
    "delay_applied_s,toa_error_s";

/// Shortest round-trip text for an extended-precision value.
std::string format_seconds(long double value);

std::string residual_csv(const std::vector<ResidualRow>& rows);
std::string residual_summary_csv(const std::vector<CellSummary>& cells);
std::string coverage_csv(const std::vector<AvailabilityRow>& rows);
std::string trace_csv(const std::vector<SignalEvent>& events);

/// Writes `text` to dir/name, creating dir. Throws IoError naming the path.
std::filesystem::path write_text(const std::filesystem::path& dir, const std::string& name, const std::string& text);
std::filesystem::path write_json(const std::filesystem::path& dir, const std::string& name,
                                 const nlohmann::ordered_json& j);

}  // namespace trick
