#include <sstream>

#include <gtest/gtest.h>

#include "trick/config.hpp"
#include "trick/errors.hpp"

using namespace trick;

namespace {

ConfigDocument parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "t.conf");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error);
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, SectionsKeysAndComments) {
  const auto doc = parse("# header\n\n[a]\nx = 1  # trailing\ny = hello world\n[b]\n[a]\nx = 2\n");
  ASSERT_EQ(doc.sections.size(), 3u);
  EXPECT_EQ(doc.all("a").size(), 2u);
  EXPECT_EQ(doc.find("a")->entries[0].value, "1");
  EXPECT_EQ(doc.find("a")->entries[0].line, 4);
  EXPECT_EQ(doc.find("a")->entries[1].value, "hello world");
  EXPECT_EQ(doc.find("b")->line, 6);
  EXPECT_EQ(doc.find("c"), nullptr);
}

TEST(Config, SyntaxErrorsCarryLine) {
  EXPECT_NE(error_of("[a\n").find("t.conf:1"), std::string::npos);
  EXPECT_NE(error_of("x = 1\n").find("outside"), std::string::npos);
  EXPECT_NE(error_of("[a]\nnot a pair\n").find("t.conf:2"), std::string::npos);
  EXPECT_NE(error_of("[a]\nx = 1\nx = 2\n").find("duplicate key 'x'"), std::string::npos);
  EXPECT_NE(error_of("[a]\nBad = 1\n").find("invalid key"), std::string::npos);
  EXPECT_NE(error_of("[Upper]\n").find("invalid section"), std::string::npos);
}

TEST(Config, TypedReads) {
  const auto doc = parse("[s]\nn = 2.5\ni = -3\nu = 7\nb = yes\nl = 1, 2 ,3\nt = a, b\n");
  SectionReader r(doc.sections[0], "t.conf");
  EXPECT_EQ(r.number("n"), 2.5);
  EXPECT_EQ(r.integer("i"), -3);
  EXPECT_EQ(r.unsigned_integer("u", 0), 7u);
  EXPECT_TRUE(r.boolean("b", false));
  EXPECT_EQ(r.numbers("l"), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(r.texts("t"), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(r.number("missing", 9.0), 9.0);
  EXPECT_NO_THROW(r.finish());
}

TEST(Config, BadValuesNameKeyAndLine) {
  const auto doc = parse("[s]\nn = 2.5x\ni = 1.5\nb = maybe\nu = -1\n");
  SectionReader r(doc.sections[0], "t.conf");
  auto message = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message([&] { r.number("n"); }).find("t.conf:2: [s] n"), std::string::npos);
  EXPECT_NE(message([&] { r.integer("i"); }).find("t.conf:3"), std::string::npos);
  EXPECT_NE(message([&] { r.boolean("b", true); }).find("t.conf:4"), std::string::npos);
  EXPECT_NE(message([&] { r.unsigned_integer("u", 0); }).find("t.conf:5"), std::string::npos);
  EXPECT_NE(message([&] { r.text("absent"); }).find("missing required key"), std::string::npos);
}

TEST(Config, FinishRejectsUnconsumed) {
  const auto doc = parse("[s]\nknown = 1\nstray = 2\n");
  SectionReader r(doc.sections[0], "t.conf");
  r.number("known");
  try {
    r.finish();
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("t.conf:3: [s] unknown key 'stray'"), std::string::npos);
  }
}

TEST(Config, FormatRoundTrip) {
  const auto doc = parse("[a]\nx = 1\ny = two words\n\n[b]\nz = 0.001\n");
  const std::string text = format_config(doc);
  EXPECT_EQ(text, "[a]\nx = 1\ny = two words\n\n[b]\nz = 0.001\n");
  EXPECT_EQ(format_config(parse(text)), text);
}

TEST(Config, SetReplacesOrAppends) {
  ConfigSection s{"a", 0, {}};
  s.set("x", "1");
  s.set("y", "2");
  s.set("x", "3");
  ASSERT_EQ(s.entries.size(), 2u);
  EXPECT_EQ(s.entries[0].value, "3");
}

TEST(Config, NumbersRoundTripShortest) {
  EXPECT_EQ(format_number(50.0), "50");
  EXPECT_EQ(format_number(0.001), "0.001");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
  EXPECT_EQ(format_number(-0.0), "0");
  for (double v : {1e-17, 6378137.0, 1.0 / 3.0, -2.5e300}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(Config, RelativePaths) {
  EXPECT_EQ(resolve_relative("/a/b/c.conf", "d.conf"), std::filesystem::path("/a/b/d.conf"));
  EXPECT_EQ(resolve_relative("/a/b/c.conf", "/x.conf"), std::filesystem::path("/x.conf"));
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/trick.conf"), Error);
}
