#include "commitgauge/report.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace commitgauge;
using namespace commitgauge::testing;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("decimal rendering rounds halves away from zero", "[report]") {
  CHECK(to_decimal(Rational(50), 1) == "50.0");
  CHECK(to_decimal(Rational(200, 3), 1) == "66.7");
  CHECK(to_decimal(Rational(200, 3), 4) == "66.6667");
  CHECK(to_decimal(Rational(1, 20), 1) == "0.1");    // 0.05
  CHECK(to_decimal(Rational(1, 40), 1) == "0.0");    // 0.025
  CHECK(to_decimal(Rational(-1, 20), 1) == "-0.1");
  CHECK(to_decimal(Rational(-1, 40), 1) == "0.0");
  CHECK(to_decimal(Rational(0), 4) == "0.0000");
  CHECK(to_decimal(Rational(100), 0) == "100");
  CHECK(to_signed_decimal(Rational(50), 1) == "+50.0");
  CHECK(to_signed_decimal(Rational(0), 1) == "0.0");
  CHECK(to_signed_decimal(Rational(1, 1000), 1) == "0.0");
}

TEST_CASE("rendered decimals stay within half a unit of the exact value", "[report][property]") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Rational q(uniform(rng, -300000, 300000), uniform(rng, 1, 3000));
    const double exact = to_double(q);
    REQUIRE(std::abs(std::stod(to_decimal(q, 4)) - exact) <= 5e-5 + 1e-12);
    REQUIRE(std::abs(std::stod(to_decimal(q, 1)) - exact) <= 5e-2 + 1e-12);
    const std::string pos = to_decimal(q, 1);
    const std::string neg = to_decimal(-q, 1);
    if (pos == "0.0") REQUIRE(neg == "0.0");
    else if (q > Rational(0)) REQUIRE(neg == "-" + pos);
    else REQUIRE(pos == "-" + neg);
  }
}

TEST_CASE("profile rendering", "[report]") {
  const Instrument inst = bundled_instrument();
  const CommitmentProfile p = overall_score(worked_example_sheet(), inst);

  SECTION("text") {
    const std::string text = render_profile(p, inst, Format::text);
    CHECK(contains(text, "C3 Taking responsibility 50.0%"));
    CHECK(contains(text, "R overall 50.0%"));
    CHECK(contains(text, "C1 Communicating openly n/a (placeholder)"));
    CHECK(render_profile(p, inst, Format::text) == text);
  }
  SECTION("csv has one row per category plus R") {
    const auto rows = lines_of(render_profile(p, inst, Format::csv));
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == "category,name,status,percent,rated_count,na_count,raw_sum");
    CHECK(rows[3] == "C3,Taking responsibility,scored,50.0000,8,0,12.0000");
    CHECK(rows[10] == "R,overall,scored,50.0000,8,0,12.0000");
  }
  SECTION("json") {
    const auto j = nlohmann::json::parse(render_profile(p, inst, Format::json));
    CHECK(j.at("categories").size() == 9);
    CHECK(j.at("categories").at(2).at("percent") == "50.0000");
    CHECK(j.at("categories").at(0).at("percent").is_null());
    CHECK(j.at("overall").at("percent") == "50.0000");
  }
  SECTION("undefined category gets n/a and a footnote") {
    const Instrument two = make_instrument({2, 1});
    RatingSheet sheet{Aspect::intent, {{{1, 1}, Rating::of(3)}, {{1, 2}, Rating::of(3)}, {{2, 1}, Rating::na()}}};
    const std::string text = render_profile(overall_score(sheet, two), two, Format::text);
    CHECK(contains(text, "C2 Category 2 n/a*"));
    CHECK(contains(text, "excluded from R"));
    CHECK(contains(text, "R overall 100.0%"));
  }
}

TEST_CASE("gap report rendering", "[report]") {
  const Instrument inst = make_instrument({2, 2, 1});
  const RatingSheet effect{Aspect::effect, {{{1, 1}, Rating::of(3)}, {{1, 2}, Rating::of(3)}, {{2, 1}, Rating::of(1)},
                                            {{2, 2}, Rating::of(1)}, {{3, 1}, Rating::na()}}};
  const RatingSheet intent{Aspect::intent, {{{1, 1}, Rating::of(3)}, {{1, 2}, Rating::of(0)}, {{2, 1}, Rating::of(2)},
                                            {{2, 2}, Rating::of(2)}, {{3, 1}, Rating::of(2)}}};
  const auto gaps = gap_analysis(effect, intent, inst);
  const auto text = lines_of(render_gap_report(gaps, inst, Format::text));
  // C1: 100 vs 50 -> +50; C2: 33.3 vs 66.7 -> -33.3; C3: n/a vs 66.7
  CHECK(text[1] == "C1 Category 1 effect 100.0% intent 50.0% delta +50.0");
  CHECK(text[2] == "C2 Category 2 effect 33.3% intent 66.7% delta -33.3");
  CHECK(text[3] == "C3 Category 3 effect n/a intent 66.7% delta n/a");
  CHECK(text[5] == "C1B1 effect 3 intent 3 delta 0.0");

  const auto zero = lines_of(render_gap_report(gap_analysis(intent, intent, inst), inst, Format::csv));
  for (std::size_t i = 1; i < zero.size(); ++i) CHECK(zero[i].ends_with(",0.0000"));

  const auto j = nlohmann::json::parse(render_gap_report(gaps, inst, Format::json));
  CHECK(j.at("categories").at(0).at("delta") == "50.0000");
  CHECK(j.at("categories").at(2).at("delta").is_null());
  CHECK(j.at("behaviors").size() == 5);
}

TEST_CASE("checklist rendering", "[report]") {
  const Instrument inst = bundled_instrument();
  const RatingSheet effect = uniform_sheet(inst, 3, Aspect::effect);
  const auto ranked = top_behaviors(effect, worked_example_sheet(), 10, inst);
  const std::string text = render_checklist(ranked, inst, to_score_sheet(worked_example_sheet()), Format::text);
  const auto rows = lines_of(text);
  CHECK(rows[0] == "Top 8 behaviors to monitor");
  CHECK(rows[1].starts_with("1. C3B1 Figuring out"));
  CHECK(rows[1].ends_with("[planned: 3 high]"));
  CHECK(contains(text, "needs a good reason"));
  CHECK(contains(text, "  C3B5 0 Stating one's own contribution"));

  SECTION("ten entries from a larger instrument") {
    const Instrument big = make_instrument({6, 6});
    const auto top = top_behaviors(uniform_sheet(big, 2, Aspect::effect), std::nullopt, 10, big);
    const auto lines = lines_of(render_checklist(top, big, std::nullopt, Format::text));
    int numbered = 0;
    for (const auto& l : lines)
      if (!l.empty() && std::isdigit(static_cast<unsigned char>(l[0]))) ++numbered;
    CHECK(numbered == 10);
  }
  SECTION("empty list still renders the footer") {
    const std::string empty = render_checklist({}, inst, to_score_sheet(worked_example_sheet()), Format::text);
    CHECK(lines_of(empty)[0] == "Top 0 behaviors to monitor");
    CHECK(contains(empty, "C3B5"));
  }
}

TEST_CASE("benchmark rendering", "[report]") {
  SECTION("sorted by overall, undefined last, ties by id") {
    std::vector<BenchmarkRow> rows = {{"P3", Aspect::intent, Rational(50), {{1, Rational(50)}}},
                                      {"P1", Aspect::intent, std::nullopt, {}},
                                      {"P2", Aspect::intent, Rational(50), {{1, Rational(50)}}},
                                      {"P4", Aspect::intent, Rational(75), {{1, Rational(75)}}}};
    const auto csv = lines_of(render_benchmark(rows, Format::csv));
    REQUIRE(csv.size() == 5);
    CHECK(csv[0] == "project_id,aspect,overall_percent,C1");
    CHECK(csv[1].starts_with("P4,"));
    CHECK(csv[2].starts_with("P2,"));
    CHECK(csv[3].starts_with("P3,"));
    CHECK(csv[4] == "P1,intent,n/a,");
  }
  SECTION("fourteen projects give fourteen rows") {
    std::vector<BenchmarkRow> rows;
    for (int i = 0; i < 14; ++i) rows.push_back({"P" + std::to_string(i), Aspect::intent, Rational(i * 5), {}});
    CHECK(lines_of(render_benchmark(rows, Format::text)).size() == 15);
    CHECK(nlohmann::json::parse(render_benchmark(rows, Format::json)).at("rows").size() == 14);
  }
  SECTION("single row mirrors its profile") {
    const Instrument inst = bundled_instrument();
    const auto profile = overall_score(worked_example_sheet(), inst);
    const auto row = benchmark_row("P1", profile);
    CHECK(row.overall_percent == profile.overall_percent);
    REQUIRE(row.category_percents.size() == 1);
    CHECK(row.category_percents[0].second == profile.categories[2].percent);
    CHECK(lines_of(render_benchmark({row}, Format::text))[1] == "1. P1 intent 50.0% C3 50.0%");
  }
  SECTION("empty input is header only") {
    CHECK(lines_of(render_benchmark({}, Format::text)).size() == 1);
    CHECK(lines_of(render_benchmark({}, Format::csv)) == std::vector<std::string>{"project_id,aspect,overall_percent"});
  }
}

TEST_CASE("trend rendering", "[report]") {
  const Instrument inst = make_instrument({4});
  auto entry = [&](Phase phase, const char* when, std::string sid, int value) {
    return SeriesEntry{phase, at(when), {std::move(sid)}, overall_score(uniform_sheet(inst, value), inst)};
  };
  RatingSheet plan_sheet{Aspect::intent, {{{1, 1}, Rating::of(3)}, {{1, 2}, Rating::of(3)}, {{1, 3}, Rating::of(0)}, {{1, 4}, Rating::of(0)}}};
  RatingSheet post_sheet{Aspect::intent, {{{1, 1}, Rating::of(3)}, {{1, 2}, Rating::of(3)}, {{1, 3}, Rating::of(3)}, {{1, 4}, Rating::of(0)}}};
  const std::vector<SeriesEntry> series = {
      {Phase::plan(), at("2026-01-01T00:00:00Z"), {"S1"}, overall_score(plan_sheet, inst)},
      {Phase::post(), at("2026-07-01T00:00:00Z"), {"S2"}, overall_score(post_sheet, inst)}};
  const auto text = lines_of(render_trend(series, Format::text));
  REQUIRE(text.size() == 3);
  CHECK(text[1] == "plan 2026-01-01 50.0% - C1 50.0%");
  CHECK(text[2] == "post 2026-07-01 75.0% +25.0 C1 75.0%");

  const auto single = lines_of(render_trend({entry(Phase::plan(), "2026-01-01T00:00:00Z", "S1", 3)}, Format::csv));
  REQUIRE(single.size() == 2);
  CHECK(single[1] == "plan,2026-01-01T00:00:00Z,100.0000,,100.0000");
  const auto j = nlohmann::json::parse(render_trend(series, Format::json));
  CHECK(j.at("entries").at(0).at("delta").is_null());
  CHECK(j.at("entries").at(1).at("delta") == "25.0000");
}

TEST_CASE("csv fields are quoted per RFC 4180", "[report]") {
  CHECK(fmt::csv_row({"a", "b,c", "say \"hi\""}) == "a,\"b,c\",\"say \"\"hi\"\"\"\r\n");
}
