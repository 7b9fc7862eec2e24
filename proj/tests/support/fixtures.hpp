#pragma once

#include "commitgauge/commitgauge.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace commitgauge::testing {

/// Ratings C3B1..C3B8 of the worked questionnaire example: 3 1 2 1 0 1 3 1.
inline RatingSheet worked_example_sheet(Aspect aspect = Aspect::intent) {
  static constexpr int values[] = {3, 1, 2, 1, 0, 1, 3, 1};
  RatingSheet sheet{aspect, {}};
  for (int b = 1; b <= 8; ++b) sheet.ratings.emplace(BehaviorId{3, b}, Rating::of(values[b - 1]));
  return sheet;
}

inline RatingSheet uniform_sheet(const Instrument& inst, int value, Aspect aspect = Aspect::intent) {
  RatingSheet sheet{aspect, {}};
  for (const auto& id : inst.scored_behaviors()) sheet.ratings.emplace(id, Rating::of(value));
  return sheet;
}

/// Instrument from (behavior count) per category; 0 means placeholder.
inline Instrument make_instrument(std::initializer_list<int> counts, std::string id = "test") {
  Instrument inst{std::move(id), "test instrument", std::nullopt, {}};
  int c = 1;
  for (int n : counts) {
    Category cat{c, "Category " + std::to_string(c), "description " + std::to_string(c), n == 0, {}};
    for (int b = 1; b <= n; ++b) cat.behaviors.push_back({BehaviorId{c, b}, "Prompt C" + std::to_string(c) + "B" + std::to_string(b) + "."});
    inst.categories.push_back(std::move(cat));
    ++c;
  }
  return inst;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("commitgauge-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Timestamp at(const char* text) { return parse_timestamp(text); }

}  // namespace commitgauge::testing
