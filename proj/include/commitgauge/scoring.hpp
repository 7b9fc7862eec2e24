#pragma once

#include "commitgauge/error.hpp"
#include "commitgauge/instrument.hpp"
#include "commitgauge/rational.hpp"
#include "commitgauge/session.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace commitgauge {

/// Rating values as exact rationals; nullopt is NA. Single-respondent
/// sheets hold integers, aggregated sheets hold respondent means.
struct ScoreSheet {
  Aspect aspect = Aspect::intent;
  std::map<BehaviorId, MaybeRational> values;

  bool operator==(const ScoreSheet&) const = default;
};

inline ScoreSheet to_score_sheet(const RatingSheet& sheet) {
  ScoreSheet out{sheet.aspect, {}};
  for (const auto& [id, rating] : sheet.ratings) {
    out.values.emplace(id, rating.is_na() ? MaybeRational{} : MaybeRational{Rational(*rating.value())});
  }
  return out;
}

struct CategoryScore {
  int category_index = 0;
  bool placeholder = false;
  MaybeRational percent;  // nullopt when nothing was rated
  int rated_count = 0;
  int na_count = 0;
  Rational raw_sum{0};

  bool operator==(const CategoryScore&) const = default;
};

struct CommitmentProfile {
  Aspect aspect = Aspect::intent;
  std::string instrument_id;
  std::vector<CategoryScore> categories;  // every instrument category, placeholders flagged
  MaybeRational overall_percent;
  int overall_rated_count = 0;
  Rational overall_raw_sum{0};

  bool operator==(const CommitmentProfile&) const = default;

  const CategoryScore* find(int index) const {
    for (const auto& c : categories)
      if (c.category_index == index) return &c;
    return nullptr;
  }
};

/// raw_sum / (rated_count * 3) * 100
inline MaybeRational percent_of(const Rational& raw_sum, int rated_count) {
  if (rated_count == 0) return std::nullopt;
  return raw_sum * 100 / (Rational(rated_count) * 3);
}

namespace detail {

inline void require_complete(const ScoreSheet& sheet, const Category& category) {
  std::vector<std::string> missing;
  for (const auto& b : category.behaviors)
    if (!sheet.values.contains(b.id)) missing.push_back(b.id.str());
  if (!missing.empty()) {
    std::string msg = "incomplete sheet over " + category.label() + ", missing";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorKind::validation, msg, std::move(missing));
  }
}

}  // namespace detail

/// NA ratings are dropped from both the sum and the count; zeros stay in both.
inline CategoryScore category_score(const ScoreSheet& sheet, const Category& category) {
  CategoryScore score;
  score.category_index = category.index;
  score.placeholder = category.placeholder;
  if (category.placeholder) return score;

  detail::require_complete(sheet, category);
  for (const auto& b : category.behaviors) {
    const MaybeRational& value = sheet.values.at(b.id);
    if (value) {
      score.raw_sum += *value;
      ++score.rated_count;
    } else {
      ++score.na_count;
    }
  }
  score.percent = percent_of(score.raw_sum, score.rated_count);
  return score;
}

inline CategoryScore category_score(const RatingSheet& sheet, const Category& category) {
  return category_score(to_score_sheet(sheet), category);
}

/// Overall score pools sums and counts across scored categories, so each
/// category weighs in proportion to its rated behaviors.
inline CommitmentProfile overall_score(const ScoreSheet& sheet, const Instrument& inst) {
  CommitmentProfile profile;
  profile.aspect = sheet.aspect;
  profile.instrument_id = inst.id;
  for (const auto& category : inst.categories) {
    CategoryScore score = category_score(sheet, category);
    profile.overall_raw_sum += score.raw_sum;
    profile.overall_rated_count += score.rated_count;
    profile.categories.push_back(std::move(score));
  }
  profile.overall_percent = percent_of(profile.overall_raw_sum, profile.overall_rated_count);
  return profile;
}

inline CommitmentProfile overall_score(const RatingSheet& sheet, const Instrument& inst) {
  return overall_score(to_score_sheet(sheet), inst);
}

/// Per-behavior mean over respondents who did not answer NA; NA only when
/// every respondent answered NA.
inline ScoreSheet aggregate_sheets(std::span<const ScoreSheet> sheets) {
  if (sheets.empty()) throw Error(ErrorKind::validation, "no sheets to aggregate");
  const Aspect aspect = sheets.front().aspect;
  for (const auto& s : sheets) {
    if (s.aspect != aspect) throw Error(ErrorKind::validation, "cannot aggregate sheets of mixed aspects");
    if (s.values.size() != sheets.front().values.size() ||
        !std::equal(s.values.begin(), s.values.end(), sheets.front().values.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw Error(ErrorKind::validation, "cannot aggregate sheets covering different behaviors");
    }
  }

  ScoreSheet out{aspect, {}};
  for (const auto& [id, unused] : sheets.front().values) {
    Rational sum{0};
    int count = 0;
    for (const auto& s : sheets) {
      if (const auto& v = s.values.at(id)) {
        sum += *v;
        ++count;
      }
    }
    out.values.emplace(id, count == 0 ? MaybeRational{} : MaybeRational{sum / count});
  }
  return out;
}

inline ScoreSheet aggregate_sheets(std::span<const RatingSheet> sheets) {
  std::vector<ScoreSheet> converted;
  converted.reserve(sheets.size());
  for (const auto& s : sheets) converted.push_back(to_score_sheet(s));
  return aggregate_sheets(std::span<const ScoreSheet>(converted));
}

// --- Gap analysis -------------------------------------------------------

struct GapEntry {
  std::variant<int, BehaviorId> scope;  // category index or behavior
  MaybeRational effect;  // percent (category) or rating (behavior)
  MaybeRational intent;
  MaybeRational delta;   // effect - intent, defined iff both sides are

  bool operator==(const GapEntry&) const = default;
};

struct GapAnalysis {
  std::vector<GapEntry> categories;
  std::vector<GapEntry> behaviors;

  bool operator==(const GapAnalysis&) const = default;
};

inline MaybeRational difference(const MaybeRational& a, const MaybeRational& b) {
  if (a && b) return *a - *b;
  return std::nullopt;
}

/// Each side's category percent uses its own rated set.
inline GapAnalysis gap_analysis(const ScoreSheet& effect, const ScoreSheet& intent,
                                const Instrument& inst) {
  GapAnalysis gaps;
  for (const auto& category : inst.categories) {
    if (category.placeholder) continue;
    const auto e = category_score(effect, category);
    const auto i = category_score(intent, category);
    gaps.categories.push_back({category.index, e.percent, i.percent, difference(e.percent, i.percent)});
    for (const auto& b : category.behaviors) {
      const auto& ev = effect.values.at(b.id);
      const auto& iv = intent.values.at(b.id);
      gaps.behaviors.push_back({b.id, ev, iv, difference(ev, iv)});
    }
  }
  return gaps;
}

inline GapAnalysis gap_analysis(const RatingSheet& effect, const RatingSheet& intent,
                                const Instrument& inst) {
  return gap_analysis(to_score_sheet(effect), to_score_sheet(intent), inst);
}

// --- Ranking ------------------------------------------------------------

struct RankedBehavior {
  int rank = 0;
  BehaviorId behavior_id;
  Rational effect_rating{0};
  MaybeRational intent_rating;

  bool operator==(const RankedBehavior&) const = default;
};

/// Orders by effect descending, then intent descending (absent or NA
/// intent sorts as -1), then id ascending. Behaviors NA on effect are skipped.
inline std::vector<RankedBehavior> top_behaviors(const ScoreSheet& effect,
                                                 const std::optional<ScoreSheet>& intent, int k,
                                                 const Instrument& inst) {
  if (k < 1) throw Error(ErrorKind::validation, "k must be at least 1");
  for (const auto& category : inst.categories)
    if (!category.placeholder) detail::require_complete(effect, category);

  std::vector<RankedBehavior> eligible;
  for (const auto& id : inst.scored_behaviors()) {
    const auto& ev = effect.values.at(id);
    if (!ev) continue;
    MaybeRational iv;
    if (intent) {
      auto it = intent->values.find(id);
      if (it != intent->values.end()) iv = it->second;
    }
    eligible.push_back({0, id, *ev, iv});
  }

  const Rational absent{-1};
  std::sort(eligible.begin(), eligible.end(), [&](const RankedBehavior& a, const RankedBehavior& b) {
    if (a.effect_rating != b.effect_rating) return a.effect_rating > b.effect_rating;
    const Rational ai = a.intent_rating.value_or(absent);
    const Rational bi = b.intent_rating.value_or(absent);
    if (ai != bi) return ai > bi;
    return a.behavior_id < b.behavior_id;
  });

  if (eligible.size() > static_cast<std::size_t>(k)) eligible.resize(static_cast<std::size_t>(k));
  int rank = 1;
  for (auto& r : eligible) r.rank = rank++;
  return eligible;
}

inline std::vector<RankedBehavior> top_behaviors(const RatingSheet& effect,
                                                 const std::optional<RatingSheet>& intent, int k,
                                                 const Instrument& inst) {
  std::optional<ScoreSheet> converted;
  if (intent) converted = to_score_sheet(*intent);
  return top_behaviors(to_score_sheet(effect), converted, k, inst);
}

// --- Time series --------------------------------------------------------

struct SeriesEntry {
  Phase phase;
  Timestamp timestamp{};                 // earliest session of the phase group
  std::vector<std::string> session_ids;  // sorted
  CommitmentProfile profile;

  bool operator==(const SeriesEntry&) const = default;
};

/// Groups sealed sessions by phase, aggregates each group's sheets for
/// `aspect`, and orders the groups by time (then first session id).
/// Sessions without a sheet for `aspect` are ignored.
inline std::vector<SeriesEntry> profile_series(std::span<const Session> sessions, Aspect aspect,
                                               const Instrument& inst) {
  struct Group {
    Timestamp first{Timestamp::max()};
    std::vector<std::string> ids;
    std::vector<ScoreSheet> sheets;
  };
  std::map<Phase, Group> groups;
  const std::string* project = nullptr;
  for (const auto& s : sessions) {
    if (!s.sealed) throw Error(ErrorKind::validation, "session " + s.session_id + " is not sealed");
    if (project == nullptr) project = &s.project_id;
    if (*project != s.project_id) {
      throw Error(ErrorKind::validation, "sessions belong to different projects");
    }
    auto it = s.sheets.find(aspect);
    if (it == s.sheets.end()) continue;
    Group& g = groups[s.phase];
    g.first = std::min(g.first, s.timestamp);
    g.ids.push_back(s.session_id);
    g.sheets.push_back(to_score_sheet(it->second));
  }

  std::vector<SeriesEntry> series;
  for (auto& [phase, g] : groups) {
    std::sort(g.ids.begin(), g.ids.end());
    series.push_back({phase, g.first, g.ids,
                      overall_score(aggregate_sheets(std::span<const ScoreSheet>(g.sheets)), inst)});
  }
  std::sort(series.begin(), series.end(), [](const SeriesEntry& a, const SeriesEntry& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.session_ids.front() < b.session_ids.front();
  });
  return series;
}

}  // namespace commitgauge
