#pragma once

#include "commitgauge/instrument.hpp"
#include "commitgauge/rational.hpp"
#include "commitgauge/scoring.hpp"
#include "commitgauge/session.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace commitgauge {

enum class Format { text, json, csv };

inline Format parse_format(std::string_view text) {
  if (text == "text") return Format::text;
  if (text == "json") return Format::json;
  if (text == "csv") return Format::csv;
  throw Error(ErrorKind::validation, "unknown format '" + std::string(text) + "'");
}

struct BenchmarkRow {
  std::string project_id;
  Aspect aspect = Aspect::intent;
  MaybeRational overall_percent;
  std::vector<std::pair<int, MaybeRational>> category_percents;  // scored categories only

  bool operator==(const BenchmarkRow&) const = default;
};

inline BenchmarkRow benchmark_row(std::string project_id, const CommitmentProfile& profile) {
  BenchmarkRow row{std::move(project_id), profile.aspect, profile.overall_percent, {}};
  for (const auto& c : profile.categories)
    if (!c.placeholder) row.category_percents.emplace_back(c.category_index, c.percent);
  return row;
}

namespace fmt {

/// "50.0%" or "n/a" for text tables.
inline std::string percent(const MaybeRational& v) { return v ? to_decimal(*v, 1) + "%" : "n/a"; }

/// Four-place decimal string for machine formats.
inline std::string exact(const Rational& v) { return to_decimal(v, 4); }

inline nlohmann::json exact(const MaybeRational& v) {
  return v ? nlohmann::json(exact(*v)) : nlohmann::json(nullptr);
}

inline std::string exact_or_na(const MaybeRational& v) { return v ? exact(*v) : "n/a"; }

inline std::string delta(const MaybeRational& v) { return v ? to_signed_decimal(*v, 1) : "n/a"; }

/// A rating on the 0..3 scale; aggregated means print with one decimal.
inline std::string rating(const MaybeRational& v) {
  if (!v) return "NA";
  if (v->denominator() == 1) return std::to_string(v->numerator());
  return to_decimal(*v, 1);
}

/// RFC 4180 field.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  return line + "\r\n";
}

inline std::string json_doc(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline std::string date(Timestamp t) { return format_timestamp(t).substr(0, 10); }

}  // namespace fmt

namespace detail {

inline std::string category_name(const Instrument& inst, int index) {
  const Category* c = inst.find_category(index);
  return c ? c->name : std::string{};
}

inline const char* status_of(const CategoryScore& c) {
  if (c.placeholder) return "placeholder";
  return c.percent ? "scored" : "undefined";
}

}  // namespace detail

// --- profile ------------------------------------------------------------

inline std::string render_profile(const CommitmentProfile& profile, const Instrument& inst, Format format) {
  const bool any_placeholder = std::any_of(profile.categories.begin(), profile.categories.end(),
                                           [](const CategoryScore& c) { return c.placeholder; });
  const bool any_undefined = std::any_of(profile.categories.begin(), profile.categories.end(),
                                         [](const CategoryScore& c) { return !c.placeholder && !c.percent; });
  int overall_na = 0;
  for (const auto& c : profile.categories) overall_na += c.na_count;

  std::vector<std::string> notes;
  if (any_placeholder) notes.push_back("placeholder categories have no installed behaviors and are excluded from R");
  if (any_undefined) notes.push_back("n/a categories have no rated behaviors and are excluded from R");

  switch (format) {
    case Format::json: {
      nlohmann::json categories = nlohmann::json::array();
      for (const auto& c : profile.categories) {
        categories.push_back({{"index", c.category_index},
                              {"name", detail::category_name(inst, c.category_index)},
                              {"status", detail::status_of(c)},
                              {"percent", fmt::exact(c.percent)},
                              {"rated_count", c.rated_count},
                              {"na_count", c.na_count},
                              {"raw_sum", fmt::exact(c.raw_sum)}});
      }
      return fmt::json_doc({{"aspect", to_string(profile.aspect)},
                            {"instrument_id", profile.instrument_id},
                            {"categories", std::move(categories)},
                            {"overall",
                             {{"percent", fmt::exact(profile.overall_percent)},
                              {"rated_count", profile.overall_rated_count},
                              {"na_count", overall_na},
                              {"raw_sum", fmt::exact(profile.overall_raw_sum)}}},
                            {"notes", notes}});
    }
    case Format::csv: {
      std::string out = fmt::csv_row({"category", "name", "status", "percent", "rated_count", "na_count", "raw_sum"});
      for (const auto& c : profile.categories) {
        out += fmt::csv_row({"C" + std::to_string(c.category_index), detail::category_name(inst, c.category_index),
                             detail::status_of(c), fmt::exact_or_na(c.percent), std::to_string(c.rated_count),
                             std::to_string(c.na_count), fmt::exact(c.raw_sum)});
      }
      out += fmt::csv_row({"R", "overall", profile.overall_percent ? "scored" : "undefined",
                           fmt::exact_or_na(profile.overall_percent), std::to_string(profile.overall_rated_count),
                           std::to_string(overall_na), fmt::exact(profile.overall_raw_sum)});
      return out;
    }
    case Format::text: break;
  }

  std::ostringstream out;
  out << "Commitment profile (" << to_string(profile.aspect) << ") - " << inst.title << "\n";
  for (const auto& c : profile.categories) {
    out << "C" << c.category_index << " " << detail::category_name(inst, c.category_index) << " ";
    if (c.placeholder) {
      out << "n/a (placeholder)\n";
    } else if (!c.percent) {
      out << "n/a* (rated 0, n/a " << c.na_count << ")\n";
    } else {
      out << fmt::percent(c.percent) << " (rated " << c.rated_count << ", n/a " << c.na_count << ")\n";
    }
  }
  out << "R overall " << fmt::percent(profile.overall_percent) << " (rated " << profile.overall_rated_count
      << ", n/a " << overall_na << ")\n";
  if (any_undefined) out << "* no rated behaviors; category excluded from R\n";
  if (any_placeholder) out << "placeholder: no behaviors installed; category excluded from R\n";
  return out.str();
}

// --- gap report ---------------------------------------------------------

inline std::string render_gap_report(const GapAnalysis& gaps, const Instrument& inst, Format format) {
  std::vector<GapEntry> categories = gaps.categories;
  std::stable_sort(categories.begin(), categories.end(), [](const GapEntry& a, const GapEntry& b) {
    if (a.delta.has_value() != b.delta.has_value()) return a.delta.has_value();
    if (a.delta && *a.delta != *b.delta) return *a.delta > *b.delta;
    return std::get<int>(a.scope) < std::get<int>(b.scope);
  });
  const std::string note = "category percents use each side's own rated behaviors";

  switch (format) {
    case Format::json: {
      nlohmann::json cj = nlohmann::json::array();
      for (const auto& g : categories) {
        const int index = std::get<int>(g.scope);
        cj.push_back({{"index", index}, {"name", detail::category_name(inst, index)},
                      {"effect", fmt::exact(g.effect)}, {"intent", fmt::exact(g.intent)},
                      {"delta", fmt::exact(g.delta)}});
      }
      nlohmann::json bj = nlohmann::json::array();
      for (const auto& g : gaps.behaviors) {
        bj.push_back({{"behavior_id", std::get<BehaviorId>(g.scope).str()}, {"effect", fmt::exact(g.effect)},
                      {"intent", fmt::exact(g.intent)}, {"delta", fmt::exact(g.delta)}});
      }
      return fmt::json_doc({{"categories", std::move(cj)}, {"behaviors", std::move(bj)}, {"notes", {note}}});
    }
    case Format::csv: {
      std::string out = fmt::csv_row({"scope", "name", "effect", "intent", "delta"});
      for (const auto& g : categories) {
        const int index = std::get<int>(g.scope);
        out += fmt::csv_row({"C" + std::to_string(index), detail::category_name(inst, index),
                             fmt::exact_or_na(g.effect), fmt::exact_or_na(g.intent), fmt::exact_or_na(g.delta)});
      }
      for (const auto& g : gaps.behaviors) {
        out += fmt::csv_row({std::get<BehaviorId>(g.scope).str(), "", fmt::exact_or_na(g.effect),
                             fmt::exact_or_na(g.intent), fmt::exact_or_na(g.delta)});
      }
      return out;
    }
    case Format::text: break;
  }

  std::ostringstream out;
  out << "Effect vs intent by category (delta = effect - intent)\n";
  for (const auto& g : categories) {
    const int index = std::get<int>(g.scope);
    out << "C" << index << " " << detail::category_name(inst, index) << " effect " << fmt::percent(g.effect)
        << " intent " << fmt::percent(g.intent) << " delta " << fmt::delta(g.delta) << "\n";
  }
  out << "Behaviors\n";
  for (const auto& g : gaps.behaviors) {
    out << std::get<BehaviorId>(g.scope).str() << " effect " << fmt::rating(g.effect) << " intent "
        << fmt::rating(g.intent) << " delta " << fmt::delta(g.delta) << "\n";
  }
  out << "note: " << note << "\n";
  return out.str();
}

// --- checklist ----------------------------------------------------------

/// `review` is the sheet whose NA and 0 answers get listed for a second
/// look; normally the plan (intent) sheet.
inline std::string render_checklist(const std::vector<RankedBehavior>& ranked, const Instrument& inst,
                                    const std::optional<ScoreSheet>& review, Format format) {
  auto prompt_of = [&](const BehaviorId& id) {
    const Behavior* b = inst.find_behavior(id);
    return b ? b->prompt : std::string{};
  };
  std::vector<std::pair<BehaviorId, MaybeRational>> flagged;
  if (review) {
    for (const auto& [id, v] : review->values)
      if (!v || *v == Rational(0)) flagged.emplace_back(id, v);
  }

  switch (format) {
    case Format::json: {
      nlohmann::json rj = nlohmann::json::array();
      for (const auto& r : ranked) {
        rj.push_back({{"rank", r.rank}, {"behavior_id", r.behavior_id.str()}, {"prompt", prompt_of(r.behavior_id)},
                      {"effect", fmt::exact(r.effect_rating)}, {"intent", fmt::exact(r.intent_rating)}});
      }
      nlohmann::json fj = nlohmann::json::array();
      for (const auto& [id, v] : flagged) fj.push_back({{"behavior_id", id.str()}, {"rating", fmt::rating(v)}});
      return fmt::json_doc({{"ranked", std::move(rj)}, {"review", std::move(fj)}});
    }
    case Format::csv: {
      std::string out = fmt::csv_row({"rank", "behavior_id", "effect", "intent", "prompt"});
      for (const auto& r : ranked) {
        out += fmt::csv_row({std::to_string(r.rank), r.behavior_id.str(), fmt::exact(r.effect_rating),
                             fmt::exact_or_na(r.intent_rating), prompt_of(r.behavior_id)});
      }
      return out;
    }
    case Format::text: break;
  }

  std::ostringstream out;
  out << "Top " << ranked.size() << " behaviors to monitor\n";
  for (const auto& r : ranked) {
    out << r.rank << ". " << r.behavior_id.str() << " " << prompt_of(r.behavior_id) << " [planned: ";
    if (!r.intent_rating) {
      out << "-";
    } else if (r.intent_rating->denominator() == 1) {
      out << r.intent_rating->numerator() << " " << extent_word(static_cast<int>(r.intent_rating->numerator()));
    } else {
      out << fmt::rating(r.intent_rating);
    }
    out << "]\n";
  }
  out << "Review NA/0 choices; each one needs a good reason:\n";
  if (!review) out << "  (no plan sheet)\n";
  for (const auto& [id, v] : flagged) out << "  " << id.str() << " " << fmt::rating(v) << " " << prompt_of(id) << "\n";
  return out.str();
}

// --- benchmark ----------------------------------------------------------

/// Rows by overall percent descending, undefined last, ties by project id.
inline std::vector<BenchmarkRow> sorted_benchmark(std::vector<BenchmarkRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    if (a.overall_percent.has_value() != b.overall_percent.has_value()) return a.overall_percent.has_value();
    if (a.overall_percent && *a.overall_percent != *b.overall_percent) return *a.overall_percent > *b.overall_percent;
    if (a.project_id != b.project_id) return a.project_id < b.project_id;
    return a.aspect < b.aspect;
  });
  return rows;
}

inline std::string render_benchmark(std::vector<BenchmarkRow> rows, Format format) {
  rows = sorted_benchmark(std::move(rows));
  int max_category = 0;
  for (const auto& r : rows)
    for (const auto& [index, p] : r.category_percents) max_category = std::max(max_category, index);
  auto percent_for = [](const BenchmarkRow& r, int index) -> std::optional<MaybeRational> {
    for (const auto& [i, p] : r.category_percents)
      if (i == index) return p;
    return std::nullopt;
  };

  switch (format) {
    case Format::json: {
      nlohmann::json rj = nlohmann::json::array();
      for (const auto& r : rows) {
        nlohmann::json cats = nlohmann::json::array();
        for (const auto& [i, p] : r.category_percents) cats.push_back({{"index", i}, {"percent", fmt::exact(p)}});
        rj.push_back({{"project_id", r.project_id}, {"aspect", to_string(r.aspect)},
                      {"overall_percent", fmt::exact(r.overall_percent)}, {"categories", std::move(cats)}});
      }
      return fmt::json_doc({{"rows", std::move(rj)}});
    }
    case Format::csv: {
      std::vector<std::string> header = {"project_id", "aspect", "overall_percent"};
      for (int i = 1; i <= max_category; ++i) header.push_back("C" + std::to_string(i));
      std::string out = fmt::csv_row(header);
      for (const auto& r : rows) {
        std::vector<std::string> fields = {r.project_id, to_string(r.aspect), fmt::exact_or_na(r.overall_percent)};
        for (int i = 1; i <= max_category; ++i) {
          const auto p = percent_for(r, i);
          fields.push_back(p ? fmt::exact_or_na(*p) : "");
        }
        out += fmt::csv_row(fields);
      }
      return out;
    }
    case Format::text: break;
  }

  std::ostringstream out;
  out << "Benchmark: project aspect R% categories\n";
  int rank = 1;
  for (const auto& r : rows) {
    out << rank++ << ". " << r.project_id << " " << to_string(r.aspect) << " " << fmt::percent(r.overall_percent);
    for (const auto& [i, p] : r.category_percents) out << " C" << i << " " << fmt::percent(p);
    out << "\n";
  }
  return out.str();
}

// --- trend --------------------------------------------------------------

inline std::string render_trend(const std::vector<SeriesEntry>& series, Format format) {
  std::vector<MaybeRational> deltas;
  for (std::size_t i = 0; i < series.size(); ++i) {
    deltas.push_back(i == 0 ? MaybeRational{}
                            : difference(series[i].profile.overall_percent, series[i - 1].profile.overall_percent));
  }
  int max_category = 0;
  for (const auto& e : series)
    for (const auto& c : e.profile.categories)
      if (!c.placeholder) max_category = std::max(max_category, c.category_index);

  switch (format) {
    case Format::json: {
      nlohmann::json ej = nlohmann::json::array();
      for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& e = series[i];
        nlohmann::json cats = nlohmann::json::array();
        for (const auto& c : e.profile.categories)
          if (!c.placeholder) cats.push_back({{"index", c.category_index}, {"percent", fmt::exact(c.percent)}});
        ej.push_back({{"phase", to_json(e.phase)}, {"timestamp", format_timestamp(e.timestamp)},
                      {"session_ids", e.session_ids}, {"overall_percent", fmt::exact(e.profile.overall_percent)},
                      {"delta", i == 0 ? nlohmann::json(nullptr) : fmt::exact(deltas[i])},
                      {"categories", std::move(cats)}});
      }
      return fmt::json_doc({{"entries", std::move(ej)}});
    }
    case Format::csv: {
      std::vector<std::string> header = {"phase", "timestamp", "overall_percent", "delta"};
      for (int i = 1; i <= max_category; ++i) header.push_back("C" + std::to_string(i));
      std::string out = fmt::csv_row(header);
      for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& e = series[i];
        std::vector<std::string> fields = {e.phase.str(), format_timestamp(e.timestamp),
                                           fmt::exact_or_na(e.profile.overall_percent),
                                           i == 0 ? "" : fmt::exact_or_na(deltas[i])};
        for (int c = 1; c <= max_category; ++c) {
          const CategoryScore* s = e.profile.find(c);
          fields.push_back(s && !s->placeholder ? fmt::exact_or_na(s->percent) : "");
        }
        out += fmt::csv_row(fields);
      }
      return out;
    }
    case Format::text: break;
  }

  std::ostringstream out;
  out << "Trend: phase date R% delta categories\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& e = series[i];
    out << e.phase.str() << " " << fmt::date(e.timestamp) << " " << fmt::percent(e.profile.overall_percent) << " "
        << (i == 0 ? std::string("-") : fmt::delta(deltas[i]));
    for (const auto& c : e.profile.categories)
      if (!c.placeholder) out << " C" << c.category_index << " " << fmt::percent(c.percent);
    out << "\n";
  }
  return out.str();
}

}  // namespace commitgauge
