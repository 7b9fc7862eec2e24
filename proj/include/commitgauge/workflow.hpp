#pragma once

// Store-backed use cases shared by the CLI and the HTTP service. Neither
// front end computes scores itself; both call into here.

#include "commitgauge/error.hpp"
#include "commitgauge/instrument.hpp"
#include "commitgauge/report.hpp"
#include "commitgauge/scoring.hpp"
#include "commitgauge/session.hpp"
#include "commitgauge/store.hpp"

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace commitgauge {

inline Instrument project_instrument(const Store& store, const std::string& project_id) {
  return store.load_instrument(store.load_project(project_id).instrument_id);
}

struct NewSession {
  std::string project_id;
  Role role = Role::change_agent;
  Phase phase;
  std::set<Aspect> aspects;
  std::string label;
  std::optional<std::string> session_id;
  std::optional<Timestamp> timestamp;
};

inline Session create_session(Store& store, const NewSession& req) {
  if (!store.has_project(req.project_id)) throw Error(ErrorKind::not_found, "unknown project '" + req.project_id + "'");
  const std::string id = req.session_id ? *req.session_id : store.next_session_id(req.project_id);
  check_entity_id(id, "session");
  if (store.has_session(id)) throw Error(ErrorKind::conflict, "session " + id + " already exists");
  Session s = open_session(id, req.project_id, req.role, req.phase, req.aspects, req.label,
                           req.timestamp.value_or(now_utc()));
  store.save_session(s);
  return s;
}

/// Applies a batch of ratings to one sheet. Every entry is checked before
/// any is applied, so a rejected batch leaves the stored session untouched.
inline Session apply_ratings(Store& store, const std::string& session_id, Aspect aspect,
                             const std::vector<std::pair<BehaviorId, Rating>>& ratings) {
  Session s = store.load_session(session_id);
  const Instrument inst = project_instrument(store, s.project_id);
  for (const auto& [id, r] : ratings) check_rating(s, aspect, id, inst);
  for (const auto& [id, r] : ratings) s = record_rating(std::move(s), aspect, id, r, inst);
  store.save_session(s);
  return s;
}

inline Session seal_session(Store& store, const std::string& session_id) {
  const Session s = store.load_session(session_id);
  if (s.sealed) return s;
  Session sealed = finalize_session(s, project_instrument(store, s.project_id));
  store.save_session(sealed);
  return sealed;
}

/// Which sessions of a project feed a report.
struct Selection {
  std::optional<std::string> session_id;  // a single session, else all matching `filter`
  SessionFilter filter;
};

struct Gathered {
  std::vector<Session> sessions;  // sealed, in store order
  int unsealed_excluded = 0;
};

inline Gathered gather(const Store& store, const std::string& project_id, const Selection& sel) {
  Gathered g;
  std::vector<Session> candidates;
  if (sel.session_id) {
    Session s = store.load_session(*sel.session_id);
    if (s.project_id != project_id) throw Error(ErrorKind::not_found, "session " + s.session_id + " not in project " + project_id);
    candidates.push_back(std::move(s));
  } else {
    candidates = store.list_sessions(project_id, sel.filter);
  }
  for (auto& s : candidates) {
    if (s.sealed) {
      g.sessions.push_back(std::move(s));
    } else {
      ++g.unsealed_excluded;
    }
  }
  return g;
}

/// Aggregate of every gathered sheet for `aspect`, or nullopt if none.
inline std::optional<ScoreSheet> aggregate_aspect(const Gathered& g, Aspect aspect) {
  std::vector<ScoreSheet> sheets;
  for (const auto& s : g.sessions) {
    auto it = s.sheets.find(aspect);
    if (it != s.sheets.end()) sheets.push_back(to_score_sheet(it->second));
  }
  if (sheets.empty()) return std::nullopt;
  return aggregate_sheets(std::span<const ScoreSheet>(sheets));
}

/// A rendered document plus any warnings to surface alongside it.
struct ReportResult {
  std::string document;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::string> exclusion_warnings(const Gathered& g) {
  if (g.unsealed_excluded == 0) return {};
  return {std::to_string(g.unsealed_excluded) + " unsealed session(s) excluded"};
}

}  // namespace detail

inline CommitmentProfile profile_for(const Store& store, const std::string& project_id, Aspect aspect,
                                     const Selection& sel, Gathered* out = nullptr) {
  const Instrument inst = project_instrument(store, project_id);
  Gathered g = gather(store, project_id, sel);
  if (sel.session_id && g.sessions.empty()) {
    throw Error(ErrorKind::validation, "session " + *sel.session_id + " is not sealed");
  }
  auto sheet = aggregate_aspect(g, aspect);
  if (!sheet) {
    std::string msg = std::string("no sealed ") + to_string(aspect) + " ratings to report";
    if (g.unsealed_excluded > 0) msg += " (" + std::to_string(g.unsealed_excluded) + " unsealed session(s) excluded)";
    throw Error(ErrorKind::validation, msg);
  }
  if (out) *out = std::move(g);
  return overall_score(*sheet, inst);
}

inline ReportResult profile_report(const Store& store, const std::string& project_id, Aspect aspect,
                                   const Selection& sel, Format format) {
  Gathered g;
  const CommitmentProfile profile = profile_for(store, project_id, aspect, sel, &g);
  return {render_profile(profile, project_instrument(store, project_id), format), detail::exclusion_warnings(g)};
}

inline ReportResult gap_report(const Store& store, const std::string& project_id, const Selection& sel, Format format) {
  const Instrument inst = project_instrument(store, project_id);
  const Gathered g = gather(store, project_id, sel);
  auto effect = aggregate_aspect(g, Aspect::effect);
  auto intent = aggregate_aspect(g, Aspect::intent);
  if (!effect || !intent) {
    throw Error(ErrorKind::validation, "gap report needs sealed effect (part A) and intent (part B) ratings");
  }
  return {render_gap_report(gap_analysis(*effect, *intent, inst), inst, format), detail::exclusion_warnings(g)};
}

inline ReportResult top_report(const Store& store, const std::string& project_id, int k, const Selection& sel,
                               Format format) {
  const Instrument inst = project_instrument(store, project_id);
  const Gathered g = gather(store, project_id, sel);
  auto effect = aggregate_aspect(g, Aspect::effect);
  if (!effect) throw Error(ErrorKind::validation, "top list needs sealed effect (part A) ratings");
  auto intent = aggregate_aspect(g, Aspect::intent);
  const auto ranked = top_behaviors(*effect, intent, k, inst);
  return {render_checklist(ranked, inst, intent ? intent : effect, format), detail::exclusion_warnings(g)};
}

inline ReportResult trend_report(const Store& store, const std::string& project_id, Aspect aspect,
                                 const Selection& sel, Format format) {
  const Instrument inst = project_instrument(store, project_id);
  const Gathered g = gather(store, project_id, sel);
  return {render_trend(profile_series(g.sessions, aspect, inst), format), detail::exclusion_warnings(g)};
}

/// One row per project: the most recent phase group of sealed sessions
/// for `aspect`; undefined when the project has none.
inline std::vector<BenchmarkRow> benchmark_rows(const Store& store, Aspect aspect) {
  std::vector<BenchmarkRow> rows;
  for (const auto& pid : store.list_projects()) {
    const Instrument inst = project_instrument(store, pid);
    const Gathered g = gather(store, pid, {});
    const auto series = profile_series(g.sessions, aspect, inst);
    if (series.empty()) {
      rows.push_back({pid, aspect, std::nullopt, {}});
    } else {
      rows.push_back(benchmark_row(pid, series.back().profile));
    }
  }
  return rows;
}

inline ReportResult benchmark_report(const Store& store, Aspect aspect, Format format) {
  return {render_benchmark(benchmark_rows(store, aspect), format), {}};
}

}  // namespace commitgauge
