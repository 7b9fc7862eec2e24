#pragma once

#include "commitgauge/error.hpp"
#include "commitgauge/instrument.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace commitgauge {

/// One answer on the five-point scale: 0..3, or not applicable.
/// NA is excluded from scoring; 0 is a rated value.
class Rating {
 public:
  static Rating na() { return Rating(); }
  static Rating of(int value) {
    if (value < 0 || value > 3) {
      throw Error(ErrorKind::validation, "rating out of range: " + std::to_string(value));
    }
    return Rating(value);
  }

  static std::optional<Rating> try_parse(std::string_view text) {
    if (text == "NA" || text == "na" || text == "N/A" || text == "n/a" || text == "-") return na();
    if (text.size() == 1 && text[0] >= '0' && text[0] <= '3') return Rating(text[0] - '0');
    return std::nullopt;
  }
  static Rating parse(std::string_view text) {
    if (auto r = try_parse(text)) return *r;
    throw Error(ErrorKind::validation, "rating out of range: '" + std::string(text) + "'");
  }

  bool is_na() const { return value_ < 0; }
  std::optional<int> value() const {
    if (is_na()) return std::nullopt;
    return value_;
  }
  std::string str() const { return is_na() ? "NA" : std::to_string(value_); }

  bool operator==(const Rating&) const = default;

 private:
  Rating() = default;
  explicit Rating(int v) : value_(v) {}
  int value_ = -1;
};

/// effect = part A (impact on an SPI project in general),
/// intent = part B (planned demonstration),
/// perceived = extent felt demonstrated after the fact.
enum class Aspect { intent, effect, perceived };

inline constexpr Aspect kAllAspects[] = {Aspect::intent, Aspect::effect, Aspect::perceived};

inline const char* to_string(Aspect a) {
  switch (a) {
    case Aspect::intent: return "intent";
    case Aspect::effect: return "effect";
    case Aspect::perceived: return "perceived";
  }
  return "?";
}

inline std::optional<Aspect> try_parse_aspect(std::string_view text) {
  if (text == "intent" || text == "B") return Aspect::intent;
  if (text == "effect" || text == "A") return Aspect::effect;
  if (text == "perceived") return Aspect::perceived;
  return std::nullopt;
}

inline Aspect parse_aspect(std::string_view text) {
  if (auto a = try_parse_aspect(text)) return *a;
  throw Error(ErrorKind::validation, "unknown aspect '" + std::string(text) + "'");
}

enum class Role { change_agent, developer, manager };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::change_agent: return "change_agent";
    case Role::developer: return "developer";
    case Role::manager: return "manager";
  }
  return "?";
}

inline Role parse_role(std::string_view text) {
  if (text == "change_agent") return Role::change_agent;
  if (text == "developer") return Role::developer;
  if (text == "manager") return Role::manager;
  throw Error(ErrorKind::validation, "unknown role '" + std::string(text) + "'");
}

struct Phase {
  enum class Kind { plan, periodic, post };
  Kind kind = Kind::plan;
  int k = 0;  // ordinal of a periodic re-assessment, >= 1; unused otherwise

  static Phase plan() { return {Kind::plan, 0}; }
  static Phase post() { return {Kind::post, 0}; }
  static Phase periodic(int k) {
    if (k < 1) throw Error(ErrorKind::validation, "periodic phase needs k >= 1");
    return {Kind::periodic, k};
  }

  auto operator<=>(const Phase&) const = default;

  std::string str() const {
    switch (kind) {
      case Kind::plan: return "plan";
      case Kind::post: return "post";
      case Kind::periodic: return "periodic:" + std::to_string(k);
    }
    return "?";
  }

  /// Accepts "plan", "post", "periodic:<k>".
  static Phase parse(std::string_view text) {
    if (text == "plan") return plan();
    if (text == "post") return post();
    constexpr std::string_view prefix = "periodic:";
    if (text.substr(0, prefix.size()) == prefix) {
      const auto digits = text.substr(prefix.size());
      int k = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
      if (ec == std::errc{} && ptr == digits.data() + digits.size()) return periodic(k);
    }
    throw Error(ErrorKind::validation, "unknown phase '" + std::string(text) + "'");
  }
};

using Timestamp = std::chrono::sys_seconds;

/// RFC 3339, UTC, second precision: 2026-10-14T09:30:00Z
inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

inline Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0;
  int h = 0, mi = 0, s = 0;
  char tail = 0;
  const std::string owned(text);
  if (std::sscanf(owned.c_str(), "%4d-%2u-%2uT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail) != 7 ||
      tail != 'Z' || owned.size() != 20) {
    throw Error(ErrorKind::parse, "malformed timestamp '" + owned + "' (expected YYYY-MM-DDTHH:MM:SSZ)");
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw Error(ErrorKind::parse, "invalid timestamp '" + owned + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

inline Timestamp now_utc() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

/// One filled questionnaire part for one aspect.
struct RatingSheet {
  Aspect aspect = Aspect::intent;
  std::map<BehaviorId, Rating> ratings;

  bool operator==(const RatingSheet&) const = default;

  std::optional<Rating> get(const BehaviorId& id) const {
    auto it = ratings.find(id);
    if (it == ratings.end()) return std::nullopt;
    return it->second;
  }
};

inline std::vector<BehaviorId> missing_behaviors(const RatingSheet& sheet, const Instrument& inst) {
  std::vector<BehaviorId> missing;
  for (const auto& id : inst.scored_behaviors())
    if (!sheet.ratings.contains(id)) missing.push_back(id);
  return missing;
}

inline bool is_complete(const RatingSheet& sheet, const Instrument& inst) {
  return missing_behaviors(sheet, inst).empty();
}

struct Session {
  std::string session_id;
  std::string project_id;
  Role role = Role::change_agent;
  std::string label;
  Phase phase;
  Timestamp timestamp{};
  std::map<Aspect, RatingSheet> sheets;
  bool sealed = false;

  bool operator==(const Session&) const = default;

  bool has(Aspect a) const { return sheets.contains(a); }
};

inline Session open_session(std::string session_id, std::string project_id, Role role, Phase phase,
                            const std::set<Aspect>& aspects, std::string label,
                            Timestamp timestamp = now_utc()) {
  if (aspects.empty()) throw Error(ErrorKind::validation, "no aspects");
  if (session_id.empty()) throw Error(ErrorKind::validation, "empty session id");
  Session s;
  s.session_id = std::move(session_id);
  s.project_id = std::move(project_id);
  s.role = role;
  s.label = std::move(label);
  s.phase = phase;
  s.timestamp = timestamp;
  for (Aspect a : aspects) s.sheets.emplace(a, RatingSheet{a, {}});
  return s;
}

/// Checks a rating write without applying it.
inline void check_rating(const Session& session, Aspect aspect, const BehaviorId& id,
                         const Instrument& inst) {
  if (session.sealed) throw Error(ErrorKind::sealed, "session " + session.session_id + " is sealed");
  if (!session.has(aspect)) {
    throw Error(ErrorKind::validation,
                std::string("unknown aspect '") + to_string(aspect) + "' for session " + session.session_id);
  }
  if (!inst.is_scored(id)) throw Error(ErrorKind::validation, "unknown behavior " + id.str());
}

/// Last write wins.
inline Session record_rating(Session session, Aspect aspect, const BehaviorId& id, Rating rating,
                             const Instrument& inst) {
  check_rating(session, aspect, id, inst);
  session.sheets.at(aspect).ratings.insert_or_assign(id, rating);
  return session;
}

/// All (aspect, id) pairs still unanswered, formatted "aspect:C3B8".
inline std::vector<std::string> missing_entries(const Session& session, const Instrument& inst) {
  std::vector<std::string> out;
  for (const auto& [aspect, sheet] : session.sheets)
    for (const auto& id : missing_behaviors(sheet, inst)) out.push_back(std::string(to_string(aspect)) + ":" + id.str());
  return out;
}

/// Seals a complete session. Sealing an already sealed session is a no-op.
inline Session finalize_session(Session session, const Instrument& inst) {
  if (session.sealed) return session;
  auto missing = missing_entries(session, inst);
  if (!missing.empty()) {
    std::string msg = "incomplete session " + session.session_id + ", missing";
    for (const auto& m : missing) msg += " " + m;
    throw Error(ErrorKind::validation, msg, std::move(missing));
  }
  session.sealed = true;
  return session;
}

/// Plan sessions normally collect intent and effect; later phases collect
/// perceived ratings. Other pairings are legal but flagged.
inline std::vector<std::string> pairing_warnings(const Session& s) {
  std::vector<std::string> out;
  for (const auto& [aspect, sheet] : s.sheets) {
    const bool plan = s.phase.kind == Phase::Kind::plan;
    const bool natural = plan ? aspect != Aspect::perceived : aspect == Aspect::perceived;
    if (!natural) {
      out.push_back(std::string("aspect '") + to_string(aspect) + "' is unusual for phase " + s.phase.str());
    }
  }
  return out;
}

/// Human-readable scale labels and question stem per aspect.
struct ScaleWording {
  const char* stem;
  const char* labels[5];  // 0, 1, 2, 3, NA
};

inline const ScaleWording& wording(Aspect a) {
  static const ScaleWording intent{
      "To what extent do you plan to demonstrate the following behaviors in your upcoming SPI-project?",
      {"The behavior is relevant but I do not intend to demonstrate it",
       "I will demonstrate the behavior to low extent",
       "I will demonstrate the behavior to moderate extent",
       "I will demonstrate the behavior to high extent",
       "The behavior is not relevant in the SPI-project"}};
  static const ScaleWording effect{
      "To what extent would the following behaviors affect an SPI-project in general?",
      {"The behavior is relevant but has no effect", "Low effect", "Moderate effect", "High effect",
       "The behavior is not relevant"}};
  static const ScaleWording perceived{
      "To what extent do you feel the following behaviors have been demonstrated in the SPI-project?",
      {"The behavior was relevant but was not demonstrated", "Demonstrated to low extent",
       "Demonstrated to moderate extent", "Demonstrated to high extent",
       "The behavior was not relevant in the SPI-project"}};
  switch (a) {
    case Aspect::intent: return intent;
    case Aspect::effect: return effect;
    case Aspect::perceived: return perceived;
  }
  return intent;
}

inline const char* extent_word(int value) {
  static constexpr const char* words[] = {"none", "low", "moderate", "high"};
  return (value >= 0 && value <= 3) ? words[value] : "?";
}

// --- JSON ---------------------------------------------------------------

inline nlohmann::json to_json(const RatingSheet& sheet) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, r] : sheet.ratings) j[id.str()] = r.str();
  return j;
}

inline nlohmann::json to_json(const Phase& p) {
  nlohmann::json j;
  switch (p.kind) {
    case Phase::Kind::plan: j["kind"] = "plan"; break;
    case Phase::Kind::post: j["kind"] = "post"; break;
    case Phase::Kind::periodic:
      j["kind"] = "periodic";
      j["k"] = p.k;
      break;
  }
  return j;
}

inline Phase phase_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "plan") return Phase::plan();
  if (kind == "post") return Phase::post();
  if (kind == "periodic") return Phase::periodic(j.at("k").get<int>());
  throw Error(ErrorKind::validation, "unknown phase kind '" + kind + "'");
}

/// Accepts "3", "NA" and bare integers.
inline Rating rating_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Rating::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rating::of(j.get<int>());
  throw Error(ErrorKind::validation, "rating must be a string or integer, got " + j.dump());
}

inline nlohmann::json to_json(const Session& s) {
  nlohmann::json sheets = nlohmann::json::object();
  for (const auto& [aspect, sheet] : s.sheets) sheets[to_string(aspect)] = to_json(sheet);
  return {{"schema_version", kSchemaVersion},
          {"session_id", s.session_id},
          {"project_id", s.project_id},
          {"role", to_string(s.role)},
          {"label", s.label},
          {"phase", to_json(s.phase)},
          {"timestamp", format_timestamp(s.timestamp)},
          {"sealed", s.sealed},
          {"sheets", std::move(sheets)}};
}

inline RatingSheet sheet_from_json(Aspect aspect, const nlohmann::json& j) {
  RatingSheet sheet{aspect, {}};
  for (const auto& [key, value] : j.items()) {
    sheet.ratings.insert_or_assign(BehaviorId::parse(key), rating_from_json(value));
  }
  return sheet;
}

inline Session session_from_json(const nlohmann::json& j) {
  try {
    check_schema_version(j, "session");
    Session s;
    s.session_id = j.at("session_id").get<std::string>();
    s.project_id = j.at("project_id").get<std::string>();
    s.role = parse_role(j.at("role").get<std::string>());
    s.label = j.value("label", std::string{});
    s.phase = phase_from_json(j.at("phase"));
    s.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
    s.sealed = j.value("sealed", false);
    for (const auto& [key, value] : j.at("sheets").items()) {
      const Aspect a = parse_aspect(key);
      s.sheets.emplace(a, sheet_from_json(a, value));
    }
    if (s.sheets.empty()) throw Error(ErrorKind::validation, "session has no sheets");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed session document: ") + e.what());
  }
}

}  // namespace commitgauge
