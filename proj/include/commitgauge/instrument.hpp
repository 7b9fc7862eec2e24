#pragma once

#include "commitgauge/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace commitgauge {

inline constexpr int kSchemaVersion = 1;

/// Identifies one behavior as "C{category}B{behavior}", both 1-based.
/// Ordering is lexicographic on (category, behavior).
struct BehaviorId {
  int category = 1;
  int behavior = 1;

  auto operator<=>(const BehaviorId&) const = default;

  std::string str() const {
    return "C" + std::to_string(category) + "B" + std::to_string(behavior);
  }

  static std::optional<BehaviorId> try_parse(std::string_view text) {
    auto read_index = [](std::string_view digits) -> std::optional<int> {
      if (digits.empty() || digits.size() > 6 || digits.front() == '0') return std::nullopt;
      if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
      int value = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
      return value;
    };
    if (text.size() < 4 || text.front() != 'C') return std::nullopt;
    const auto b = text.find('B');
    if (b == std::string_view::npos) return std::nullopt;
    auto category = read_index(text.substr(1, b - 1));
    auto behavior = read_index(text.substr(b + 1));
    if (!category || !behavior) return std::nullopt;
    return BehaviorId{*category, *behavior};
  }

  static BehaviorId parse(std::string_view text) {
    if (auto id = try_parse(text)) return *id;
    throw Error(ErrorKind::parse, "malformed behavior id '" + std::string(text) + "'");
  }
};

struct Behavior {
  BehaviorId id;
  std::string prompt;

  bool operator==(const Behavior&) const = default;
};

struct Category {
  int index = 1;
  std::string name;
  std::string description;
  bool placeholder = false;
  std::vector<Behavior> behaviors;

  bool operator==(const Category&) const = default;

  std::string label() const { return "C" + std::to_string(index); }
};

struct Instrument {
  std::string id;
  std::string title;
  std::optional<int> expected_total_behaviors;
  std::vector<Category> categories;

  bool operator==(const Instrument&) const = default;

  const Category* find_category(int index) const {
    for (const auto& c : categories)
      if (c.index == index) return &c;
    return nullptr;
  }

  const Behavior* find_behavior(const BehaviorId& id) const {
    const Category* category = find_category(id.category);
    if (category == nullptr) return nullptr;
    for (const auto& b : category->behaviors)
      if (b.id == id) return &b;
    return nullptr;
  }

  /// True when `id` names a behavior in a category that is scored.
  bool is_scored(const BehaviorId& id) const {
    const Category* category = find_category(id.category);
    return category != nullptr && !category->placeholder && find_behavior(id) != nullptr;
  }

  /// Behaviors of every non-placeholder category, in instrument order.
  std::vector<BehaviorId> scored_behaviors() const {
    std::vector<BehaviorId> ids;
    for (const auto& c : categories) {
      if (c.placeholder) continue;
      for (const auto& b : c.behaviors) ids.push_back(b.id);
    }
    return ids;
  }

  std::size_t behavior_count() const {
    std::size_t n = 0;
    for (const auto& c : categories) n += c.behaviors.size();
    return n;
  }
};

enum class Severity { error, warning };

struct Finding {
  Severity severity;
  std::string location;
  std::string message;

  bool operator==(const Finding&) const = default;

  std::string str() const {
    return std::string(severity == Severity::error ? "error" : "warning") + ": " +
           location + ": " + message;
  }
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool has_errors() const {
    return std::any_of(findings.begin(), findings.end(),
                       [](const Finding& f) { return f.severity == Severity::error; });
  }
  std::vector<Finding> errors() const { return filter(Severity::error); }
  std::vector<Finding> warnings() const { return filter(Severity::warning); }

 private:
  std::vector<Finding> filter(Severity s) const {
    std::vector<Finding> out;
    std::copy_if(findings.begin(), findings.end(), std::back_inserter(out),
                 [s](const Finding& f) { return f.severity == s; });
    return out;
  }
};

namespace detail {

inline bool is_blank(std::string_view text) {
  return text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

}  // namespace detail

/// Checks every structural rule. Findings are data; this never throws.
inline ValidationReport validate_instrument(const Instrument& inst) {
  ValidationReport report;
  auto error = [&](std::string loc, std::string msg) {
    report.findings.push_back({Severity::error, std::move(loc), std::move(msg)});
  };
  auto warning = [&](std::string loc, std::string msg) {
    report.findings.push_back({Severity::warning, std::move(loc), std::move(msg)});
  };

  if (detail::is_blank(inst.id)) error("instrument", "empty instrument id");
  if (inst.categories.empty()) error("instrument", "instrument has no categories");

  std::set<BehaviorId> seen;
  for (std::size_t pos = 0; pos < inst.categories.size(); ++pos) {
    const Category& c = inst.categories[pos];
    const std::string loc = c.label();
    if (c.index != static_cast<int>(pos) + 1) {
      error(loc, "non-contiguous category indices: expected " + std::to_string(pos + 1) +
                     ", found " + std::to_string(c.index));
    }
    if (detail::is_blank(c.name)) error(loc, "empty category name");

    if (c.placeholder) {
      warning(loc, "placeholder category");
      if (!c.behaviors.empty()) warning(loc, "placeholder category lists behaviors; they are not scored");
    } else if (c.behaviors.empty()) {
      error(loc, "category has no behaviors");
    }

    bool contiguous = true;
    for (std::size_t k = 0; k < c.behaviors.size(); ++k) {
      const Behavior& b = c.behaviors[k];
      const std::string bloc = b.id.str();
      if (b.id.category != c.index) {
        error(bloc, "behavior filed under category " + loc);
      }
      if (!seen.insert(b.id).second) error(bloc, "duplicate behavior id " + bloc);
      if (contiguous && b.id.behavior != static_cast<int>(k) + 1) {
        contiguous = false;
        error(loc, "non-contiguous behavior indices: expected " + std::to_string(k + 1) +
                       ", found " + std::to_string(b.id.behavior));
      }
      if (detail::is_blank(b.prompt)) error(bloc, "empty prompt");
    }
  }

  if (inst.expected_total_behaviors) {
    const auto actual = inst.behavior_count();
    if (static_cast<int>(actual) != *inst.expected_total_behaviors) {
      warning("instrument", "behavior count " + std::to_string(actual) + " ≠ expected " +
                                std::to_string(*inst.expected_total_behaviors));
    }
  }
  return report;
}

// --- JSON ---------------------------------------------------------------

inline nlohmann::json to_json(const Instrument& inst) {
  nlohmann::json categories = nlohmann::json::array();
  for (const auto& c : inst.categories) {
    nlohmann::json behaviors = nlohmann::json::array();
    for (const auto& b : c.behaviors) {
      behaviors.push_back({{"index", b.id.behavior}, {"prompt", b.prompt}});
    }
    categories.push_back({{"index", c.index},
                          {"name", c.name},
                          {"description", c.description},
                          {"placeholder", c.placeholder},
                          {"behaviors", std::move(behaviors)}});
  }
  nlohmann::json doc = {{"schema_version", kSchemaVersion},
                        {"id", inst.id},
                        {"title", inst.title},
                        {"categories", std::move(categories)}};
  doc["expected_total_behaviors"] = inst.expected_total_behaviors
                                        ? nlohmann::json(*inst.expected_total_behaviors)
                                        : nlohmann::json(nullptr);
  return doc;
}

inline void check_schema_version(const nlohmann::json& doc, std::string_view what) {
  if (!doc.contains("schema_version")) return;
  const auto& v = doc.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    throw Error(ErrorKind::version,
                "unsupported " + std::string(what) + " schema version " + v.dump());
  }
}

/// Builds an Instrument from JSON without validating domain rules.
inline Instrument instrument_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw Error(ErrorKind::parse, "instrument document must be an object");
    check_schema_version(doc, "instrument");
    Instrument inst;
    inst.id = doc.at("id").get<std::string>();
    inst.title = doc.value("title", std::string{});
    if (doc.contains("expected_total_behaviors") && !doc.at("expected_total_behaviors").is_null()) {
      inst.expected_total_behaviors = doc.at("expected_total_behaviors").get<int>();
    }
    for (const auto& cj : doc.at("categories")) {
      Category c;
      c.index = cj.at("index").get<int>();
      c.name = cj.at("name").get<std::string>();
      c.description = cj.value("description", std::string{});
      c.placeholder = cj.value("placeholder", false);
      if (cj.contains("behaviors")) {
        for (const auto& bj : cj.at("behaviors")) {
          c.behaviors.push_back({BehaviorId{c.index, bj.at("index").get<int>()},
                                 bj.at("prompt").get<std::string>()});
        }
      }
      inst.categories.push_back(std::move(c));
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed instrument document: ") + e.what());
  }
}

/// Canonical text form: sorted keys, two-space indent, trailing newline.
inline std::string serialize_instrument(const Instrument& inst) {
  return to_json(inst).dump(2) + "\n";
}

/// Parses and validates. Validation errors are raised with every error
/// finding in the details; warnings are available from validate_instrument.
inline Instrument load_instrument(std::string_view source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("malformed instrument document: ") + e.what());
  }
  Instrument inst = instrument_from_json(doc);
  const ValidationReport report = validate_instrument(inst);
  if (report.has_errors()) {
    std::vector<std::string> details;
    for (const auto& f : report.errors()) details.push_back(f.str());
    throw Error(ErrorKind::validation, "invalid instrument: " + report.errors().front().message,
                std::move(details));
  }
  return inst;
}

// --- Bundled instrument -------------------------------------------------

inline constexpr std::string_view kBundledInstrumentId = "bcm-v1";

/// The nine category shells with their published definitions. Only the
/// "Taking responsibility" category ships with its behaviors; the others
/// are placeholders until a full inventory is installed.
inline Instrument bundled_instrument() {
  Instrument inst;
  inst.id = std::string(kBundledInstrumentId);
  inst.title = "Behavior-based Commitment Questionnaire";
  inst.expected_total_behaviors = 72;

  struct Shell {
    const char* name;
    const char* description;
  };
  static constexpr Shell shells[] = {
      {"Communicating openly",
       "Behaviors promoting or reflecting the direct giving and receiving of information relevant to "
       "getting the process improvement initiative done"},
      {"Collaborating",
       "Behaviors promoting or reflecting the involvement of relevant persons in the processes of "
       "identifying and solving problems."},
      {"Taking responsibility",
       "Behaviors reflecting acceptance of responsibility and taking initiative in carrying out "
       "process improvement related tasks."},
      {"Maintaining a shared vision",
       "Behaviors reflecting a clear formulation, understanding, and commitment to organizational "
       "philosophy, values, and purposes and a commitment to high standards."},
      {"Solving problems effectively",
       "Behaviors reflecting a problem-solving orientation to difficult process improvement related "
       "issues."},
      {"Respecting/supporting",
       "Behaviors reflecting demonstration of respect and support for others as worthwhile "
       "individuals."},
      {"Facilitating interactions",
       "Behaviors reflecting attention to and use of human process issues in one-on-one, group, and "
       "intergroup situations."},
      {"Inquiring",
       "Behaviors reflecting a probing, inquiring, diagnostic orientation to the organization and its "
       "environment."},
      {"Experimenting", "Behaviors promoting or reflecting an openness to trying new things."},
  };
  static constexpr const char* responsibility[] = {
      "Figuring out for oneself what is necessary to be effective in one's job and taking initiative "
      "for getting whatever information, cooperation, services, or materials are needed from relevant "
      "parties inside or outside of the organization.",
      "Asking for and taking responsibility and authority.",
      "Persisting in the struggle to make needed changes, especially in the face of frustration and "
      "ambiguity.",
      "Forming and offering more suggestions.",
      "Stating one's own contribution to a problematic situation rather than blaming others.",
      "Exhibiting behaviors that demonstrate movement along a continuum from monitoring one's own work "
      "to managing and prioritizing it to affecting the design of it to affecting its organizational "
      "context (e.g., policies and procedures) to affecting the goals and directions of the "
      "organization itself.",
      "Reflecting the responsibility in expressions of interest and excitement in the work.",
      "Reflecting the responsibility in decreased approval seeking, face saving, indifference, "
      "burnout, or \"coasting\".",
  };

  int index = 1;
  for (const auto& shell : shells) {
    Category c{index, shell.name, shell.description, true, {}};
    if (index == 3) {
      c.placeholder = false;
      int b = 1;
      for (const char* prompt : responsibility) c.behaviors.push_back({BehaviorId{3, b++}, prompt});
    }
    inst.categories.push_back(std::move(c));
    ++index;
  }
  return inst;
}

}  // namespace commitgauge
