#pragma once

#include "commitgauge/error.hpp"
#include "commitgauge/instrument.hpp"
#include "commitgauge/session.hpp"

#include <nlohmann/json.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace commitgauge {

struct Project {
  std::string project_id;
  std::string name;
  std::string instrument_id;
  Timestamp created{};
  std::vector<std::string> session_ids;  // creation order

  bool operator==(const Project&) const = default;
};

inline nlohmann::json to_json(const Project& p) {
  return {{"schema_version", kSchemaVersion}, {"project_id", p.project_id},
          {"name", p.name},                   {"instrument_id", p.instrument_id},
          {"created", format_timestamp(p.created)}, {"session_ids", p.session_ids}};
}

inline Project project_from_json(const nlohmann::json& j) {
  try {
    check_schema_version(j, "project");
    Project p;
    p.project_id = j.at("project_id").get<std::string>();
    p.name = j.value("name", std::string{});
    p.instrument_id = j.at("instrument_id").get<std::string>();
    p.created = parse_timestamp(j.at("created").get<std::string>());
    p.session_ids = j.value("session_ids", std::vector<std::string>{});
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed project document: ") + e.what());
  }
}

/// Canonical serialization shared by every stored file: sorted keys,
/// two-space indent, trailing newline.
inline std::string canonical(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Ids become file names, so they are restricted to [A-Za-z0-9._-] and
/// may not start with a dot.
inline void check_entity_id(const std::string& id, std::string_view what) {
  const bool ok = !id.empty() && id.size() <= 128 && id.front() != '.' &&
                  std::all_of(id.begin(), id.end(), [](unsigned char c) {
                    return std::isalnum(c) || c == '.' || c == '_' || c == '-';
                  });
  if (!ok) throw Error(ErrorKind::validation, "invalid " + std::string(what) + " id '" + id + "'");
}

struct SessionFilter {
  std::optional<Phase> phase;
  std::optional<Role> role;
  std::optional<Aspect> aspect;
  std::optional<bool> sealed;

  bool matches(const Session& s) const {
    if (phase && s.phase != *phase) return false;
    if (role && s.role != *role) return false;
    if (aspect && !s.has(*aspect)) return false;
    if (sealed && s.sealed != *sealed) return false;
    return true;
  }
};

/// Exclusive advisory lock on <root>/.lock, held for the object's lifetime.
class StoreLock {
 public:
  explicit StoreLock(const std::filesystem::path& file) {
    fd_ = ::open(file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorKind::io, "cannot open lock file " + file.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error(ErrorKind::io, "cannot lock " + file.string());
    }
  }
  ~StoreLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

/// Directory of canonical JSON files:
///   <root>/store.json, instruments/<id>.json, projects/<id>.json, sessions/<id>.json
/// Writers serialize on the lock file; files are replaced atomically so
/// readers never see partial writes.
class Store {
 public:
  static constexpr std::string_view kFormat = "commitgauge-store";
  static constexpr std::string_view kArchiveFormat = "commitgauge-archive";

  /// Opens the store at `root`, creating an empty one if absent.
  explicit Store(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    for (const char* sub : {"instruments", "projects", "sessions"}) {
      std::filesystem::create_directories(root_ / sub, ec);
      if (ec) throw Error(ErrorKind::io, "cannot create store at " + root_.string() + ": " + ec.message());
    }
    const auto index = root_ / "store.json";
    if (std::filesystem::exists(index)) {
      const auto doc = read_json(index);
      if (doc.value("format", std::string{}) != kFormat) {
        throw Error(ErrorKind::parse, "not a store index: " + index.string());
      }
      check_schema_version(doc, "store");
      if (!doc.contains("schema_version")) throw Error(ErrorKind::version, "store index lacks schema_version");
    } else {
      StoreLock lock(lock_path());
      if (!std::filesystem::exists(index)) write_index();
    }
  }

  const std::filesystem::path& root() const { return root_; }

  // --- instruments ---

  /// Installs or replaces an instrument after validating it.
  void save_instrument(const Instrument& inst) {
    check_entity_id(inst.id, "instrument");
    const auto report = validate_instrument(inst);
    if (report.has_errors()) {
      std::vector<std::string> details;
      for (const auto& f : report.errors()) details.push_back(f.str());
      throw Error(ErrorKind::validation, "invalid instrument: " + report.errors().front().message,
                  std::move(details));
    }
    StoreLock lock(lock_path());
    write_file(entity_path("instruments", inst.id), serialize_instrument(inst));
    write_index();
  }

  Instrument load_instrument(const std::string& id) const {
    check_entity_id(id, "instrument");
    return instrument_from_json(read_entity("instruments", id, "instrument"));
  }

  bool has_instrument(const std::string& id) const {
    return valid_id(id) && std::filesystem::exists(entity_path("instruments", id));
  }

  std::vector<std::string> list_instruments() const { return list_ids("instruments"); }

  // --- projects ---

  void create_project(const Project& p) {
    check_entity_id(p.project_id, "project");
    StoreLock lock(lock_path());
    if (std::filesystem::exists(entity_path("projects", p.project_id))) {
      throw Error(ErrorKind::conflict, "project " + p.project_id + " already exists");
    }
    if (!has_instrument(p.instrument_id)) {
      throw Error(ErrorKind::validation, "unknown instrument '" + p.instrument_id + "'");
    }
    write_file(entity_path("projects", p.project_id), canonical(to_json(p)));
    write_index();
  }

  /// Replaces an existing project record.
  void save_project(const Project& p) {
    check_entity_id(p.project_id, "project");
    StoreLock lock(lock_path());
    if (!std::filesystem::exists(entity_path("projects", p.project_id))) {
      throw Error(ErrorKind::not_found, "unknown project '" + p.project_id + "'");
    }
    write_file(entity_path("projects", p.project_id), canonical(to_json(p)));
  }

  Project load_project(const std::string& id) const {
    if (!valid_id(id)) throw Error(ErrorKind::not_found, "unknown project '" + id + "'");
    return project_from_json(read_entity("projects", id, "project"));
  }

  bool has_project(const std::string& id) const {
    return valid_id(id) && std::filesystem::exists(entity_path("projects", id));
  }

  std::vector<std::string> list_projects() const { return list_ids("projects"); }

  // --- sessions ---

  /// Next free id of the form <project>-S<n>.
  std::string next_session_id(const std::string& project_id) const {
    const Project p = load_project(project_id);
    for (std::size_t n = p.session_ids.size() + 1;; ++n) {
      std::string id = project_id + "-S" + std::to_string(n);
      if (!std::filesystem::exists(entity_path("sessions", id))) return id;
    }
  }

  /// Writes a session. A new session is appended to its project; an
  /// existing sealed session can only be rewritten with identical content.
  void save_session(const Session& s) {
    check_entity_id(s.session_id, "session");
    StoreLock lock(lock_path());
    const auto ppath = entity_path("projects", s.project_id);
    if (!valid_id(s.project_id) || !std::filesystem::exists(ppath)) {
      throw Error(ErrorKind::not_found, "unknown project '" + s.project_id + "'");
    }
    const auto spath = entity_path("sessions", s.session_id);
    if (std::filesystem::exists(spath)) {
      const Session existing = session_from_json(read_json(spath));
      if (existing.project_id != s.project_id) {
        throw Error(ErrorKind::conflict, "session " + s.session_id + " belongs to another project");
      }
      if (existing.sealed && existing != s) {
        throw Error(ErrorKind::sealed, "session " + s.session_id + " is sealed");
      }
    }
    write_file(spath, canonical(to_json(s)));
    Project p = project_from_json(read_json(ppath));
    if (std::find(p.session_ids.begin(), p.session_ids.end(), s.session_id) == p.session_ids.end()) {
      p.session_ids.push_back(s.session_id);
      write_file(ppath, canonical(to_json(p)));
    }
  }

  Session load_session(const std::string& id) const {
    if (!valid_id(id)) throw Error(ErrorKind::not_found, "unknown session '" + id + "'");
    return session_from_json(read_entity("sessions", id, "session"));
  }

  bool has_session(const std::string& id) const {
    return valid_id(id) && std::filesystem::exists(entity_path("sessions", id));
  }

  /// Sessions of one project matching every set filter field, ordered by
  /// timestamp then session id.
  std::vector<Session> list_sessions(const std::string& project_id, const SessionFilter& filter = {}) const {
    const Project p = load_project(project_id);
    std::vector<Session> out;
    for (const auto& id : p.session_ids) {
      Session s = load_session(id);
      if (filter.matches(s)) out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const Session& a, const Session& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.session_id < b.session_id;
    });
    return out;
  }

  // --- archive ---

  /// Whole store as one canonical JSON bundle.
  std::string export_archive() const {
    nlohmann::json instruments = nlohmann::json::array();
    for (const auto& id : list_instruments()) instruments.push_back(to_json(load_instrument(id)));
    nlohmann::json projects = nlohmann::json::array();
    nlohmann::json sessions = nlohmann::json::array();
    for (const auto& id : list_projects()) {
      const Project p = load_project(id);
      projects.push_back(to_json(p));
      for (const auto& sid : p.session_ids) sessions.push_back(to_json(load_session(sid)));
    }
    return canonical({{"format", kArchiveFormat},
                      {"schema_version", kSchemaVersion},
                      {"instruments", std::move(instruments)},
                      {"projects", std::move(projects)},
                      {"sessions", std::move(sessions)}});
  }

  void export_store(const std::filesystem::path& path) const { write_file(path, export_archive()); }

  /// Loads every entity of an archive. The whole archive is decoded and
  /// checked before anything is written; ids already present are conflicts.
  void import_archive(std::string_view text) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::parse, std::string("malformed archive: ") + e.what());
    }
    std::vector<Instrument> instruments;
    std::vector<Project> projects;
    std::vector<Session> sessions;
    try {
      if (!doc.is_object() || doc.value("format", std::string{}) != kArchiveFormat) {
        throw Error(ErrorKind::parse, "malformed archive: not a commitgauge archive");
      }
      if (!doc.contains("schema_version")) throw Error(ErrorKind::version, "archive lacks schema_version");
      check_schema_version(doc, "archive");
      for (const auto& j : doc.at("instruments")) instruments.push_back(instrument_from_json(j));
      for (const auto& j : doc.at("projects")) projects.push_back(project_from_json(j));
      for (const auto& j : doc.at("sessions")) sessions.push_back(session_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::parse, std::string("malformed archive: ") + e.what());
    }

    std::set<std::string> known_instruments;
    for (const auto& i : instruments) {
      check_entity_id(i.id, "instrument");
      if (validate_instrument(i).has_errors()) throw Error(ErrorKind::validation, "archive instrument " + i.id + " is invalid");
      known_instruments.insert(i.id);
    }
    std::set<std::string> session_owner;
    for (const auto& p : projects) {
      check_entity_id(p.project_id, "project");
      if (!known_instruments.contains(p.instrument_id) && !has_instrument(p.instrument_id)) {
        throw Error(ErrorKind::validation, "archive project " + p.project_id + " references unknown instrument");
      }
      if (has_project(p.project_id)) throw Error(ErrorKind::conflict, "project " + p.project_id + " already exists");
    }
    for (const auto& s : sessions) {
      check_entity_id(s.session_id, "session");
      if (has_session(s.session_id)) throw Error(ErrorKind::conflict, "session " + s.session_id + " already exists");
      const bool owned = std::any_of(projects.begin(), projects.end(), [&](const Project& p) {
        return p.project_id == s.project_id &&
               std::find(p.session_ids.begin(), p.session_ids.end(), s.session_id) != p.session_ids.end();
      });
      if (!owned) throw Error(ErrorKind::validation, "archive session " + s.session_id + " has no owning project");
    }

    StoreLock lock(lock_path());
    for (const auto& i : instruments) write_file(entity_path("instruments", i.id), serialize_instrument(i));
    for (const auto& s : sessions) write_file(entity_path("sessions", s.session_id), canonical(to_json(s)));
    for (const auto& p : projects) write_file(entity_path("projects", p.project_id), canonical(to_json(p)));
    write_index();
  }

  void import_store(const std::filesystem::path& path) { import_archive(read_text(path)); }

  // --- file helpers ---

  static std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  static void write_file(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
      out << content;
      if (!out.flush()) throw Error(ErrorKind::io, "cannot write " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::io, "cannot replace " + path.string() + ": " + ec.message());
  }

 private:
  static bool valid_id(const std::string& id) {
    try {
      check_entity_id(id, "entity");
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  std::filesystem::path lock_path() const { return root_ / ".lock"; }

  std::filesystem::path entity_path(const char* kind, const std::string& id) const {
    return root_ / kind / (id + ".json");
  }

  static nlohmann::json read_json(const std::filesystem::path& path) {
    try {
      return nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::parse, "malformed " + path.string() + ": " + e.what());
    }
  }

  nlohmann::json read_entity(const char* kind, const std::string& id, const char* what) const {
    const auto path = entity_path(kind, id);
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorKind::not_found, std::string("unknown ") + what + " '" + id + "'");
    }
    return read_json(path);
  }

  std::vector<std::string> list_ids(const char* kind) const {
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(root_ / kind)) {
      const auto& p = entry.path();
      if (entry.is_regular_file() && p.extension() == ".json") ids.push_back(p.stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  void write_index() const {
    write_file(root_ / "store.json", canonical({{"format", kFormat},
                                                {"schema_version", kSchemaVersion},
                                                {"instruments", list_ids("instruments")},
                                                {"projects", list_ids("projects")}}));
  }

  std::filesystem::path root_;
};

}  // namespace commitgauge
