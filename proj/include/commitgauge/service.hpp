#pragma once

// HTTP/JSON front end over the store and workflow layer. Handlers only
// translate between HTTP and the library; all numbers come from the
// reporting module.

#include "commitgauge/error.hpp"
#include "commitgauge/report.hpp"
#include "commitgauge/store.hpp"
#include "commitgauge/workflow.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <mutex>
#include <optional>
#include <set>
#include <string>

namespace commitgauge {

struct ApiError {
  int status = 500;
  std::string code;  // validation_error | not_found | sealed | conflict | io_error
  std::string message;
  std::vector<std::string> details;

  nlohmann::json body() const {
    nlohmann::json j = {{"code", code}, {"message", message}};
    if (!details.empty()) j["details"] = details;
    return j;
  }
};

inline ApiError to_api_error(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::parse:
    case ErrorKind::validation: return {422, "validation_error", e.what(), e.details()};
    case ErrorKind::not_found: return {404, "not_found", e.what(), e.details()};
    case ErrorKind::conflict: return {409, "conflict", e.what(), e.details()};
    case ErrorKind::sealed: return {409, "sealed", e.what(), e.details()};
    case ErrorKind::io:
    case ErrorKind::version: return {500, "io_error", e.what(), e.details()};
  }
  return {500, "io_error", e.what(), e.details()};
}

class Service {
 public:
  explicit Service(Store& store) : store_(store) {}

  /// Registers every /api/v1 route, plus static hosting of `www_dir` at "/".
  void mount(httplib::Server& server, const std::optional<std::string>& www_dir = std::nullopt) {
    server.Get("/api/v1/instruments", wrap([this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& id : store_.list_instruments()) list.push_back(to_json(store_.load_instrument(id)));
      send_json(res, 200, list);
    }));
    server.Get("/api/v1/instruments/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto& id = req.path_params.at("id");
      if (!store_.has_instrument(id)) throw Error(ErrorKind::not_found, "unknown instrument '" + id + "'");
      res.status = 200;
      res.set_content(serialize_instrument(store_.load_instrument(id)), "application/json");
    }));

    server.Get("/api/v1/projects", wrap([this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& id : store_.list_projects()) list.push_back(project_body(store_.load_project(id)));
      send_json(res, 200, list);
    }));
    server.Post("/api/v1/projects", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      Project p;
      p.project_id = required_string(body, "project_id");
      p.name = body.value("name", p.project_id);
      p.instrument_id = body.value("instrument_id", std::string(kBundledInstrumentId));
      p.created = body.contains("created") ? parse_timestamp(required_string(body, "created")) : now_utc();
      {
        std::lock_guard lock(write_mutex_);
        store_.create_project(p);
      }
      res.set_header("Location", "/api/v1/projects/" + p.project_id);
      send_json(res, 201, project_body(p));
    }));
    server.Get("/api/v1/projects/:id", wrap([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, project_body(store_.load_project(req.path_params.at("id"))));
    }));
    server.Get("/api/v1/projects/:id/sessions", wrap([this](const httplib::Request& req, httplib::Response& res) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& s : store_.list_sessions(req.path_params.at("id"), filter_from(req))) list.push_back(to_json(s));
      send_json(res, 200, list);
    }));

    server.Post("/api/v1/projects/:id/sessions", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      NewSession ns;
      ns.project_id = req.path_params.at("id");
      ns.role = parse_role(body.value("role", std::string("change_agent")));
      ns.phase = body.contains("phase") ? phase_from_json(body.at("phase")) : Phase::plan();
      if (!body.contains("aspects") || !body.at("aspects").is_array()) {
        throw Error(ErrorKind::validation, "aspects must be an array");
      }
      for (const auto& a : body.at("aspects")) ns.aspects.insert(parse_aspect(a.get<std::string>()));
      ns.label = body.value("label", std::string{});
      if (body.contains("session_id")) ns.session_id = required_string(body, "session_id");
      if (body.contains("timestamp")) ns.timestamp = parse_timestamp(required_string(body, "timestamp"));
      Session s;
      {
        std::lock_guard lock(write_mutex_);
        s = create_session(store_, ns);
      }
      res.set_header("Location", "/api/v1/sessions/" + s.session_id);
      auto out = to_json(s);
      out["warnings"] = pairing_warnings(s);
      send_json(res, 201, out);
    }));
    server.Get("/api/v1/sessions/:sid", wrap([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, to_json(store_.load_session(req.path_params.at("sid"))));
    }));
    server.Patch("/api/v1/sessions/:sid/ratings", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto& sid = req.path_params.at("sid");
      const auto body = parse_body(req);
      if (!body.is_object()) throw Error(ErrorKind::validation, "body must be an object");
      std::lock_guard lock(write_mutex_);
      const Session current = store_.load_session(sid);

      // Either {"C3B1":"3",...} with ?aspect=, or {"aspect":..,"ratings":{..}}.
      const nlohmann::json* map = &body;
      std::optional<Aspect> aspect;
      if (body.contains("ratings") && body.at("ratings").is_object()) {
        map = &body.at("ratings");
        if (body.contains("aspect")) aspect = parse_aspect(required_string(body, "aspect"));
      }
      if (req.has_param("aspect")) aspect = parse_aspect(req.get_param_value("aspect"));
      if (!aspect) {
        if (current.sheets.size() != 1) throw Error(ErrorKind::validation, "aspect is required for multi-aspect sessions");
        aspect = current.sheets.begin()->first;
      }
      std::vector<std::pair<BehaviorId, Rating>> ratings;
      for (const auto& [key, value] : map->items()) {
        const auto id = BehaviorId::try_parse(key);
        if (!id) throw Error(ErrorKind::validation, "unknown behavior " + key);
        ratings.emplace_back(*id, rating_from_json(value));
      }
      send_json(res, 200, to_json(apply_ratings(store_, sid, *aspect, ratings)));
    }));
    server.Post("/api/v1/sessions/:sid/seal", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto& sid = req.path_params.at("sid");
      if (req.has_param("dry_run") && req.get_param_value("dry_run") != "0") {
        const Session s = store_.load_session(sid);
        const auto missing = missing_entries(s, project_instrument(store_, s.project_id));
        send_json(res, 200, {{"complete", missing.empty()}, {"missing", missing}, {"sealed", s.sealed}});
        return;
      }
      std::lock_guard lock(write_mutex_);
      send_json(res, 200, to_json(seal_session(store_, sid)));
    }));

    server.Get("/api/v1/projects/:id/report", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto& pid = req.path_params.at("id");
      if (!store_.has_project(pid)) throw Error(ErrorKind::not_found, "unknown project '" + pid + "'");
      const std::string kind = req.has_param("kind") ? req.get_param_value("kind") : "profile";
      Selection sel;
      sel.filter = filter_from(req);
      sel.filter.aspect.reset();
      if (req.has_param("session")) sel.session_id = req.get_param_value("session");
      const Aspect aspect = req.has_param("aspect") ? parse_aspect(req.get_param_value("aspect")) : Aspect::intent;

      ReportResult result;
      if (kind == "profile") {
        result = profile_report(store_, pid, aspect, sel, Format::json);
      } else if (kind == "gap") {
        result = gap_report(store_, pid, sel, Format::json);
      } else if (kind == "top") {
        result = top_report(store_, pid, parse_k(req), sel, Format::json);
      } else if (kind == "trend") {
        result = trend_report(store_, pid, aspect, sel, Format::json);
      } else {
        throw Error(ErrorKind::validation, "unknown report kind '" + kind + "'");
      }
      send_report(res, result);
    }));
    server.Get("/api/v1/benchmark", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const Aspect aspect = req.has_param("aspect") ? parse_aspect(req.get_param_value("aspect")) : Aspect::intent;
      send_report(res, benchmark_report(store_, aspect, Format::json));
    }));

    if (www_dir) server.set_mount_point("/", *www_dir);
  }

 private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static Handler wrap(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
      try {
        inner(req, res);
      } catch (const Error& e) {
        const ApiError api = to_api_error(e);
        send_json(res, api.status, api.body());
      } catch (const std::exception& e) {
        send_json(res, 500, ApiError{500, "io_error", e.what(), {}}.body());
      }
    };
  }

  static void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
  }

  static void send_report(httplib::Response& res, const ReportResult& result) {
    res.status = 200;
    for (const auto& w : result.warnings) res.set_header("Warning", "199 commitgauge \"" + w + "\"");
    res.set_content(result.document, "application/json");
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::validation, std::string("malformed JSON body: ") + e.what());
    }
  }

  static std::string required_string(const nlohmann::json& body, const char* key) {
    if (!body.is_object() || !body.contains(key) || !body.at(key).is_string()) {
      throw Error(ErrorKind::validation, std::string("field '") + key + "' must be a string");
    }
    return body.at(key).get<std::string>();
  }

  static int parse_k(const httplib::Request& req) {
    if (!req.has_param("k")) return 10;
    const auto text = req.get_param_value("k");
    int k = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
    if (ec != std::errc{} || ptr != text.data() + text.size() || k < 1) {
      throw Error(ErrorKind::validation, "k must be a positive integer");
    }
    return k;
  }

  static SessionFilter filter_from(const httplib::Request& req) {
    SessionFilter f;
    if (req.has_param("phase")) f.phase = Phase::parse(req.get_param_value("phase"));
    if (req.has_param("role")) f.role = parse_role(req.get_param_value("role"));
    if (req.has_param("aspect")) f.aspect = parse_aspect(req.get_param_value("aspect"));
    return f;
  }

  static nlohmann::json project_body(const Project& p) {
    auto j = to_json(p);
    j.erase("schema_version");
    return j;
  }

  Store& store_;
  std::mutex write_mutex_;
};

}  // namespace commitgauge
