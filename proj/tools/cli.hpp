#pragma once

#include "commitgauge/commitgauge.hpp"
#include "commitgauge/service.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace commitgauge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitIo = 2;

inline int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::not_found:
    case ErrorKind::io: return kExitIo;
    default: return kExitDomain;
  }
}

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Completed-sheet file: JSON object {"C3B1":"3",...} or CSV
/// "behavior_id,rating" with an optional header row.
inline std::vector<std::pair<BehaviorId, Rating>> read_sheet_file(const std::string& text) {
  std::vector<std::pair<BehaviorId, Rating>> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::parse, std::string("malformed sheet: ") + e.what());
    }
    for (const auto& [key, value] : doc.items()) out.emplace_back(BehaviorId::parse(key), rating_from_json(value));
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::parse, "line " + std::to_string(lineno) + ": expected behavior_id,rating");
    }
    const std::string key = trim(line.substr(0, comma));
    const std::string value = trim(line.substr(comma + 1));
    if (lineno == 1 && key == "behavior_id") continue;
    const auto id = BehaviorId::try_parse(key);
    if (!id) throw Error(ErrorKind::validation, "line " + std::to_string(lineno) + ": unknown behavior " + key);
    const auto rating = Rating::try_parse(value);
    if (!rating) throw Error(ErrorKind::validation, "line " + std::to_string(lineno) + ": rating out of range: '" + value + "'");
    out.emplace_back(*id, *rating);
  }
  return out;
}

inline std::set<Aspect> parse_aspects(const std::string& csv) {
  std::set<Aspect> out;
  std::istringstream parts(csv);
  std::string part;
  while (std::getline(parts, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.insert(parse_aspect(part));
  }
  return out;
}

inline Aspect pick_aspect(const Session& s, const std::string& aspect, const std::string& part) {
  if (!aspect.empty()) return parse_aspect(aspect);
  if (part == "A") return Aspect::effect;
  if (part == "B") return Aspect::intent;
  if (!part.empty()) throw Error(ErrorKind::validation, "--part must be A or B");
  if (s.sheets.size() == 1) return s.sheets.begin()->first;
  throw Error(ErrorKind::validation, "session has several aspects; pass --aspect or --part");
}

/// Walks the questionnaire one category at a time, saving after each
/// category. Invalid answers re-prompt.
inline int fill_interactive(Store& store, const std::string& sid, Aspect aspect, Streams io) {
  Session s = store.load_session(sid);
  const Instrument inst = project_instrument(store, s.project_id);
  if (s.sealed) throw Error(ErrorKind::sealed, "session " + sid + " is sealed");
  if (!s.has(aspect)) throw Error(ErrorKind::validation, std::string("session has no ") + to_string(aspect) + " sheet");

  const ScaleWording& w = wording(aspect);
  std::vector<const Category*> parts;
  for (const auto& c : inst.categories)
    if (!c.placeholder) parts.push_back(&c);

  io.out << w.stem << "\n";
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Category& c = *parts[p];
    io.out << "\nPart " << p + 1 << "/" << parts.size() << ": " << c.label() << " " << c.name << "\n"
           << c.description << "\n"
           << "  0  = " << w.labels[0] << "\n  1  = " << w.labels[1] << "\n  2  = " << w.labels[2]
           << "\n  3  = " << w.labels[3] << "\n  na = " << w.labels[4] << "\n";
    std::vector<std::pair<BehaviorId, Rating>> answers;
    for (const auto& b : c.behaviors) {
      io.out << b.id.str() << " " << b.prompt << "\n> " << std::flush;
      for (;;) {
        std::string token;
        if (!(io.in >> token)) {
          if (!answers.empty()) apply_ratings(store, sid, aspect, answers);
          io.err << "input ended before " << b.id.str() << "; progress saved\n";
          return kExitDomain;
        }
        if (auto r = Rating::try_parse(token)) {
          answers.emplace_back(b.id, *r);
          break;
        }
        io.out << "invalid answer '" << token << "'; enter 0, 1, 2, 3 or na\n> " << std::flush;
      }
    }
    apply_ratings(store, sid, aspect, answers);
  }
  io.out << "\nall behaviors rated; run 'session seal " << sid << "' to finalize\n";
  return kExitOk;
}

inline void print_report(const ReportResult& r, Streams io) {
  for (const auto& w : r.warnings) io.err << "warning: " << w << "\n";
  io.out << r.document;
}

}  // namespace detail

/// Runs one command line. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, Streams io) {
  CLI::App app{"Behavior-based commitment assessment tool", "commitgauge"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string store_root;
  std::string format_name = "text";
  app.add_option("--store", store_root, "Store directory (default $COMMITGAUGE_STORE or ./commitgauge-store)");
  app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));

  auto open_store = [&]() {
    std::string root = store_root;
    if (root.empty()) {
      const char* env = std::getenv("COMMITGAUGE_STORE");
      root = (env && *env) ? env : "commitgauge-store";
    }
    return Store(root);
  };

  std::function<int()> action;

  // instrument ------------------------------------------------------------
  auto* instrument = app.add_subcommand("instrument", "Validate, show, and install instruments");
  instrument->require_subcommand(1);
  std::string inst_file;
  std::string inst_id;
  bool bundled = false;

  auto* validate = instrument->add_subcommand("validate", "Validate an instrument file");
  validate->add_option("file", inst_file)->required();
  validate->callback([&] {
    action = [&] {
      const std::string text = Store::read_text(inst_file);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("malformed instrument document: ") + e.what());
      }
      const auto report = validate_instrument(instrument_from_json(doc));
      for (const auto& f : report.findings) io.out << f.str() << "\n";
      io.out << (report.has_errors() ? "invalid" : "valid") << " (" << report.errors().size() << " errors, "
             << report.warnings().size() << " warnings)\n";
      return report.has_errors() ? kExitDomain : kExitOk;
    };
  });

  auto* show = instrument->add_subcommand("show", "Print an instrument (file, stored id, or the bundled one)");
  show->add_option("file", inst_file);
  show->add_option("--id", inst_id);
  show->callback([&] {
    action = [&] {
      Instrument inst;
      if (!inst_file.empty()) {
        inst = load_instrument(Store::read_text(inst_file));
      } else if (!inst_id.empty()) {
        inst = open_store().load_instrument(inst_id);
      } else {
        inst = bundled_instrument();
      }
      if (format_name == "json") {
        io.out << serialize_instrument(inst);
        return kExitOk;
      }
      io.out << inst.id << ": " << inst.title << "\n";
      for (const auto& c : inst.categories) {
        io.out << c.label() << " " << c.name << (c.placeholder ? " (placeholder)" : "") << " - " << c.description << "\n";
        for (const auto& b : c.behaviors) io.out << "  " << b.id.str() << " " << b.prompt << "\n";
      }
      return kExitOk;
    };
  });

  auto* install = instrument->add_subcommand("install", "Install an instrument file into the store");
  install->add_option("file", inst_file);
  install->add_flag("--bundled", bundled, "Install the bundled instrument");
  install->callback([&] {
    action = [&] {
      if (inst_file.empty() == !bundled) throw Error(ErrorKind::validation, "give either a file or --bundled");
      const Instrument inst = bundled ? bundled_instrument() : load_instrument(Store::read_text(inst_file));
      for (const auto& w : validate_instrument(inst).warnings()) io.err << w.str() << "\n";
      open_store().save_instrument(inst);
      io.out << "installed " << inst.id << "\n";
      return kExitOk;
    };
  });

  auto* list_inst = instrument->add_subcommand("list", "List installed instruments");
  list_inst->callback([&] {
    action = [&] {
      for (const auto& id : open_store().list_instruments()) io.out << id << "\n";
      return kExitOk;
    };
  });

  // project ---------------------------------------------------------------
  auto* project = app.add_subcommand("project", "Create and inspect projects");
  project->require_subcommand(1);
  std::string project_id;
  std::string project_name;
  std::string project_instrument_id = std::string(kBundledInstrumentId);
  std::string created;

  auto* project_new = project->add_subcommand("new", "Create a project");
  project_new->add_option("id", project_id)->required();
  project_new->add_option("--name", project_name);
  project_new->add_option("--instrument", project_instrument_id);
  project_new->add_option("--created", created, "Creation time, YYYY-MM-DDTHH:MM:SSZ");
  project_new->callback([&] {
    action = [&] {
      Store store = open_store();
      const Project p{project_id, project_name.empty() ? project_id : project_name, project_instrument_id,
                      created.empty() ? now_utc() : parse_timestamp(created), {}};
      store.create_project(p);
      io.out << "created project " << p.project_id << "\n";
      return kExitOk;
    };
  });

  auto* project_show = project->add_subcommand("show", "Print a project record");
  project_show->add_option("id", project_id)->required();
  project_show->callback([&] {
    action = [&] {
      io.out << canonical(to_json(open_store().load_project(project_id)));
      return kExitOk;
    };
  });

  auto* project_list = project->add_subcommand("list", "List projects");
  project_list->callback([&] {
    action = [&] {
      for (const auto& id : open_store().list_projects()) io.out << id << "\n";
      return kExitOk;
    };
  });

  // session ---------------------------------------------------------------
  auto* session = app.add_subcommand("session", "Capture ratings");
  session->require_subcommand(1);
  std::string session_id;
  std::string role = "change_agent";
  std::string phase = "plan";
  std::string aspects;
  std::string label;
  std::string timestamp;
  std::string aspect;
  std::string part;
  std::string sheet_file;
  std::vector<std::string> assignments;

  auto* session_new = session->add_subcommand("new", "Open a rating session");
  session_new->add_option("--project", project_id)->required();
  session_new->add_option("--role", role)->check(CLI::IsMember({"change_agent", "developer", "manager"}));
  session_new->add_option("--phase", phase, "plan, post, or periodic:<k>");
  session_new->add_option("--aspects", aspects, "Comma-separated: intent,effect,perceived")->required();
  session_new->add_option("--label", label);
  session_new->add_option("--id", session_id);
  session_new->add_option("--timestamp", timestamp, "YYYY-MM-DDTHH:MM:SSZ");
  session_new->callback([&] {
    action = [&] {
      Store store = open_store();
      NewSession req{project_id, parse_role(role), Phase::parse(phase), detail::parse_aspects(aspects), label, {}, {}};
      if (!session_id.empty()) req.session_id = session_id;
      if (!timestamp.empty()) req.timestamp = parse_timestamp(timestamp);
      const Session s = create_session(store, req);
      for (const auto& w : pairing_warnings(s)) io.err << "warning: " << w << "\n";
      io.out << s.session_id << "\n";
      return kExitOk;
    };
  });

  auto* session_fill = session->add_subcommand("fill", "Answer the questionnaire interactively");
  session_fill->add_option("session", session_id)->required();
  session_fill->add_option("--aspect", aspect);
  session_fill->add_option("--part", part, "A = effect, B = intent");
  session_fill->callback([&] {
    action = [&] {
      Store store = open_store();
      const Aspect a = detail::pick_aspect(store.load_session(session_id), aspect, part);
      return detail::fill_interactive(store, session_id, a, io);
    };
  });

  auto* session_import = session->add_subcommand("import", "Import a completed sheet (CSV or JSON)");
  session_import->add_option("session", session_id)->required();
  session_import->add_option("file", sheet_file)->required();
  session_import->add_option("--aspect", aspect);
  session_import->add_option("--part", part, "A = effect, B = intent");
  session_import->callback([&] {
    action = [&] {
      Store store = open_store();
      const Aspect a = detail::pick_aspect(store.load_session(session_id), aspect, part);
      const auto ratings = detail::read_sheet_file(Store::read_text(sheet_file));
      apply_ratings(store, session_id, a, ratings);
      io.out << "imported " << ratings.size() << " ratings into " << session_id << " (" << to_string(a) << ")\n";
      return kExitOk;
    };
  });

  auto* session_rate = session->add_subcommand("rate", "Record ratings given as C3B1=3 arguments");
  session_rate->add_option("session", session_id)->required();
  session_rate->add_option("ratings", assignments)->required();
  session_rate->add_option("--aspect", aspect);
  session_rate->add_option("--part", part, "A = effect, B = intent");
  session_rate->callback([&] {
    action = [&] {
      Store store = open_store();
      const Aspect a = detail::pick_aspect(store.load_session(session_id), aspect, part);
      std::vector<std::pair<BehaviorId, Rating>> ratings;
      for (const auto& item : assignments) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::validation, "expected ID=RATING, got '" + item + "'");
        ratings.emplace_back(BehaviorId::parse(item.substr(0, eq)), Rating::parse(item.substr(eq + 1)));
      }
      apply_ratings(store, session_id, a, ratings);
      return kExitOk;
    };
  });

  auto* session_seal = session->add_subcommand("seal", "Seal a complete session");
  session_seal->add_option("session", session_id)->required();
  session_seal->callback([&] {
    action = [&] {
      Store store = open_store();
      try {
        seal_session(store, session_id);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::validation || e.details().empty()) throw;
        io.err << "cannot seal " << session_id << "; missing ratings:\n";
        for (const auto& d : e.details()) io.err << "  " << d << "\n";
        return kExitDomain;
      }
      io.out << "sealed " << session_id << "\n";
      return kExitOk;
    };
  });

  auto* session_show = session->add_subcommand("show", "Print a session record");
  session_show->add_option("session", session_id)->required();
  session_show->callback([&] {
    action = [&] {
      io.out << canonical(to_json(open_store().load_session(session_id)));
      return kExitOk;
    };
  });

  auto* session_list = session->add_subcommand("list", "List a project's sessions");
  session_list->add_option("--project", project_id)->required();
  session_list->callback([&] {
    action = [&] {
      for (const auto& s : open_store().list_sessions(project_id)) {
        io.out << s.session_id << " " << to_string(s.role) << " " << s.phase.str() << " "
               << format_timestamp(s.timestamp) << (s.sealed ? " sealed" : " open") << "\n";
      }
      return kExitOk;
    };
  });

  // report ----------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Score and render reports");
  report->require_subcommand(1);
  int top_k = 10;
  std::string filter_phase;
  std::string filter_role;

  auto selection = [&](Store& store) {
    Selection sel;
    if (!session_id.empty()) {
      sel.session_id = session_id;
      if (project_id.empty()) project_id = store.load_session(session_id).project_id;
    }
    if (project_id.empty()) throw Error(ErrorKind::validation, "give --project or --session");
    if (!store.has_project(project_id)) throw Error(ErrorKind::not_found, "unknown project '" + project_id + "'");
    if (!filter_phase.empty()) sel.filter.phase = Phase::parse(filter_phase);
    if (!filter_role.empty()) sel.filter.role = parse_role(filter_role);
    return sel;
  };
  auto add_scope_options = [&](CLI::App* cmd) {
    cmd->add_option("--project", project_id);
    cmd->add_option("--session", session_id);
    cmd->add_option("--phase", filter_phase);
    cmd->add_option("--role", filter_role);
  };

  auto* report_profile = report->add_subcommand("profile", "Category and overall scores");
  add_scope_options(report_profile);
  report_profile->add_option("--aspect", aspect);
  report_profile->callback([&] {
    action = [&] {
      Store store = open_store();
      const Selection sel = selection(store);
      Aspect a = Aspect::intent;
      if (!aspect.empty()) {
        a = parse_aspect(aspect);
      } else if (sel.session_id) {
        const Session s = store.load_session(*sel.session_id);
        if (!s.has(Aspect::intent)) a = s.sheets.begin()->first;
      }
      detail::print_report(profile_report(store, project_id, a, sel, parse_format(format_name)), io);
      return kExitOk;
    };
  });

  auto* report_gap = report->add_subcommand("gap", "Effect vs intent comparison");
  add_scope_options(report_gap);
  report_gap->callback([&] {
    action = [&] {
      Store store = open_store();
      const Selection sel = selection(store);
      detail::print_report(gap_report(store, project_id, sel, parse_format(format_name)), io);
      return kExitOk;
    };
  });

  auto* report_top = report->add_subcommand("top", "Most important behaviors as a checklist");
  add_scope_options(report_top);
  report_top->add_option("--k", top_k)->check(CLI::PositiveNumber);
  report_top->callback([&] {
    action = [&] {
      Store store = open_store();
      const Selection sel = selection(store);
      detail::print_report(top_report(store, project_id, top_k, sel, parse_format(format_name)), io);
      return kExitOk;
    };
  });

  auto* report_trend = report->add_subcommand("trend", "Scores over time");
  add_scope_options(report_trend);
  report_trend->add_option("--aspect", aspect);
  report_trend->callback([&] {
    action = [&] {
      Store store = open_store();
      const Selection sel = selection(store);
      const Aspect a = aspect.empty() ? Aspect::intent : parse_aspect(aspect);
      detail::print_report(trend_report(store, project_id, a, sel, parse_format(format_name)), io);
      return kExitOk;
    };
  });

  auto* report_bench = report->add_subcommand("benchmark", "Compare projects");
  report_bench->add_option("--aspect", aspect);
  report_bench->callback([&] {
    action = [&] {
      Store store = open_store();
      const Aspect a = aspect.empty() ? Aspect::intent : parse_aspect(aspect);
      detail::print_report(benchmark_report(store, a, parse_format(format_name)), io);
      return kExitOk;
    };
  });

  // store -----------------------------------------------------------------
  auto* store_cmd = app.add_subcommand("store", "Export and import the whole store");
  store_cmd->require_subcommand(1);
  std::string archive;
  auto* store_export = store_cmd->add_subcommand("export", "Write the store as one archive");
  store_export->add_option("archive", archive)->required();
  store_export->callback([&] {
    action = [&] {
      open_store().export_store(archive);
      return kExitOk;
    };
  });
  auto* store_import = store_cmd->add_subcommand("import", "Load an archive into the store");
  store_import->add_option("archive", archive)->required();
  store_import->callback([&] {
    action = [&] {
      open_store().import_store(archive);
      return kExitOk;
    };
  });

  // serve -----------------------------------------------------------------
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  int port = 8080;
  std::string bind = "127.0.0.1";
  std::string www;
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--bind", bind);
  serve->add_option("--www", www, "Directory of static UI assets served at /");
  serve->callback([&] {
    action = [&] {
      Store store = open_store();
      Service service(store);
      httplib::Server server;
      service.mount(server, www.empty() ? std::nullopt : std::optional<std::string>(www));
      io.err << "listening on http://" << bind << ":" << port << " (store " << store.root().string() << ")\n";
      if (!server.listen(bind, port)) throw Error(ErrorKind::io, "cannot listen on " + bind + ":" + std::to_string(port));
      return kExitOk;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, io.out, io.err) == 0 ? kExitOk : kExitDomain;
  }

  try {
    return action ? action() : kExitDomain;
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace commitgauge::cli
