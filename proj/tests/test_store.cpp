#include "commitgauge/store.hpp"
#include "commitgauge/workflow.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <thread>

using namespace commitgauge;
using namespace commitgauge::testing;

namespace {

Project project(const std::string& id, const std::string& instrument = std::string(kBundledInstrumentId)) {
  return {id, "Project " + id, instrument, at("2026-01-01T08:00:00Z"), {}};
}

Session sealed_fixture(const std::string& sid, const std::string& pid, const char* when) {
  const Instrument inst = bundled_instrument();
  Session s = open_session(sid, pid, Role::change_agent, Phase::plan(), {Aspect::intent}, "SPI group", at(when));
  for (const auto& [id, r] : worked_example_sheet().ratings) s = record_rating(s, Aspect::intent, id, r, inst);
  return finalize_session(s, inst);
}

}  // namespace

TEST_CASE("opening a store creates the layout", "[store]") {
  TempDir dir;
  const Store store(dir / "s");
  CHECK(std::filesystem::exists(dir / "s/store.json"));
  CHECK(std::filesystem::is_directory(dir / "s/instruments"));
  CHECK(std::filesystem::is_directory(dir / "s/projects"));
  CHECK(std::filesystem::is_directory(dir / "s/sessions"));
  CHECK(store.list_projects().empty());
}

TEST_CASE("store index with unknown version is rejected", "[store]") {
  TempDir dir;
  { Store store(dir / "s"); }
  Store::write_file(dir / "s/store.json", R"({"format":"commitgauge-store","schema_version":9})");
  try {
    Store reopened(dir / "s");
    FAIL("expected version error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::version);
  }
}

TEST_CASE("projects save, load, and collide", "[store]") {
  TempDir dir;
  Store store(dir.path());
  store.save_instrument(bundled_instrument());
  const Project p1 = project("P1");
  store.create_project(p1);
  CHECK(store.load_project("P1") == p1);

  try {
    store.create_project(p1);
    FAIL("expected conflict");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::conflict);
  }
  try {
    store.load_project("nope");
    FAIL("expected not found");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_found);
  }
  CHECK_THROWS_AS(store.create_project(project("P2", "missing-instrument")), Error);
  CHECK_THROWS_AS(store.create_project(project("../evil")), Error);
}

TEST_CASE("sessions list in timestamp order with conjunctive filters", "[store]") {
  TempDir dir;
  Store store(dir.path());
  store.save_instrument(bundled_instrument());
  store.create_project(project("P1"));

  store.save_session(sealed_fixture("P1-S2", "P1", "2026-02-01T00:00:00Z"));
  store.save_session(sealed_fixture("P1-S1", "P1", "2026-01-15T00:00:00Z"));
  store.save_session(sealed_fixture("P1-S0", "P1", "2026-02-01T00:00:00Z"));

  const auto all = store.list_sessions("P1");
  REQUIRE(all.size() == 3);
  CHECK(all[0].session_id == "P1-S1");
  CHECK(all[1].session_id == "P1-S0");
  CHECK(all[2].session_id == "P1-S2");
  CHECK(store.load_project("P1").session_ids == std::vector<std::string>{"P1-S2", "P1-S1", "P1-S0"});

  CHECK(store.list_sessions("P1", {Phase::post(), {}, {}, {}}).empty());
  CHECK(store.list_sessions("P1", {Phase::plan(), Role::change_agent, Aspect::intent, {}}).size() == 3);
  CHECK(store.list_sessions("P1", {Phase::plan(), Role::developer, {}, {}}).empty());
  CHECK(store.list_sessions("P1", {{}, {}, Aspect::effect, {}}).empty());
  CHECK_THROWS_AS(store.list_sessions("P9"), Error);
}

TEST_CASE("stored sessions keep their sealed flag and scores", "[store]") {
  TempDir dir;
  Store store(dir.path());
  store.save_instrument(bundled_instrument());
  store.create_project(project("P1"));
  const Session original = sealed_fixture("P1-S1", "P1", "2026-01-15T00:00:00Z");
  store.save_session(original);

  const Session loaded = store.load_session("P1-S1");
  CHECK(loaded == original);
  CHECK(loaded.sealed);
  const Instrument inst = store.load_instrument(std::string(kBundledInstrumentId));
  CHECK(overall_score(loaded.sheets.at(Aspect::intent), inst) == overall_score(original.sheets.at(Aspect::intent), inst));

  Session tampered = loaded;
  tampered.sheets.at(Aspect::intent).ratings.at({3, 1}) = Rating::of(0);
  try {
    store.save_session(tampered);
    FAIL("expected sealed error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::sealed);
  }
  CHECK(store.load_session("P1-S1") == original);
}

TEST_CASE("apply_ratings is all-or-nothing", "[store]") {
  TempDir dir;
  Store store(dir.path());
  store.save_instrument(bundled_instrument());
  store.create_project(project("P1"));
  const Session s = create_session(store, {"P1", Role::change_agent, Phase::plan(), {Aspect::intent}, "g", {}, {}});
  CHECK(s.session_id == "P1-S1");
  apply_ratings(store, s.session_id, Aspect::intent, {{{3, 1}, Rating::of(2)}});
  const std::string before = Store::read_text(dir / "sessions/P1-S1.json");
  CHECK_THROWS_AS(apply_ratings(store, s.session_id, Aspect::intent, {{{3, 2}, Rating::of(1)}, {{99, 1}, Rating::of(1)}}),
                  Error);
  CHECK(Store::read_text(dir / "sessions/P1-S1.json") == before);
  CHECK_THROWS_AS(create_session(store, {"P9", Role::change_agent, Phase::plan(), {Aspect::intent}, "g", {}, {}}), Error);
}

TEST_CASE("export and import round-trip byte for byte", "[store]") {
  TempDir dir;
  SECTION("empty store") {
    Store a(dir / "a");
    a.export_store(dir / "a.json");
    Store b(dir / "b");
    b.import_store(dir / "a.json");
    CHECK(b.list_projects().empty());
    CHECK(b.export_archive() == Store::read_text(dir / "a.json"));
  }
  SECTION("fourteen projects") {
    Store a(dir / "a");
    a.save_instrument(bundled_instrument());
    Rng rng(14);
    const Instrument inst = bundled_instrument();
    for (int i = 1; i <= 14; ++i) {
      const std::string pid = "P" + std::to_string(i);
      a.create_project(project(pid));
      Session s = open_session(pid + "-S1", pid, Role::change_agent, Phase::plan(), {Aspect::intent, Aspect::effect},
                               "g", at("2026-01-01T00:00:00Z"));
      for (Aspect asp : {Aspect::intent, Aspect::effect})
        for (const auto& [id, r] : random_sheet(rng, inst, 0.2, asp).ratings) s = record_rating(s, asp, id, r, inst);
      a.save_session(finalize_session(s, inst));
    }
    const std::string first = a.export_archive();
    Store b(dir / "b");
    b.import_archive(first);
    CHECK(b.export_archive() == first);
    for (const auto& pid : a.list_projects()) {
      CHECK(profile_report(a, pid, Aspect::intent, {}, Format::json).document ==
            profile_report(b, pid, Aspect::intent, {}, Format::json).document);
    }
    // importing the same archive again collides
    CHECK_THROWS_AS(b.import_archive(first), Error);
  }
  SECTION("bad archives") {
    Store b(dir / "b");
    try {
      b.import_archive(R"({"format":"commitgauge-archive","schema_version":2,"instruments":[],"projects":[],"sessions":[]})");
      FAIL("expected version error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::version);
    }
    try {
      b.import_archive("[1,2");
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
    }
    CHECK_THROWS_AS(b.import_archive(R"({"format":"other"})"), Error);
  }
}

TEST_CASE("concurrent writers do not lose sessions", "[store]") {
  TempDir dir;
  {
    Store store(dir.path());
    store.save_instrument(bundled_instrument());
    store.create_project(project("P1"));
  }
  std::vector<std::thread> writers;
  for (int t = 0; t < 4; ++t) {
    writers.emplace_back([&, t] {
      Store store(dir.path());
      for (int i = 0; i < 5; ++i) {
        store.save_session(sealed_fixture("P1-T" + std::to_string(t) + "-" + std::to_string(i), "P1", "2026-01-01T00:00:00Z"));
      }
    });
  }
  for (auto& w : writers) w.join();
  CHECK(Store(dir.path()).load_project("P1").session_ids.size() == 20);
}
