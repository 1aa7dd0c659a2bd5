#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "medtag/error.hpp"
#include "medtag/io.hpp"
#include "medtag/scenario.hpp"
#include "medtag/sweep.hpp"

using namespace medtag;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const std::string& name) { return std::string(MEDTAG_DATA_DIR) + "/scenarios/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("medtag_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepConfig small_sweep() {
  SweepConfig c;
  c.snr_grid = {10.0, 30.0};
  c.trials_per_point = 3;
  c.master_seed = 42;
  return c;
}

}  // namespace

TEST_CASE("trial seeds depend only on their indices") {
  CHECK(trial_seed(1, 2, 3) == trial_seed(1, 2, 3));
  CHECK(trial_seed(1, 2, 3) != trial_seed(1, 3, 2));
  CHECK(trial_seed(1, 0, 0) != trial_seed(2, 0, 0));
}

TEST_CASE("sweep config validation") {
  SweepConfig c = small_sweep();
  c.trials_per_point = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_sweep();
  c.snr_grid.clear();
  CHECK_THROWS_AS(run_sweep(c), Error);
  CHECK(SweepConfig::default_snr_grid().size() == 13);
  CHECK(SweepConfig::default_snr_grid().back() == 30.0);
}

TEST_CASE("sweep output is identical across runs and thread counts") {
  SweepConfig c = small_sweep();
  c.threads = 1;
  const std::string one = sweep_csv(run_sweep(c));
  CHECK(one == sweep_csv(run_sweep(c)));
  c.threads = 4;
  CHECK(one == sweep_csv(run_sweep(c)));
  c.master_seed = 43;
  CHECK(one != sweep_csv(run_sweep(c)));

  SweepConfig single = small_sweep();
  single.trials_per_point = 1;
  CHECK(sweep_csv(run_sweep(single)) == sweep_csv(run_sweep(single)));
}

TEST_CASE("sweep rows and CSV schema") {
  const SweepTable t = run_sweep(small_sweep());
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].snr_db == 10.0);
  CHECK(t.rows[1].trials == 3);
  CHECK(t.rows[1].mpm_err_mean < 0.01);
  CHECK(t.rows[1].pra_err_rate == 0.0);
  CHECK(t.rows[1].mpm_err_std >= 0.0);
  const std::string csv = sweep_csv(t);
  CHECK(csv.rfind("snr_db,trials,mpm_err_mean,mpm_err_std,pra_err_rate\n", 0) == 0);
  const SweepTable back = sweep_from_csv(csv);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[1].mpm_err_mean == t.rows[1].mpm_err_mean);
  CHECK(back.rows[0].pra_err_rate == t.rows[0].pra_err_rate);
  CHECK_THROWS_AS(sweep_from_csv("a,b\n1,2\n"), Error);
}

TEST_CASE("plot export writes CSV and a two-series manifest") {
  const fs::path dir = scratch("export");
  fs::create_directories(dir);
  const SweepTable t = run_sweep(small_sweep());
  export_plotdata(t, (dir / "fig3.csv").string());
  CHECK(slurp(dir / "fig3.csv") == sweep_csv(t));
  const io::json m = io::json::parse(slurp(dir / "fig3.manifest.json"));
  CHECK(m.at("series").size() == 2);
  CHECK(m.at("csv") == "fig3.csv");
  CHECK(m.contains("x_label"));
  CHECK(m.contains("y_label"));

  CHECK_THROWS_AS(export_plotdata(SweepTable{}, (dir / "empty.csv").string()), Error);
  try {
    export_plotdata(t, "/nonexistent-dir/sub/fig.csv");
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
  fs::remove_all(dir);
}

TEST_CASE("sweep config from JSON") {
  const SweepConfig c = sweep_config_from_json(io::parse(
      R"({"snr_grid":[5,10],"trials_per_point":7,"master_seed":9,"phase_noise_deg":1,"mpm":{"order":3,"engine":"full"}})"));
  CHECK(c.snr_grid == std::vector<double>{5.0, 10.0});
  CHECK(c.trials_per_point == 7);
  CHECK(c.master_seed == 9);
  CHECK(c.phase_noise_deg == 1.0);
  CHECK(c.mpm.engine == SvdEngine::kFull);
  CHECK_THROWS_AS(sweep_config_from_json(io::parse(R"({"trials_per_point":0})")), Error);
  CHECK_THROWS_AS(sweep_config_from_json(io::parse(R"({"snr_grid":"loud"})")), Error);
}

TEST_CASE("canned scenario: normal administration") {
  const ScenarioResult r = run_scenario(scenario_from_json(io::read_json_file(scenario_path("normal.json"))));
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0].kind == DrugEventKind::kOpened);
  CHECK(r.events[0].timestamp == doctest::Approx(10.0).epsilon(0.01));
  CHECK(r.events[1].kind == DrugEventKind::kClosed);
  CHECK(r.events[1].timestamp == doctest::Approx(20.0).epsilon(0.01));
  CHECK(r.alerts.empty());
  CHECK(r.record.alerts().empty());
}

TEST_CASE("canned scenario: double dose") {
  const ScenarioResult r = run_scenario(scenario_from_json(io::read_json_file(scenario_path("double_dose.json"))));
  CHECK(r.events.size() == 4);
  REQUIRE(r.alerts.size() == 1);
  CHECK(r.alerts[0].kind == AlertKind::kDoubleDose);
  CHECK(r.alerts[0].timestamp >= 70.0);
}

TEST_CASE("canned scenario: missed dose") {
  const ScenarioResult r = run_scenario(scenario_from_json(io::read_json_file(scenario_path("missed_dose.json"))));
  CHECK(r.events.empty());
  REQUIRE(r.alerts.size() == 1);
  CHECK(r.alerts[0].kind == AlertKind::kMissedDose);
  CHECK(r.alerts[0].dose_index == std::optional<std::size_t>(0));
}

TEST_CASE("scenario outputs are byte-identical on replay and conserve alerts") {
  for (const char* name : {"normal.json", "double_dose.json", "missed_dose.json"}) {
    const ScenarioScript s = scenario_from_json(io::read_json_file(scenario_path(name)));
    const fs::path a = scratch(std::string("replay_a_") + name);
    const fs::path b = scratch(std::string("replay_b_") + name);
    const ScenarioResult ra = run_scenario(s);
    write_scenario_outputs(ra, a.string());
    write_scenario_outputs(run_scenario(s), b.string());
    for (const char* file : {"events.jsonl", "record.jsonl", "alerts.json", "summary.json"}) {
      CHECK(fs::exists(a / file));
      CHECK(slurp(a / file) == slurp(b / file));
    }
    const io::json summary = io::json::parse(slurp(a / "summary.json"));
    const io::json alerts = io::json::parse(slurp(a / "alerts.json"));
    REQUIRE(summary.at("alerts").size() == alerts.size());
    for (std::size_t i = 0; i < alerts.size(); ++i) {
      CHECK(summary.at("alerts")[i].at("alert_id") == alerts[i].at("alert_id"));
    }
    CHECK(ra.record.alerts().size() == ra.alerts.size());
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("scenario publishes to the configured sink") {
  ScenarioScript s = scenario_from_json(io::read_json_file(scenario_path("missed_dose.json")));
  const fs::path out = scratch("sink.jsonl");
  s.sink.type = "file";
  s.sink.path = out.string();
  const ScenarioResult r = run_scenario(s);
  REQUIRE(r.receipts.size() == 1);
  CHECK(r.receipts[0].delivered);
  CHECK(io::json::parse(slurp(out)).at("kind") == "MISSED_DOSE");
  fs::remove(out);

  // Undeliverable alerts are still recorded.
  s.sink.path = "/nonexistent-dir/sink.jsonl";
  const ScenarioResult lost = run_scenario(s);
  REQUIRE(lost.receipts.size() == 1);
  CHECK_FALSE(lost.receipts[0].delivered);
  CHECK(lost.record.alerts().size() == 1);
}

TEST_CASE("scenario validation") {
  io::json j = io::read_json_file(scenario_path("normal.json"));
  io::json mismatch = j;
  mismatch["schedule"]["tag_id"] = "someone-else";
  CHECK_THROWS_AS(scenario_from_json(mismatch), Error);
  io::json unordered = j;
  unordered["timeline"][2]["t"] = 5.0;
  CHECK_THROWS_AS(scenario_from_json(unordered), Error);
  io::json no_schedule = j;
  no_schedule.erase("schedule");
  CHECK_THROWS_AS(scenario_from_json(no_schedule), Error);
  io::json bad_sink = j;
  bad_sink["sink"] = {{"type", "pigeon"}};
  CHECK_THROWS_AS(run_scenario(scenario_from_json(bad_sink)), Error);
}

TEST_CASE("json round trips") {
  const TagSignature sig = reference_signature();
  const TagSignature back = io::signature_from_json(io::to_json(sig));
  REQUIRE(back.poles().size() == 3);
  CHECK(back.poles()[1].omega() == sig.poles()[1].omega());
  CHECK(back.label() == sig.label());

  SamplingGrid g;
  g.n_samples = 512;
  CHECK(io::grid_from_json(io::to_json(g)).n_samples == 512);

  ChannelConfig ch;
  ch.phase_noise_deg = 1.0;
  ch.seed = 5;
  const ChannelConfig ch2 = io::channel_from_json(io::to_json(ch));
  CHECK_FALSE(ch2.snr_db);
  CHECK(ch2.seed == 5);
  CHECK(io::channel_from_json(io::parse(R"({"snr_db":"none"})")).snr_db == std::nullopt);
  CHECK(*io::channel_from_json(io::parse(R"({"snr_db":12.5})")).snr_db == 12.5);

  PatternTemplate t{"A", NotchPattern({{1e9, 1e8, 10}}), {}, 0.7};
  t.params.weights.d = 2.0;
  const PatternTemplate t2 = io::template_from_json(io::to_json(t));
  CHECK(t2.pattern == t.pattern);
  CHECK(t2.accept_radius == 0.7);
  CHECK(t2.params.weights.d == 2.0);

  const DrugEvent e{"bottle", DrugEventKind::kClosed, 3.5, 0.25};
  CHECK(io::event_from_json(io::to_json(e)) == e);

  PrescriptionSchedule s;
  s.tag_id = "bottle";
  s.patient_id = "p";
  s.dose_times = {1.0, 2.0};
  const PrescriptionSchedule s2 = io::schedule_from_json(io::to_json(s));
  CHECK(s2.dose_times == s.dose_times);
  CHECK(s2.cycle_window == s.cycle_window);

  const ExtractionConfig x = io::extraction_from_json(io::parse(R"({"band":[0.5e9,3e9],"polarity":"dip"})"));
  CHECK(x.f_lo == 0.5e9);
  CHECK(x.polarity == Polarity::kDip);
  CHECK(io::extraction_from_json(io::to_json(x)).f_hi == 3e9);
}

TEST_CASE("csv round trip and malformed input") {
  const SamplingGrid g;
  const Spectrum sp = clean_spectrum(reference_signature(), g);
  const Spectrum back = io::spectrum_from_csv(io::spectrum_csv(sp));
  REQUIRE(back.size() == sp.size());
  for (std::size_t i = 0; i < sp.size(); ++i) {
    REQUIRE(back.freqs[i] == sp.freqs[i]);
    REQUIRE(back.values[i] == sp.values[i]);
  }
  CHECK_THROWS_AS(io::spectrum_from_csv("f,x\n1,2\n"), Error);
  CHECK_THROWS_AS(io::parse("{not json"), Error);
  CHECK_THROWS_AS(io::signature_from_json(io::parse(R"({"label":"x","poles":[{"alpha":-1,"omega":1}]})")), Error);
  try {
    io::read_json_file("/nonexistent/file.json");
    FAIL("expected an error");
  } catch (const Error&) {
  }
}
