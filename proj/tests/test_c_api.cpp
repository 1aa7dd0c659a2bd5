#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "medtag.h"

using json = nlohmann::json;

namespace {

// Takes ownership of a library string.
std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  medtag_string_free(s);
  return out;
}

std::string slurp(const std::string& path) {
  std::string out;
  if (FILE* f = std::fopen(path.c_str(), "rb")) {
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
  }
  return out;
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::strcmp(medtag_version(), "1.0.0") == 0);
  CHECK(std::strcmp(medtag_status_string(MEDTAG_OK), "ok") == 0);
  CHECK(std::strlen(medtag_status_string(MEDTAG_ERR_IO)) > 0);
  CHECK(std::strlen(medtag_status_string(static_cast<medtag_status>(99))) > 0);
  medtag_string_free(nullptr);
}

TEST_CASE("null arguments and bad input map to status codes") {
  medtag_signature* sig = nullptr;
  CHECK(medtag_signature_reference(nullptr) == MEDTAG_ERR_NULL_POINTER);
  CHECK(std::strlen(medtag_last_error()) > 0);
  CHECK(medtag_signature_from_json("{not json", &sig) == MEDTAG_ERR_INVALID_ARGUMENT);
  CHECK(sig == nullptr);
  CHECK(medtag_signature_from_json(R"({"label":"x","poles":[{"alpha":-1,"omega":1}]})", &sig) ==
        MEDTAG_ERR_INVALID_ARGUMENT);
  REQUIRE(medtag_signature_reference(&sig) == MEDTAG_OK);
  CHECK(std::strlen(medtag_last_error()) == 0);

  medtag_time_signal* ts = nullptr;
  REQUIRE(medtag_synthesize_time(sig, nullptr, &ts) == MEDTAG_OK);
  double re = 0.0;
  double im = 0.0;
  CHECK(medtag_time_signal_sample(ts, 1u << 20, &re, &im) == MEDTAG_ERR_OUT_OF_RANGE);
  CHECK(medtag_time_signal_sample(ts, 0, nullptr, &im) == MEDTAG_ERR_NULL_POINTER);
  CHECK(medtag_synthesize_time(sig, R"({"n_samples":0})", &ts) == MEDTAG_ERR_INVALID_ARGUMENT);
  medtag_time_signal_destroy(ts);
  medtag_signature_destroy(sig);
  medtag_signature_destroy(nullptr);
}

TEST_CASE("signature, synthesis and pole estimation through the C API") {
  medtag_signature* sig = nullptr;
  REQUIRE(medtag_signature_reference(&sig) == MEDTAG_OK);
  size_t poles = 0;
  CHECK(medtag_signature_pole_count(sig, &poles) == MEDTAG_OK);
  CHECK(poles == 3);

  char* text = nullptr;
  REQUIRE(medtag_signature_to_json(sig, &text) == MEDTAG_OK);
  const std::string sig_json = take(text);
  medtag_signature* again = nullptr;
  REQUIRE(medtag_signature_from_json(sig_json.c_str(), &again) == MEDTAG_OK);
  medtag_signature_destroy(again);

  medtag_time_signal* ts = nullptr;
  REQUIRE(medtag_synthesize_time(sig, nullptr, &ts) == MEDTAG_OK);
  size_t n = 0;
  CHECK(medtag_time_signal_size(ts, &n) == MEDTAG_OK);
  CHECK(n == 1024);
  double re = 0.0;
  double im = 0.0;
  CHECK(medtag_time_signal_sample(ts, 0, &re, &im) == MEDTAG_OK);
  CHECK(re == doctest::Approx(3.0));
  CHECK(im == doctest::Approx(0.0));

  REQUIRE(medtag_estimate_poles(ts, R"({"order":3})", &text) == MEDTAG_OK);
  const std::string est = take(text);
  CHECK(json::parse(est).at("poles").size() == 3);
  double err = 1.0;
  CHECK(medtag_mpm_error(sig, est.c_str(), &err) == MEDTAG_OK);
  CHECK(err < 1e-6);
  CHECK(medtag_estimate_poles(ts, R"({"engine":"magic"})", &text) == MEDTAG_ERR_INVALID_ARGUMENT);

  medtag_time_signal_destroy(ts);
  medtag_signature_destroy(sig);
}

TEST_CASE("spectra, channel and classification through the C API") {
  medtag_signature* sig = nullptr;
  REQUIRE(medtag_signature_reference(&sig) == MEDTAG_OK);
  medtag_time_signal* ts = nullptr;
  REQUIRE(medtag_synthesize_time(sig, nullptr, &ts) == MEDTAG_OK);
  medtag_spectrum* full = nullptr;
  REQUIRE(medtag_spectrum_dft(ts, 0, &full) == MEDTAG_OK);
  size_t bins = 0;
  CHECK(medtag_spectrum_size(full, &bins) == MEDTAG_OK);
  CHECK(bins == 1024);

  medtag_time_signal* back = nullptr;
  REQUIRE(medtag_spectrum_inverse(full, nullptr, &back) == MEDTAG_OK);
  double a_re = 0.0, a_im = 0.0, b_re = 0.0, b_im = 0.0;
  for (size_t k : {size_t{0}, size_t{7}, size_t{500}}) {
    medtag_time_signal_sample(ts, k, &a_re, &a_im);
    medtag_time_signal_sample(back, k, &b_re, &b_im);
    CHECK(std::hypot(a_re - b_re, a_im - b_im) < 1e-9);
  }
  medtag_time_signal_destroy(back);

  medtag_spectrum* noisy = nullptr;
  REQUIRE(medtag_spectrum_apply_channel(full, R"({"snr_db":25,"phase_noise_deg":1,"seed":3})", &noisy) == MEDTAG_OK);
  CHECK(medtag_spectrum_apply_channel(full, R"({"snr_db":25,"phase_noise_deg":-1})", &noisy) ==
        MEDTAG_ERR_INVALID_ARGUMENT);

  char* text = nullptr;
  REQUIRE(medtag_code_templates(sig, nullptr, 5.0, &text) == MEDTAG_OK);
  const std::string templates = take(text);
  CHECK(json::parse(templates).size() == 8);
  REQUIRE(medtag_classify(noisy, templates.c_str(), nullptr, &text) == MEDTAG_OK);
  const json result = json::parse(take(text));
  CHECK(result.at("label") == "111");
  CHECK(result.at("pattern").size() == 3);

  REQUIRE(medtag_extract_pattern(full, nullptr, &text) == MEDTAG_OK);
  const std::string pattern = take(text);
  double d = -1.0;
  CHECK(medtag_pattern_distance(pattern.c_str(), pattern.c_str(), &d) == MEDTAG_OK);
  CHECK(d == 0.0);
  REQUIRE(medtag_decode_bits(pattern.c_str(), R"({"slot_freqs_hz":[1e9,1.75e9,2.5e9],"tolerance_hz":1e8})", &text) ==
          MEDTAG_OK);
  CHECK(json::parse(take(text)).at("bits") == "111");

  REQUIRE(medtag_spectrum_to_csv(full, &text) == MEDTAG_OK);
  const std::string csv = take(text);
  medtag_spectrum* parsed = nullptr;
  REQUIRE(medtag_spectrum_from_csv(csv.c_str(), &parsed) == MEDTAG_OK);
  double f = 0.0, re = 0.0, im = 0.0, f2 = 0.0, re2 = 0.0, im2 = 0.0;
  medtag_spectrum_bin(full, 100, &f, &re, &im);
  medtag_spectrum_bin(parsed, 100, &f2, &re2, &im2);
  CHECK(f == f2);
  CHECK(re == re2);
  CHECK(im == im2);
  CHECK(medtag_spectrum_bin(parsed, 5000, &f, &re, &im) == MEDTAG_ERR_OUT_OF_RANGE);

  medtag_spectrum_destroy(parsed);
  medtag_spectrum_destroy(noisy);
  medtag_spectrum_destroy(full);
  medtag_time_signal_destroy(ts);
  medtag_signature_destroy(sig);
}

TEST_CASE("open and closed states through the C API") {
  char* text = nullptr;
  medtag_signature* open = nullptr;
  medtag_signature* closed = nullptr;
  REQUIRE(medtag_signature_event(0, &open) == MEDTAG_OK);
  REQUIRE(medtag_signature_event(1, &closed) == MEDTAG_OK);
  medtag_spectrum* so = nullptr;
  medtag_spectrum* sc = nullptr;
  REQUIRE(medtag_spectrum_analytic(open, nullptr, 1, &so) == MEDTAG_OK);
  REQUIRE(medtag_spectrum_analytic(closed, nullptr, 1, &sc) == MEDTAG_OK);
  REQUIRE(medtag_extract_pattern(so, nullptr, &text) == MEDTAG_OK);
  const json po = json::parse(take(text));
  REQUIRE(medtag_extract_pattern(sc, nullptr, &text) == MEDTAG_OK);
  const json pc = json::parse(take(text));
  const json tagset = {{"tag_id", "bottle"},
                       {"open_template", {{"label", "open"}, {"notches", po}, {"accept_radius", 0.5}}},
                       {"closed_template", {{"label", "closed"}, {"notches", pc}, {"accept_radius", 0.5}}}};
  REQUIRE(medtag_classify_state(sc, tagset.dump().c_str(), nullptr, &text) == MEDTAG_OK);
  CHECK(json::parse(take(text)).at("state") == "CLOSED");
  REQUIRE(medtag_classify_state(so, tagset.dump().c_str(), nullptr, &text) == MEDTAG_OK);
  CHECK(json::parse(take(text)).at("state") == "OPEN");
  medtag_spectrum_destroy(so);
  medtag_spectrum_destroy(sc);
  medtag_signature_destroy(open);
  medtag_signature_destroy(closed);
}

TEST_CASE("debouncer and eMAR through the C API") {
  medtag_debouncer* d = nullptr;
  CHECK(medtag_debouncer_create("bottle", -1.0, 1.0, &d) == MEDTAG_ERR_INVALID_ARGUMENT);
  REQUIRE(medtag_debouncer_create("bottle", 0.5, 1.0, &d) == MEDTAG_OK);
  char* ev = nullptr;
  std::string opened;
  for (int k = 0; k < 50; ++k) {
    const double t = k * 0.1;
    REQUIRE(medtag_debouncer_advance(d, t < 2.0 ? "CLOSED" : "OPEN", 0.1, t, &ev) == MEDTAG_OK);
    if (ev != nullptr) {
      CHECK(opened.empty());
      opened = take(ev);
    }
  }
  CHECK(medtag_debouncer_advance(d, "AJAR", 0.1, 10.0, &ev) == MEDTAG_ERR_INVALID_ARGUMENT);
  CHECK(medtag_debouncer_advance(d, "OPEN", 0.1, 1.0, &ev) == MEDTAG_ERR_INVALID_ARGUMENT);
  medtag_debouncer_destroy(d);
  REQUIRE_FALSE(opened.empty());
  CHECK(json::parse(opened).at("kind") == "OPENED");

  medtag_emar* emar = nullptr;
  CHECK(medtag_emar_create(R"({"tag_id":"bottle"})", &emar) == MEDTAG_ERR_INVALID_ARGUMENT);
  const char* schedule =
      R"({"tag_id":"bottle","patient_id":"p","dose_times":[100],"window_before_s":10,"window_after_s":30,
          "max_cycles_per_window":1,"cycle_window_s":300})";
  REQUIRE(medtag_emar_create(schedule, &emar) == MEDTAG_OK);
  char* alerts = nullptr;
  REQUIRE(medtag_emar_check_missed(emar, 131.0, &alerts) == MEDTAG_OK);
  const json missed = json::parse(take(alerts));
  REQUIRE(missed.size() == 1);
  CHECK(missed[0].at("kind") == "MISSED_DOSE");
  const std::string id = missed[0].at("alert_id");

  REQUIRE(medtag_emar_evaluate_event(emar, opened.c_str(), 132.0, &alerts) == MEDTAG_OK);
  CHECK(json::parse(take(alerts)).at(0).at("kind") == "UNSCHEDULED_ADMIN");

  CHECK(medtag_emar_acknowledge(emar, id.c_str(), "nurse", 140.0) == MEDTAG_OK);
  CHECK(medtag_emar_acknowledge(emar, id.c_str(), "nurse", 141.0) == MEDTAG_ERR_INVALID_ARGUMENT);
  CHECK(medtag_emar_acknowledge(emar, "alert-9999", "nurse", 141.0) == MEDTAG_ERR_INVALID_ARGUMENT);

  char* text = nullptr;
  REQUIRE(medtag_emar_alerts_json(emar, &text) == MEDTAG_OK);
  const json all = json::parse(take(text));
  CHECK(all.size() == 2);
  CHECK(all[0].contains("acknowledged"));
  REQUIRE(medtag_emar_record_jsonl(emar, &text) == MEDTAG_OK);
  const std::string record = take(text);
  CHECK(std::count(record.begin(), record.end(), '\n') == 4);

  const std::string sink_path = "medtag_c_api_sink.jsonl";
  std::remove(sink_path.c_str());
  const json sink = {{"type", "file"}, {"path", sink_path}};
  REQUIRE(medtag_emar_publish(emar, id.c_str(), sink.dump().c_str(), &text) == MEDTAG_OK);
  const json receipt = json::parse(take(text));
  CHECK(receipt.at("delivered") == true);
  CHECK(receipt.at("attempt_count") == 1);
  CHECK(json::parse(slurp(sink_path)).at("alert_id") == id);
  std::remove(sink_path.c_str());
  CHECK(medtag_emar_publish(emar, "alert-9999", sink.dump().c_str(), &text) == MEDTAG_ERR_INVALID_ARGUMENT);
  CHECK(medtag_emar_publish(emar, id.c_str(), R"({"type":"pigeon"})", &text) == MEDTAG_ERR_INVALID_ARGUMENT);
  medtag_emar_destroy(emar);
}

TEST_CASE("sweep and scenario through the C API") {
  medtag_sweep_table* t = nullptr;
  CHECK(medtag_sweep_run(R"({"trials_per_point":0})", &t) == MEDTAG_ERR_INVALID_ARGUMENT);
  REQUIRE(medtag_sweep_run(R"({"snr_grid":[30],"trials_per_point":2,"master_seed":5})", &t) == MEDTAG_OK);
  size_t rows = 0;
  CHECK(medtag_sweep_table_rows(t, &rows) == MEDTAG_OK);
  CHECK(rows == 1);
  double snr = 0.0, mean = 1.0, sd = 1.0, rate = 1.0;
  size_t trials = 0;
  REQUIRE(medtag_sweep_table_row(t, 0, &snr, &trials, &mean, &sd, &rate) == MEDTAG_OK);
  CHECK(snr == 30.0);
  CHECK(trials == 2);
  CHECK(mean < 0.01);
  CHECK(rate == 0.0);
  CHECK(medtag_sweep_table_row(t, 1, &snr, &trials, &mean, &sd, &rate) == MEDTAG_ERR_OUT_OF_RANGE);
  char* csv = nullptr;
  REQUIRE(medtag_sweep_table_csv(t, &csv) == MEDTAG_OK);
  CHECK(take(csv).rfind("snr_db,trials,mpm_err_mean,mpm_err_std,pra_err_rate\n", 0) == 0);
  CHECK(medtag_sweep_table_export(t, "/nonexistent-dir/x/fig.csv") == MEDTAG_ERR_IO);
  medtag_sweep_table_destroy(t);

  const std::string script = slurp(std::string(MEDTAG_DATA_DIR) + "/scenarios/double_dose.json");
  REQUIRE_FALSE(script.empty());
  char* summary = nullptr;
  REQUIRE(medtag_scenario_run(script.c_str(), nullptr, nullptr, &summary) == MEDTAG_OK);
  const json s = json::parse(take(summary));
  CHECK(s.at("event_count") == 4);
  CHECK(s.at("alert_count") == 1);
  CHECK(s.at("alerts").at(0).at("kind") == "DOUBLE_DOSE");
  CHECK(medtag_scenario_run("{}", nullptr, nullptr, &summary) == MEDTAG_ERR_INVALID_ARGUMENT);
}
