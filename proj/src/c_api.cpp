#include "medtag.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <string>
#include <utility>

#include "medtag/channel.hpp"
#include "medtag/emar.hpp"
#include "medtag/error.hpp"
#include "medtag/events.hpp"
#include "medtag/io.hpp"
#include "medtag/mpm.hpp"
#include "medtag/pra.hpp"
#include "medtag/scenario.hpp"
#include "medtag/selfcheck.hpp"
#include "medtag/sem.hpp"
#include "medtag/sweep.hpp"

struct medtag_signature {
  medtag::TagSignature value;
};
struct medtag_time_signal {
  medtag::TimeSignal value;
};
struct medtag_spectrum {
  medtag::Spectrum value;
};
struct medtag_debouncer {
  medtag::StreamState state;
  medtag::DebounceConfig cfg;
};
struct medtag_emar {
  medtag::PrescriptionSchedule schedule;
  medtag::AdministrationRecord record;
};
struct medtag_sweep_table {
  medtag::SweepTable value;
};

namespace {

using medtag::io::json;

thread_local std::string g_last_error;

struct NullArgument {
  const char* name;
};

struct OutOfRange {
  std::string what;
};

template <typename T>
T* need(T* p, const char* name) {
  if (p == nullptr) throw NullArgument{name};
  return p;
}

medtag_status fail(medtag_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <typename F>
medtag_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return MEDTAG_OK;
  } catch (const NullArgument& e) {
    return fail(MEDTAG_ERR_NULL_POINTER, std::string("null argument: ") + e.name);
  } catch (const OutOfRange& e) {
    return fail(MEDTAG_ERR_OUT_OF_RANGE, e.what);
  } catch (const medtag::Error& e) {
    switch (e.code()) {
      case medtag::ErrorCode::kInvalidArgument:
        return fail(MEDTAG_ERR_INVALID_ARGUMENT, e.what());
      case medtag::ErrorCode::kIo:
        return fail(MEDTAG_ERR_IO, e.what());
      case medtag::ErrorCode::kRuntime:
        break;
    }
    return fail(MEDTAG_ERR_RUNTIME, e.what());
  } catch (const json::exception& e) {
    return fail(MEDTAG_ERR_INVALID_ARGUMENT, std::string("malformed JSON input: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(MEDTAG_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(MEDTAG_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(MEDTAG_ERR_RUNTIME, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_optional(const char* text) { return text == nullptr ? json::object() : medtag::io::parse(text); }

medtag::SamplingGrid grid_arg(const char* text) {
  return text == nullptr ? medtag::default_grid() : medtag::io::grid_from_json(medtag::io::parse(text));
}

medtag::ExtractionConfig extraction_arg(const char* text) {
  return text == nullptr ? medtag::ExtractionConfig{} : medtag::io::extraction_from_json(medtag::io::parse(text));
}

void check_index(std::size_t index, std::size_t size) {
  if (index >= size) {
    throw OutOfRange{"index " + std::to_string(index) + " out of range (size " + std::to_string(size) + ")"};
  }
}

medtag::PoleEstimate estimate_from_json(const json& j) {
  medtag::PoleEstimate e;
  for (const json& p : j.at("poles")) {
    medtag::EstimatedPole ep;
    ep.alpha = p.at("alpha").get<double>();
    ep.omega = p.at("omega").get<double>();
    ep.residue = {p.value("residue_re", 0.0), p.value("residue_im", 0.0)};
    e.poles.push_back(ep);
  }
  e.order_used = e.poles.size();
  return e;
}

json classification_json(const medtag::Classification& c) {
  json j = {{"label", c.label}, {"distance", c.distance}};
  j["template_index"] = c.template_index ? json(*c.template_index) : json(nullptr);
  return j;
}

json alerts_json(const std::vector<medtag::Alert>& alerts) {
  json out = json::array();
  for (const medtag::Alert& a : alerts) out.push_back(medtag::io::to_json(a));
  return out;
}

std::unique_ptr<medtag::AlertSink> sink_from_json(const json& j) {
  const std::string type = j.value("type", std::string("stdout"));
  if (type == "stdout") return std::make_unique<medtag::StreamSink>(std::cout);
  if (type == "file") return std::make_unique<medtag::FileSink>(j.at("path").get<std::string>());
  if (type == "http") return std::make_unique<medtag::HttpSink>(j.at("url").get<std::string>(), j.value("timeout_s", 2.0));
  medtag::invalid("unknown sink type '" + type + "'");
}

}  // namespace

extern "C" {

const char* medtag_version(void) { return "1.0.0"; }

const char* medtag_last_error(void) { return g_last_error.c_str(); }

const char* medtag_status_string(medtag_status status) {
  switch (status) {
    case MEDTAG_OK:
      return "ok";
    case MEDTAG_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case MEDTAG_ERR_RUNTIME:
      return "runtime failure";
    case MEDTAG_ERR_IO:
      return "i/o error";
    case MEDTAG_ERR_NULL_POINTER:
      return "null pointer";
    case MEDTAG_ERR_OUT_OF_RANGE:
      return "index out of range";
  }
  return "unknown status";
}

void medtag_string_free(char* s) { std::free(s); }

// ---- signal model ----

medtag_status medtag_signature_from_json(const char* text, medtag_signature** out) {
  return guarded([&] {
    need(out, "out");
    auto sig = medtag::io::signature_from_json(medtag::io::parse(need(text, "json")));
    *out = new medtag_signature{std::move(sig)};
  });
}

medtag_status medtag_signature_reference(medtag_signature** out) {
  return guarded([&] { *need(out, "out") = new medtag_signature{medtag::reference_signature()}; });
}

medtag_status medtag_signature_event(int closed, medtag_signature** out) {
  return guarded([&] {
    need(out, "out");
    *out = new medtag_signature{closed != 0 ? medtag::default_closed_signature() : medtag::default_open_signature()};
  });
}

medtag_status medtag_signature_pole_count(const medtag_signature* sig, size_t* out) {
  return guarded([&] { *need(out, "out") = need(sig, "sig")->value.poles().size(); });
}

medtag_status medtag_signature_to_json(const medtag_signature* sig, char** out) {
  return guarded([&] { *need(out, "out") = dup_string(medtag::io::to_json(need(sig, "sig")->value).dump()); });
}

void medtag_signature_destroy(medtag_signature* sig) { delete sig; }

medtag_status medtag_synthesize_time(const medtag_signature* sig, const char* grid_json, medtag_time_signal** out) {
  return guarded([&] {
    need(out, "out");
    auto ts = medtag::synthesize_time(need(sig, "sig")->value, grid_arg(grid_json));
    *out = new medtag_time_signal{std::move(ts)};
  });
}

medtag_status medtag_time_signal_size(const medtag_time_signal* ts, size_t* out) {
  return guarded([&] { *need(out, "out") = need(ts, "ts")->value.samples.size(); });
}

medtag_status medtag_time_signal_sample(const medtag_time_signal* ts, size_t index, double* re, double* im) {
  return guarded([&] {
    const auto& s = need(ts, "ts")->value.samples;
    check_index(index, s.size());
    *need(re, "re") = s[index].real();
    *need(im, "im") = s[index].imag();
  });
}

medtag_status medtag_time_signal_to_csv(const medtag_time_signal* ts, char** out) {
  return guarded([&] { *need(out, "out") = dup_string(medtag::io::time_signal_csv(need(ts, "ts")->value)); });
}

void medtag_time_signal_destroy(medtag_time_signal* ts) { delete ts; }

medtag_status medtag_spectrum_dft(const medtag_time_signal* ts, int band_only, medtag_spectrum** out) {
  return guarded([&] {
    need(out, "out");
    const medtag::TimeSignal& t = need(ts, "ts")->value;
    const std::vector<double> freqs = band_only != 0 ? t.grid.band_bins() : t.grid.dft_bins();
    *out = new medtag_spectrum{medtag::dft_spectrum(t, freqs)};
  });
}

medtag_status medtag_spectrum_analytic(const medtag_signature* sig, const char* grid_json, int band_only,
                                       medtag_spectrum** out) {
  return guarded([&] {
    need(out, "out");
    const medtag::SamplingGrid grid = grid_arg(grid_json);
    grid.validate();
    const std::vector<double> freqs = band_only != 0 ? grid.band_bins() : grid.dft_bins();
    *out = new medtag_spectrum{medtag::analytic_spectrum(need(sig, "sig")->value, freqs)};
  });
}

medtag_status medtag_spectrum_from_csv(const char* csv, medtag_spectrum** out) {
  return guarded([&] {
    need(out, "out");
    *out = new medtag_spectrum{medtag::io::spectrum_from_csv(need(csv, "csv"))};
  });
}

medtag_status medtag_spectrum_to_csv(const medtag_spectrum* sp, char** out) {
  return guarded([&] { *need(out, "out") = dup_string(medtag::io::spectrum_csv(need(sp, "sp")->value)); });
}

medtag_status medtag_spectrum_size(const medtag_spectrum* sp, size_t* out) {
  return guarded([&] { *need(out, "out") = need(sp, "sp")->value.size(); });
}

medtag_status medtag_spectrum_bin(const medtag_spectrum* sp, size_t index, double* f_hz, double* re, double* im) {
  return guarded([&] {
    const medtag::Spectrum& s = need(sp, "sp")->value;
    check_index(index, s.size());
    *need(f_hz, "f_hz") = s.freqs[index];
    *need(re, "re") = s.values[index].real();
    *need(im, "im") = s.values[index].imag();
  });
}

medtag_status medtag_spectrum_apply_channel(const medtag_spectrum* sp, const char* channel_json,
                                            medtag_spectrum** out) {
  return guarded([&] {
    need(out, "out");
    const medtag::ChannelConfig cfg = medtag::io::channel_from_json(medtag::io::parse(need(channel_json, "channel_json")));
    *out = new medtag_spectrum{medtag::apply_channel(need(sp, "sp")->value, cfg)};
  });
}

medtag_status medtag_spectrum_inverse(const medtag_spectrum* sp, const char* grid_json, medtag_time_signal** out) {
  return guarded([&] {
    need(out, "out");
    *out = new medtag_time_signal{medtag::inverse_spectrum(need(sp, "sp")->value, grid_arg(grid_json))};
  });
}

void medtag_spectrum_destroy(medtag_spectrum* sp) { delete sp; }

// ---- decoders ----

medtag_status medtag_estimate_poles(const medtag_time_signal* ts, const char* mpm_json, char** estimate_json) {
  return guarded([&] {
    need(estimate_json, "estimate_json");
    const medtag::MpmConfig cfg = medtag::io::mpm_config_from_json(parse_optional(mpm_json));
    const medtag::PoleEstimate est = medtag::estimate_poles(need(ts, "ts")->value, cfg);
    *estimate_json = dup_string(medtag::io::to_json(est).dump());
  });
}

medtag_status medtag_mpm_error(const medtag_signature* truth, const char* estimate_json, double* out) {
  return guarded([&] {
    need(out, "out");
    const medtag::PoleEstimate est = estimate_from_json(medtag::io::parse(need(estimate_json, "estimate_json")));
    *out = medtag::mpm_error(need(truth, "truth")->value.poles(), est);
  });
}

medtag_status medtag_extract_pattern(const medtag_spectrum* sp, const char* extraction_json, char** pattern_json) {
  return guarded([&] {
    need(pattern_json, "pattern_json");
    const medtag::NotchPattern p = medtag::extract_pattern(need(sp, "sp")->value, extraction_arg(extraction_json));
    *pattern_json = dup_string(medtag::io::to_json(p).dump());
  });
}

medtag_status medtag_pattern_distance(const char* pattern_a_json, const char* pattern_b_json, double* out) {
  return guarded([&] {
    need(out, "out");
    const auto a = medtag::io::pattern_from_json(medtag::io::parse(need(pattern_a_json, "pattern_a_json")));
    const auto b = medtag::io::pattern_from_json(medtag::io::parse(need(pattern_b_json, "pattern_b_json")));
    *out = medtag::pattern_distance(a, b);
  });
}

medtag_status medtag_classify(const medtag_spectrum* sp, const char* templates_json, const char* extraction_json,
                              char** result_json) {
  return guarded([&] {
    need(result_json, "result_json");
    const auto templates = medtag::io::templates_from_json(medtag::io::parse(need(templates_json, "templates_json")));
    const medtag::NotchPattern p = medtag::extract_pattern(need(sp, "sp")->value, extraction_arg(extraction_json));
    json j = classification_json(medtag::classify(p, templates));
    j["pattern"] = medtag::io::to_json(p);
    *result_json = dup_string(j.dump());
  });
}

medtag_status medtag_code_templates(const medtag_signature* sig, const char* extraction_json, double accept_radius,
                                    char** templates_json) {
  return guarded([&] {
    need(templates_json, "templates_json");
    const auto templates = medtag::code_templates(need(sig, "sig")->value, medtag::default_grid(),
                                                  extraction_arg(extraction_json), accept_radius);
    json j = json::array();
    for (const auto& t : templates) j.push_back(medtag::io::to_json(t));
    *templates_json = dup_string(j.dump());
  });
}

medtag_status medtag_classify_state(const medtag_spectrum* sp, const char* tagset_json, const char* extraction_json,
                                    char** result_json) {
  return guarded([&] {
    need(result_json, "result_json");
    const json j = medtag::io::parse(need(tagset_json, "tagset_json"));
    medtag::TagTemplateSet set;
    set.tag_id = j.value("tag_id", std::string());
    set.open_template = medtag::io::template_from_json(j.at("open_template"));
    set.closed_template = medtag::io::template_from_json(j.at("closed_template"));
    if (j.contains("codebook")) set.codebook = j.at("codebook").get<std::map<std::string, std::string>>();
    set.validate();
    const auto [state, confidence] =
        medtag::classify_state(need(sp, "sp")->value, set, extraction_arg(extraction_json));
    *result_json = dup_string(json{{"state", medtag::to_string(state)}, {"confidence", confidence}}.dump());
  });
}

medtag_status medtag_decode_bits(const char* pattern_json, const char* slots_json, char** result_json) {
  return guarded([&] {
    need(result_json, "result_json");
    const auto pattern = medtag::io::pattern_from_json(medtag::io::parse(need(pattern_json, "pattern_json")));
    const json j = medtag::io::parse(need(slots_json, "slots_json"));
    const auto slots = j.at("slot_freqs_hz").get<std::vector<double>>();
    std::map<std::string, std::string> codebook;
    if (j.contains("codebook")) codebook = j.at("codebook").get<std::map<std::string, std::string>>();
    const medtag::DecodedBits d = medtag::decode_bits(pattern, codebook, slots, j.at("tolerance_hz").get<double>());
    json r = {{"bits", d.bit_string()}};
    r["code"] = d.code ? json(*d.code) : json(nullptr);
    *result_json = dup_string(r.dump());
  });
}

// ---- event stream ----

medtag_status medtag_debouncer_create(const char* tag_id, double hold_time_s, double unknown_grace_s,
                                      medtag_debouncer** out) {
  return guarded([&] {
    need(out, "out");
    medtag::DebounceConfig cfg{hold_time_s, unknown_grace_s};
    cfg.validate();
    *out = new medtag_debouncer{medtag::StreamState::start(need(tag_id, "tag_id")), cfg};
  });
}

medtag_status medtag_debouncer_advance(medtag_debouncer* d, const char* state, double confidence, double timestamp,
                                       char** event_json) {
  return guarded([&] {
    need(event_json, "event_json");
    *event_json = nullptr;
    need(d, "d");
    const medtag::Observation obs{medtag::parse_tag_state(need(state, "state")), confidence, timestamp};
    medtag::Advance step = medtag::advance(d->state, obs, d->cfg);
    d->state = std::move(step.state);
    if (step.event) *event_json = dup_string(medtag::io::to_json(*step.event).dump());
  });
}

void medtag_debouncer_destroy(medtag_debouncer* d) { delete d; }

// ---- eMAR ----

medtag_status medtag_emar_create(const char* schedule_json, medtag_emar** out) {
  return guarded([&] {
    need(out, "out");
    auto sched = medtag::io::schedule_from_json(medtag::io::parse(need(schedule_json, "schedule_json")));
    *out = new medtag_emar{std::move(sched), {}};
  });
}

medtag_status medtag_emar_evaluate_event(medtag_emar* emar, const char* event_json, double now, char** alerts_out) {
  return guarded([&] {
    need(alerts_out, "alerts_json");
    need(emar, "emar");
    const medtag::DrugEvent ev = medtag::io::event_from_json(medtag::io::parse(need(event_json, "event_json")));
    *alerts_out = dup_string(alerts_json(medtag::evaluate_event(ev, emar->schedule, emar->record, now)).dump());
  });
}

medtag_status medtag_emar_check_missed(medtag_emar* emar, double now, char** alerts_out) {
  return guarded([&] {
    need(alerts_out, "alerts_json");
    need(emar, "emar");
    *alerts_out = dup_string(alerts_json(medtag::check_missed(emar->schedule, emar->record, now)).dump());
  });
}

medtag_status medtag_emar_acknowledge(medtag_emar* emar, const char* alert_id, const char* responder, double time) {
  return guarded([&] {
    medtag::acknowledge(need(emar, "emar")->record, need(alert_id, "alert_id"), need(responder, "responder"), time);
  });
}

medtag_status medtag_emar_record_jsonl(const medtag_emar* emar, char** out) {
  return guarded([&] { *need(out, "out") = dup_string(medtag::io::record_jsonl(need(emar, "emar")->record)); });
}

medtag_status medtag_emar_alerts_json(const medtag_emar* emar, char** out) {
  return guarded([&] { *need(out, "out") = dup_string(alerts_json(need(emar, "emar")->record.alerts()).dump()); });
}

medtag_status medtag_emar_publish(const medtag_emar* emar, const char* alert_id, const char* sink_json,
                                  char** receipt_json) {
  return guarded([&] {
    need(receipt_json, "receipt_json");
    const auto alert = need(emar, "emar")->record.find_alert(need(alert_id, "alert_id"));
    if (!alert) medtag::invalid(std::string("no alert with id '") + alert_id + "'");
    const json cfg = medtag::io::parse(need(sink_json, "sink_json"));
    const auto sink = sink_from_json(cfg);
    const medtag::DeliveryReceipt r = medtag::publish(*alert, *sink, {cfg.value("max_attempts", 3)});
    *receipt_json = dup_string(
        json{{"alert_id", r.alert_id}, {"delivered", r.delivered}, {"attempt_count", r.attempt_count}}.dump());
  });
}

void medtag_emar_destroy(medtag_emar* emar) { delete emar; }

// ---- experiment harness ----

medtag_status medtag_sweep_run(const char* config_json, medtag_sweep_table** out) {
  return guarded([&] {
    need(out, "out");
    const medtag::SweepConfig cfg = medtag::sweep_config_from_json(parse_optional(config_json));
    *out = new medtag_sweep_table{medtag::run_sweep(cfg)};
  });
}

medtag_status medtag_sweep_table_rows(const medtag_sweep_table* t, size_t* out) {
  return guarded([&] { *need(out, "out") = need(t, "t")->value.rows.size(); });
}

medtag_status medtag_sweep_table_row(const medtag_sweep_table* t, size_t index, double* snr_db, size_t* trials,
                                     double* mpm_err_mean, double* mpm_err_std, double* pra_err_rate) {
  return guarded([&] {
    const auto& rows = need(t, "t")->value.rows;
    check_index(index, rows.size());
    const medtag::SweepRow& r = rows[index];
    if (snr_db != nullptr) *snr_db = r.snr_db;
    if (trials != nullptr) *trials = r.trials;
    if (mpm_err_mean != nullptr) *mpm_err_mean = r.mpm_err_mean;
    if (mpm_err_std != nullptr) *mpm_err_std = r.mpm_err_std;
    if (pra_err_rate != nullptr) *pra_err_rate = r.pra_err_rate;
  });
}

medtag_status medtag_sweep_table_csv(const medtag_sweep_table* t, char** out) {
  return guarded([&] { *need(out, "out") = dup_string(medtag::sweep_csv(need(t, "t")->value)); });
}

medtag_status medtag_sweep_table_export(const medtag_sweep_table* t, const char* path) {
  return guarded([&] { medtag::export_plotdata(need(t, "t")->value, need(path, "path")); });
}

void medtag_sweep_table_destroy(medtag_sweep_table* t) { delete t; }

medtag_status medtag_scenario_run(const char* script_json, const char* out_dir, const char* sink_json,
                                  char** summary_json) {
  return guarded([&] {
    need(summary_json, "summary_json");
    json j = medtag::io::parse(need(script_json, "script_json"));
    if (sink_json != nullptr) j["sink"] = medtag::io::parse(sink_json);
    const medtag::ScenarioScript script = medtag::scenario_from_json(j);
    const medtag::ScenarioResult result = medtag::run_scenario(script);
    if (out_dir != nullptr) medtag::write_scenario_outputs(result, out_dir);
    *summary_json = dup_string(result.summary().dump());
  });
}

medtag_status medtag_self_check(char** report_json, int* all_passed) {
  return guarded([&] {
    need(report_json, "report_json");
    need(all_passed, "all_passed");
    json j = json::array();
    bool ok = true;
    for (const medtag::CheckResult& c : medtag::run_self_checks()) {
      j.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit}});
      ok = ok && c.passed;
    }
    *report_json = dup_string(j.dump());
    *all_passed = ok ? 1 : 0;
  });
}

}  // extern "C"
