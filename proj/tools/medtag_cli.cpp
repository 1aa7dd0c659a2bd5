// medtag command-line harness. Talks to the library only through medtag.h.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "medtag.h"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;
constexpr const char* kSinkEnv = "MEDTAG_ALERT_SINK_URL";

struct CliFailure {
  int code;
  std::string message;
};

[[noreturn]] void bad_config(const std::string& msg) { throw CliFailure{kExitInvalid, msg}; }

void check(medtag_status s) {
  if (s == MEDTAG_OK) return;
  const int code = (s == MEDTAG_ERR_RUNTIME || s == MEDTAG_ERR_IO) ? kExitRuntime : kExitInvalid;
  throw CliFailure{code, medtag_last_error()};
}

// Owns a string handed out by the library.
class LibString {
 public:
  LibString() = default;
  LibString(const LibString&) = delete;
  LibString& operator=(const LibString&) = delete;
  ~LibString() { medtag_string_free(p_); }

  char** out() { return &p_; }
  bool empty() const { return p_ == nullptr; }
  std::string str() const { return p_ == nullptr ? std::string() : std::string(p_); }

 private:
  char* p_ = nullptr;
};

template <typename T, void (*Destroy)(T*)>
class Handle {
 public:
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Destroy(p_); }

  T** out() { return &p_; }
  T* get() const { return p_; }

 private:
  T* p_ = nullptr;
};

using Signature = Handle<medtag_signature, medtag_signature_destroy>;
using TimeSignal = Handle<medtag_time_signal, medtag_time_signal_destroy>;
using Spectrum = Handle<medtag_spectrum, medtag_spectrum_destroy>;
using SweepTable = Handle<medtag_sweep_table, medtag_sweep_table_destroy>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_config("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    bad_config(path + ": " + e.what());
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw CliFailure{kExitRuntime, "cannot write '" + path + "'"};
}

const char* optional_cstr(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

std::string optional_json_file(const std::string& path) { return path.empty() ? std::string() : read_json(path).dump(); }

void load_signature(const std::string& file, const std::string& builtin, Signature& sig) {
  if (!file.empty()) {
    check(medtag_signature_from_json(read_json(file).dump().c_str(), sig.out()));
  } else if (builtin == "reference") {
    check(medtag_signature_reference(sig.out()));
  } else if (builtin == "open" || builtin == "closed") {
    check(medtag_signature_event(builtin == "closed" ? 1 : 0, sig.out()));
  } else {
    bad_config("unknown built-in signature '" + builtin + "' (reference, open, closed)");
  }
}

// ---- synth ----

struct SynthOptions {
  std::string signature_file;
  std::string builtin = "reference";
  std::string grid_file;
  std::string domain = "spectrum";
  bool band_only = false;
  std::string channel_file;
  std::optional<double> snr_db;
  std::optional<double> phase_noise_deg;
  std::optional<std::uint64_t> seed;
  std::string output;
};

bool wants_channel(const SynthOptions& o) {
  return !o.channel_file.empty() || o.snr_db || o.phase_noise_deg || o.seed;
}

int run_synth(const SynthOptions& o) {
  Signature sig;
  load_signature(o.signature_file, o.builtin, sig);
  const std::string grid = optional_json_file(o.grid_file);

  if (o.domain == "time") {
    if (wants_channel(o)) bad_config("channel options apply to spectra, not time signals");
    TimeSignal ts;
    check(medtag_synthesize_time(sig.get(), optional_cstr(grid), ts.out()));
    LibString csv;
    check(medtag_time_signal_to_csv(ts.get(), csv.out()));
    write_output(o.output, csv.str());
    return kExitOk;
  }

  Spectrum clean;
  if (o.domain == "spectrum") {
    TimeSignal ts;
    check(medtag_synthesize_time(sig.get(), optional_cstr(grid), ts.out()));
    check(medtag_spectrum_dft(ts.get(), o.band_only ? 1 : 0, clean.out()));
  } else if (o.domain == "analytic") {
    check(medtag_spectrum_analytic(sig.get(), optional_cstr(grid), o.band_only ? 1 : 0, clean.out()));
  } else {
    bad_config("unknown domain '" + o.domain + "' (time, spectrum, analytic)");
  }

  const medtag_spectrum* result = clean.get();
  Spectrum noisy;
  if (wants_channel(o)) {
    json ch = o.channel_file.empty() ? json::object() : read_json(o.channel_file);
    if (o.snr_db) ch["snr_db"] = *o.snr_db;
    if (o.phase_noise_deg) ch["phase_noise_deg"] = *o.phase_noise_deg;
    if (o.seed) ch["seed"] = *o.seed;
    check(medtag_spectrum_apply_channel(clean.get(), ch.dump().c_str(), noisy.out()));
    result = noisy.get();
  }
  LibString csv;
  check(medtag_spectrum_to_csv(result, csv.out()));
  write_output(o.output, csv.str());
  return kExitOk;
}

// ---- sweep ----

struct SweepOptions {
  std::string config_file;
  std::vector<double> snr_grid;
  std::optional<double> phase_noise_deg;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string output;
};

int run_sweep(const SweepOptions& o) {
  json cfg = o.config_file.empty() ? json::object() : read_json(o.config_file);
  if (!o.snr_grid.empty()) cfg["snr_grid"] = o.snr_grid;
  if (o.phase_noise_deg) cfg["phase_noise_deg"] = *o.phase_noise_deg;
  if (o.trials) cfg["trials_per_point"] = *o.trials;
  if (o.seed) cfg["master_seed"] = *o.seed;
  if (o.threads) cfg["threads"] = *o.threads;

  SweepTable table;
  check(medtag_sweep_run(cfg.dump().c_str(), table.out()));
  if (o.output.empty() || o.output == "-") {
    LibString csv;
    check(medtag_sweep_table_csv(table.get(), csv.out()));
    std::cout << csv.str();
  } else {
    check(medtag_sweep_table_export(table.get(), o.output.c_str()));
    std::cerr << "wrote " << o.output << "\n";
  }
  return kExitOk;
}

// ---- classify ----

struct ClassifyOptions {
  std::string spectrum_file;
  std::string templates_file;
  std::string tagset_file;
  std::string slots_file;
  std::string code_signature_file;
  std::string code_builtin;
  double code_radius = 5.0;
  std::string extraction_file;
};

int run_classify(const ClassifyOptions& o) {
  const int modes = (o.templates_file.empty() ? 0 : 1) + (o.tagset_file.empty() ? 0 : 1) +
                    (o.code_builtin.empty() && o.code_signature_file.empty() ? 0 : 1);
  if (modes > 1) bad_config("choose one of --templates, --tagset or --codes");

  Spectrum sp;
  check(medtag_spectrum_from_csv(read_file(o.spectrum_file).c_str(), sp.out()));
  const std::string extraction = optional_json_file(o.extraction_file);

  json out;
  LibString pattern;
  check(medtag_extract_pattern(sp.get(), optional_cstr(extraction), pattern.out()));
  out["pattern"] = json::parse(pattern.str());

  if (!o.tagset_file.empty()) {
    LibString res;
    check(medtag_classify_state(sp.get(), read_json(o.tagset_file).dump().c_str(), optional_cstr(extraction),
                                res.out()));
    const json r = json::parse(res.str());
    out["state"] = r.at("state");
    out["confidence"] = r.at("confidence");
  } else {
    std::string templates;
    if (!o.templates_file.empty()) {
      templates = read_json(o.templates_file).dump();
    } else {
      Signature sig;
      load_signature(o.code_signature_file, o.code_builtin.empty() ? "reference" : o.code_builtin, sig);
      LibString t;
      check(medtag_code_templates(sig.get(), optional_cstr(extraction), o.code_radius, t.out()));
      templates = t.str();
    }
    LibString res;
    check(medtag_classify(sp.get(), templates.c_str(), optional_cstr(extraction), res.out()));
    const json r = json::parse(res.str());
    out["label"] = r.at("label");
    out["distance"] = r.at("distance");
    out["template_index"] = r.at("template_index");
  }

  if (!o.slots_file.empty()) {
    LibString bits;
    check(medtag_decode_bits(pattern.str().c_str(), read_json(o.slots_file).dump().c_str(), bits.out()));
    out["bits"] = json::parse(bits.str());
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

// ---- simulate ----

struct SimulateOptions {
  std::string script_file;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string sink_url;
  std::string sink_file;
  bool sink_stdout = false;
  bool no_sink = false;
  std::optional<int> max_attempts;
};

int run_simulate(const SimulateOptions& o) {
  json script = read_json(o.script_file);
  if (o.seed) {
    if (!script.contains("channel")) script["channel"] = json::object();
    script["channel"]["seed"] = *o.seed;
  }

  const int chosen = (o.sink_url.empty() ? 0 : 1) + (o.sink_file.empty() ? 0 : 1) + (o.sink_stdout ? 1 : 0) +
                     (o.no_sink ? 1 : 0);
  if (chosen > 1) bad_config("choose at most one sink option");

  std::optional<json> sink;
  if (o.no_sink) {
    sink = json{{"type", "none"}};
  } else if (!o.sink_url.empty()) {
    sink = json{{"type", "http"}, {"url", o.sink_url}};
  } else if (!o.sink_file.empty()) {
    sink = json{{"type", "file"}, {"path", o.sink_file}};
  } else if (o.sink_stdout) {
    sink = json{{"type", "stdout"}};
  } else if (!script.contains("sink")) {
    if (const char* env = std::getenv(kSinkEnv); env != nullptr && *env != '\0') {
      sink = json{{"type", "http"}, {"url", env}};
    }
  }
  if (sink && o.max_attempts) (*sink)["max_attempts"] = *o.max_attempts;
  if (!sink && o.max_attempts) {
    sink = script.value("sink", json::object());
    (*sink)["max_attempts"] = *o.max_attempts;
  }

  const std::string sink_text = sink ? sink->dump() : std::string();
  LibString summary;
  check(medtag_scenario_run(script.dump().c_str(), optional_cstr(o.out_dir), optional_cstr(sink_text),
                            summary.out()));
  std::cout << json::parse(summary.str()).dump(2) << "\n";
  return kExitOk;
}

// ---- check ----

int run_check() {
  LibString report;
  int all_passed = 0;
  check(medtag_self_check(report.out(), &all_passed));
  for (const json& c : json::parse(report.str())) {
    std::printf("%s  %-40s value=%.6g limit=%.6g\n", c.at("passed").get<bool>() ? "PASS" : "FAIL",
                c.at("name").get<std::string>().c_str(), c.at("value").get<double>(), c.at("limit").get<double>());
  }
  return all_passed != 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chipless RFID tag decoding and medication-event harness"};
  app.set_version_flag("--version", medtag_version());
  app.require_subcommand(1);

  SynthOptions synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Emit a tag's time signal or spectrum as CSV");
  synth_cmd->add_option("--signature", synth.signature_file, "Signature JSON file")->check(CLI::ExistingFile);
  synth_cmd->add_option("--builtin", synth.builtin, "Built-in signature: reference, open or closed")
      ->capture_default_str();
  synth_cmd->add_option("--grid", synth.grid_file, "Sampling grid JSON file")->check(CLI::ExistingFile);
  synth_cmd->add_option("--domain", synth.domain, "time, spectrum (discrete) or analytic")->capture_default_str();
  synth_cmd->add_flag("--band", synth.band_only, "Only bins inside the sweep band");
  synth_cmd->add_option("--channel", synth.channel_file, "Channel JSON file")->check(CLI::ExistingFile);
  synth_cmd->add_option("--snr", synth.snr_db, "AWGN SNR in dB");
  synth_cmd->add_option("--phase-noise", synth.phase_noise_deg, "Uniform phase noise half-range, degrees");
  synth_cmd->add_option("--seed", synth.seed, "Channel seed");
  synth_cmd->add_option("-o,--output", synth.output, "Output CSV (default stdout)");

  SweepOptions sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo SNR sweep of both decoders");
  sweep_cmd->add_option("--config", sweep.config_file, "Sweep config JSON file")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--snr", sweep.snr_grid, "SNR grid in dB")->delimiter(',');
  sweep_cmd->add_option("--phase-noise", sweep.phase_noise_deg, "Uniform phase noise half-range, degrees");
  sweep_cmd->add_option("--trials", sweep.trials, "Trials per SNR point");
  sweep_cmd->add_option("--seed", sweep.seed, "Master seed");
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)");
  sweep_cmd->add_option("-o,--output", sweep.output, "CSV path; a .manifest.json is written next to it");

  ClassifyOptions cls;
  CLI::App* cls_cmd = app.add_subcommand("classify", "Classify one spectrum CSV");
  cls_cmd->add_option("spectrum", cls.spectrum_file, "Spectrum CSV (f_hz,re,im[,abs])")
      ->required()
      ->check(CLI::ExistingFile);
  cls_cmd->add_option("--templates", cls.templates_file, "Template list JSON file")->check(CLI::ExistingFile);
  cls_cmd->add_option("--tagset", cls.tagset_file, "Open/closed template set JSON file")->check(CLI::ExistingFile);
  cls_cmd->add_option("--codes", cls.code_builtin, "Bit-code templates from a built-in signature");
  cls_cmd->add_option("--code-signature", cls.code_signature_file, "Bit-code templates from a signature file")
      ->check(CLI::ExistingFile);
  cls_cmd->add_option("--code-radius", cls.code_radius, "Accept radius of bit-code templates")->capture_default_str();
  cls_cmd->add_option("--slots", cls.slots_file, "Bit-slot JSON {slot_freqs_hz, tolerance_hz, codebook}")
      ->check(CLI::ExistingFile);
  cls_cmd->add_option("--extraction", cls.extraction_file, "Extraction config JSON file")->check(CLI::ExistingFile);

  SimulateOptions sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run a bottle scenario end to end");
  sim_cmd->add_option("script", sim.script_file, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--out-dir", sim.out_dir, "Directory for events.jsonl, record.jsonl, alerts.json, summary.json");
  sim_cmd->add_option("--seed", sim.seed, "Override the channel seed");
  sim_cmd->add_option("--sink-url", sim.sink_url, std::string("POST alerts to this URL (default $") + kSinkEnv + ")");
  sim_cmd->add_option("--sink-file", sim.sink_file, "Append alerts to this JSONL file");
  sim_cmd->add_flag("--sink-stdout", sim.sink_stdout, "Print alerts to stdout");
  sim_cmd->add_flag("--no-sink", sim.no_sink, "Do not publish alerts");
  sim_cmd->add_option("--max-attempts", sim.max_attempts, "Delivery attempts per alert");

  app.add_subcommand("check", "Run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*cls_cmd) return run_classify(cls);
    if (*sim_cmd) return run_simulate(sim);
    return run_check();
  } catch (const CliFailure& f) {
    std::cerr << "medtag: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "medtag: " << e.what() << "\n";
    return kExitRuntime;
  }
}
