#include "medtag/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "medtag/error.hpp"

namespace medtag::io {
namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

// Wraps nlohmann type errors so callers see one error family.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    invalid(std::string("malformed ") + what + ": " + e.what());
  }
}

json pole_json(double alpha, double omega, complex r) {
  return {{"alpha", alpha}, {"omega", omega}, {"residue_re", r.real()}, {"residue_im", r.imag()}};
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (end[-1] == ' ' || end[-1] == '\r' || end[-1] == '\t')) --end;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) invalid("not a number in CSV: '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    invalid(std::string("invalid JSON: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) { return parse(read_text_file(path)); }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

json to_json(const TagSignature& s) {
  json poles = json::array();
  for (const Pole& p : s.poles()) poles.push_back(pole_json(p.alpha(), p.omega(), p.residue()));
  return {{"label", s.label()}, {"poles", poles}};
}

TagSignature signature_from_json(const json& j) {
  return guarded("signature", [&] {
    std::vector<Pole> poles;
    for (const json& p : j.at("poles")) {
      poles.emplace_back(p.at("alpha").get<double>(), p.at("omega").get<double>(),
                         complex(get_or(p, "residue_re", 1.0), get_or(p, "residue_im", 0.0)));
    }
    return TagSignature(get_or<std::string>(j, "label", "signature"), std::move(poles));
  });
}

json to_json(const SamplingGrid& g) {
  return {{"dt_s", g.dt}, {"n_samples", g.n_samples}, {"f_start_hz", g.f_start}, {"f_stop_hz", g.f_stop}};
}

SamplingGrid grid_from_json(const json& j) {
  return guarded("grid", [&] {
    SamplingGrid g;
    g.dt = get_or(j, "dt_s", g.dt);
    g.n_samples = get_or(j, "n_samples", g.n_samples);
    g.f_start = get_or(j, "f_start_hz", g.f_start);
    g.f_stop = get_or(j, "f_stop_hz", g.f_stop);
    g.validate();
    return g;
  });
}

json to_json(const ChannelConfig& c) {
  return {{"snr_db", c.snr_db ? json(*c.snr_db) : json(nullptr)},
          {"phase_noise_deg", c.phase_noise_deg},
          {"seed", c.seed}};
}

ChannelConfig channel_from_json(const json& j) {
  return guarded("channel config", [&] {
    ChannelConfig c;
    if (j.contains("snr_db") && !j.at("snr_db").is_null()) {
      if (j.at("snr_db").is_string() && j.at("snr_db").get<std::string>() == "none") {
        c.snr_db.reset();
      } else {
        c.snr_db = j.at("snr_db").get<double>();
      }
    }
    c.phase_noise_deg = get_or(j, "phase_noise_deg", 0.0);
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.validate();
    return c;
  });
}

MpmConfig mpm_config_from_json(const json& j) {
  return guarded("MPM config", [&] {
    MpmConfig c;
    c.pencil_param = get_or<std::size_t>(j, "pencil_param", 0);
    if (j.contains("order") && !j.at("order").is_null()) c.order = j.at("order").get<std::size_t>();
    c.threshold = get_or(j, "threshold", c.threshold);
    const std::string engine = get_or<std::string>(j, "engine", "truncated");
    if (engine == "full") {
      c.engine = SvdEngine::kFull;
    } else if (engine == "truncated") {
      c.engine = SvdEngine::kTruncated;
    } else {
      invalid("unknown SVD engine '" + engine + "'");
    }
    return c;
  });
}

json to_json(const PoleEstimate& e) {
  json poles = json::array();
  for (const EstimatedPole& p : e.poles) poles.push_back(pole_json(p.alpha, p.omega, p.residue));
  return {{"poles", poles},
          {"order_used", e.order_used},
          {"singular_values", e.singular_values},
          {"ill_conditioned", e.ill_conditioned}};
}

json to_json(const ExtractionConfig& c) {
  return {{"prominence_floor_db", c.prominence_floor_db},
          {"width_level_db", c.width_level_db},
          {"relative_level_db", c.relative_level_db},
          {"band", {c.f_lo, c.f_hi}},
          {"polarity", c.polarity == Polarity::kPeak ? "peak" : "dip"}};
}

ExtractionConfig extraction_from_json(const json& j) {
  return guarded("extraction config", [&] {
    ExtractionConfig c;
    c.prominence_floor_db = get_or(j, "prominence_floor_db", c.prominence_floor_db);
    c.width_level_db = get_or(j, "width_level_db", c.width_level_db);
    c.relative_level_db = get_or(j, "relative_level_db", c.relative_level_db);
    if (j.contains("band")) {
      c.f_lo = j.at("band").at(0).get<double>();
      c.f_hi = j.at("band").at(1).get<double>();
    }
    const std::string polarity = get_or<std::string>(j, "polarity", "peak");
    if (polarity == "peak") {
      c.polarity = Polarity::kPeak;
    } else if (polarity == "dip") {
      c.polarity = Polarity::kDip;
    } else {
      invalid("polarity must be 'peak' or 'dip'");
    }
    c.validate();
    return c;
  });
}

json to_json(const NotchPattern& p) {
  json out = json::array();
  for (const Notch& n : p.notches()) out.push_back({{"f_hz", n.f_hz}, {"w_hz", n.w_hz}, {"d_db", n.d_db}});
  return out;
}

NotchPattern pattern_from_json(const json& notches) {
  return guarded("notch list", [&] {
    std::vector<Notch> out;
    for (const json& n : notches) {
      out.push_back({n.at("f_hz").get<double>(), n.at("w_hz").get<double>(), n.at("d_db").get<double>()});
    }
    return NotchPattern(std::move(out));
  });
}

json to_json(const PatternTemplate& t) {
  const DistanceParams& p = t.params;
  return {{"label", t.label},
          {"notches", to_json(t.pattern)},
          {"weights", {p.weights.f, p.weights.w, p.weights.d}},
          {"scales", {p.scales.f_hz, p.scales.w_hz, p.scales.d_db}},
          {"miss_penalty", p.miss_penalty},
          {"accept_radius", t.accept_radius}};
}

PatternTemplate template_from_json(const json& j) {
  return guarded("template", [&] {
    PatternTemplate t;
    t.label = j.at("label").get<std::string>();
    t.pattern = pattern_from_json(j.at("notches"));
    if (j.contains("weights")) {
      const json& w = j.at("weights");
      t.params.weights = {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>()};
    }
    if (j.contains("scales")) {
      const json& s = j.at("scales");
      t.params.scales = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
    }
    t.params.miss_penalty = get_or(j, "miss_penalty", t.params.miss_penalty);
    t.accept_radius = j.at("accept_radius").get<double>();
    t.validate();
    return t;
  });
}

std::vector<PatternTemplate> templates_from_json(const json& j) {
  if (!j.is_array()) invalid("templates file must hold a JSON list");
  std::vector<PatternTemplate> out;
  for (const json& t : j) out.push_back(template_from_json(t));
  return out;
}

json to_json(const DrugEvent& e) {
  return {{"ts", e.timestamp}, {"tag_id", e.tag_id}, {"kind", to_string(e.kind)}, {"confidence", e.confidence}};
}

DrugEvent event_from_json(const json& j) {
  return guarded("drug event", [&] {
    DrugEvent e;
    e.timestamp = j.at("ts").get<double>();
    e.tag_id = j.at("tag_id").get<std::string>();
    e.kind = parse_drug_event_kind(j.at("kind").get<std::string>());
    e.confidence = get_or(j, "confidence", 0.0);
    return e;
  });
}

DebounceConfig debounce_from_json(const json& j) {
  return guarded("debounce config", [&] {
    DebounceConfig c;
    c.hold_time = get_or(j, "hold_time_s", c.hold_time);
    c.unknown_grace = get_or(j, "unknown_grace_s", c.unknown_grace);
    c.validate();
    return c;
  });
}

json to_json(const PrescriptionSchedule& s) {
  return {{"tag_id", s.tag_id},
          {"patient_id", s.patient_id},
          {"dose_times", s.dose_times},
          {"window_before_s", s.window_before},
          {"window_after_s", s.window_after},
          {"max_cycles_per_window", s.max_cycles_per_window},
          {"cycle_window_s", s.cycle_window}};
}

PrescriptionSchedule schedule_from_json(const json& j) {
  return guarded("schedule", [&] {
    PrescriptionSchedule s;
    s.tag_id = j.at("tag_id").get<std::string>();
    s.patient_id = j.at("patient_id").get<std::string>();
    s.dose_times = j.at("dose_times").get<std::vector<double>>();
    s.window_before = get_or(j, "window_before_s", 0.0);
    s.window_after = get_or(j, "window_after_s", 0.0);
    s.max_cycles_per_window = get_or(j, "max_cycles_per_window", 1);
    s.cycle_window = get_or(j, "cycle_window_s", 300.0);
    s.validate();
    return s;
  });
}

json alert_wire_json(const Alert& a) {
  return {{"alert_id", a.alert_id}, {"kind", to_string(a.kind)}, {"tag_id", a.tag_id},
          {"patient_id", a.patient_id}, {"ts", a.timestamp}, {"message", a.message}};
}

json to_json(const Alert& a) {
  json j = alert_wire_json(a);
  if (a.dose_index) j["dose_index"] = *a.dose_index;
  if (a.acknowledged) j["acknowledged"] = {{"time", a.acknowledged->time}, {"responder", a.acknowledged->responder}};
  return j;
}

json to_json(const RecordEntry& e) {
  json j = {{"seq", e.seq}, {"recorded_at", e.recorded_at}};
  if (const auto* ev = std::get_if<EventEntry>(&e.body)) {
    j["type"] = "event";
    j["event"] = to_json(ev->event);
    j["outcomes"] = ev->outcomes;
    j["alert_ids"] = ev->alert_ids;
  } else if (const auto* al = std::get_if<AlertEntry>(&e.body)) {
    j["type"] = "alert";
    j["alert"] = to_json(al->alert);
  } else if (const auto* ack = std::get_if<AckEntry>(&e.body)) {
    j["type"] = "ack";
    j["alert_id"] = ack->alert_id;
    j["time"] = ack->ack.time;
    j["responder"] = ack->ack.responder;
  }
  return j;
}

std::string record_jsonl(const AdministrationRecord& rec) {
  std::string out;
  for (const RecordEntry& e : rec.entries()) out += to_json(e).dump() + "\n";
  return out;
}

std::string events_jsonl(const std::vector<DrugEvent>& events) {
  std::string out;
  for (const DrugEvent& e : events) out += to_json(e).dump() + "\n";
  return out;
}

std::string time_signal_csv(const TimeSignal& ts) {
  std::string out = "t_s,re,im,abs\n";
  for (std::size_t k = 0; k < ts.samples.size(); ++k) {
    const complex v = ts.samples[k];
    out += format_double(static_cast<double>(k) * ts.grid.dt) + "," + format_double(v.real()) + "," +
           format_double(v.imag()) + "," + format_double(std::abs(v)) + "\n";
  }
  return out;
}

std::string spectrum_csv(const Spectrum& sp) {
  std::string out = "f_hz,re,im,abs\n";
  for (std::size_t m = 0; m < sp.size(); ++m) {
    const complex v = sp.values[m];
    out += format_double(sp.freqs[m]) + "," + format_double(v.real()) + "," + format_double(v.imag()) + "," +
           format_double(std::abs(v)) + "\n";
  }
  return out;
}

Spectrum spectrum_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) invalid("empty spectrum CSV");
  const auto header = split_line(line);
  if (header.size() < 3 || header[0] != "f_hz" || header[1] != "re" || header[2] != "im") {
    invalid("spectrum CSV must start with header f_hz,re,im[,abs]");
  }
  Spectrum sp;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() < 3) invalid("spectrum CSV row has fewer than 3 columns");
    sp.freqs.push_back(parse_double(cells[0]));
    sp.values.emplace_back(parse_double(cells[1]), parse_double(cells[2]));
  }
  sp.validate();
  return sp;
}

}  // namespace medtag::io
