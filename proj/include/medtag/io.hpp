#pragma once

// JSON and CSV formats for every persisted or exchanged object.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "medtag/channel.hpp"
#include "medtag/emar.hpp"
#include "medtag/events.hpp"
#include "medtag/mpm.hpp"
#include "medtag/pra.hpp"
#include "medtag/sem.hpp"

namespace medtag::io {

using json = nlohmann::json;

/// Parses text as JSON, turning parse failures into invalid-argument errors.
json parse(const std::string& text);
json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
/// Throws an I/O error when the file cannot be written.
void write_text_file(const std::string& path, const std::string& text);

// {label, poles: [{alpha, omega, residue_re, residue_im}]}
json to_json(const TagSignature& s);
TagSignature signature_from_json(const json& j);

// {dt_s, n_samples, f_start_hz, f_stop_hz}; missing keys keep defaults.
json to_json(const SamplingGrid& g);
SamplingGrid grid_from_json(const json& j);

// {snr_db (number or null), phase_noise_deg, seed}
json to_json(const ChannelConfig& c);
ChannelConfig channel_from_json(const json& j);

// {pencil_param, order | threshold, engine: "full" | "truncated"}
MpmConfig mpm_config_from_json(const json& j);
// {poles: [{alpha, omega, residue_re, residue_im}], order_used, singular_values, ill_conditioned}
json to_json(const PoleEstimate& e);

// {prominence_floor_db, width_level_db, relative_level_db, band: [lo, hi], polarity}
json to_json(const ExtractionConfig& c);
ExtractionConfig extraction_from_json(const json& j);

json to_json(const NotchPattern& p);
NotchPattern pattern_from_json(const json& notches);

// {label, notches: [{f_hz, w_hz, d_db}], weights: [wf, ww, wd], accept_radius}
// Optional: scales: [f_hz, w_hz, d_db], miss_penalty.
json to_json(const PatternTemplate& t);
PatternTemplate template_from_json(const json& j);
std::vector<PatternTemplate> templates_from_json(const json& j);

// {ts, tag_id, kind, confidence}
json to_json(const DrugEvent& e);
DrugEvent event_from_json(const json& j);

DebounceConfig debounce_from_json(const json& j);

// {tag_id, patient_id, dose_times, window_before_s, window_after_s,
//  max_cycles_per_window, cycle_window_s}
json to_json(const PrescriptionSchedule& s);
PrescriptionSchedule schedule_from_json(const json& j);

// Wire format {alert_id, kind, tag_id, patient_id, ts, message}.
json alert_wire_json(const Alert& a);
// Wire format plus dose_index and acknowledged when present.
json to_json(const Alert& a);

json to_json(const RecordEntry& e);
/// One JSON object per line.
std::string record_jsonl(const AdministrationRecord& rec);
std::string events_jsonl(const std::vector<DrugEvent>& events);

// CSV with header "t_s,re,im,abs" / "f_hz,re,im,abs".
std::string time_signal_csv(const TimeSignal& ts);
std::string spectrum_csv(const Spectrum& sp);
Spectrum spectrum_from_csv(const std::string& text);

/// Shortest round-trip formatting of a double, locale independent.
std::string format_double(double v);

}  // namespace medtag::io
