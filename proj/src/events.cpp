#include "medtag/events.hpp"

#include <array>
#include <cmath>
#include <string>

#include "medtag/error.hpp"

namespace medtag {

std::string_view to_string(TagState s) {
  switch (s) {
    case TagState::kOpen: return "OPEN";
    case TagState::kClosed: return "CLOSED";
    case TagState::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

TagState parse_tag_state(std::string_view s) {
  if (s == "OPEN") return TagState::kOpen;
  if (s == "CLOSED") return TagState::kClosed;
  if (s == "UNKNOWN") return TagState::kUnknown;
  invalid("unknown tag state '" + std::string(s) + "'");
}

std::string_view to_string(DrugEventKind k) { return k == DrugEventKind::kOpened ? "OPENED" : "CLOSED"; }

DrugEventKind parse_drug_event_kind(std::string_view s) {
  if (s == "OPENED") return DrugEventKind::kOpened;
  if (s == "CLOSED") return DrugEventKind::kClosed;
  invalid("unknown drug event kind '" + std::string(s) + "'");
}

void TagTemplateSet::validate() const {
  open_template.validate();
  closed_template.validate();
  const double d_open = pattern_distance(open_template.pattern, closed_template.pattern, open_template.params);
  const double d_closed = pattern_distance(open_template.pattern, closed_template.pattern, closed_template.params);
  if (!(d_open > open_template.accept_radius) || !(d_closed > closed_template.accept_radius)) {
    invalid("open and closed templates of tag '" + tag_id + "' overlap within their accept radii");
  }
}

void DebounceConfig::validate() const {
  if (!(hold_time >= 0.0) || !(unknown_grace >= 0.0)) invalid("debounce times must be >= 0");
}

StreamState StreamState::start(std::string tag_id, std::optional<TagState> initial) {
  StreamState s;
  s.tag_id = std::move(tag_id);
  if (initial && *initial != TagState::kUnknown) {
    s.stable = *initial;
    s.last_known = *initial;
  }
  return s;
}

std::string DecodedBits::bit_string() const {
  std::string out;
  out.reserve(bits.size());
  for (bool b : bits) out.push_back(b ? '1' : '0');
  return out;
}

std::pair<TagState, double> classify_state(const Spectrum& sp, const TagTemplateSet& templates,
                                           const ExtractionConfig& cfg) {
  const NotchPattern pattern = extract_pattern(sp, cfg);
  const std::array<PatternTemplate, 2> pair{templates.open_template, templates.closed_template};
  const Classification c = classify(pattern, pair);
  if (!c.known()) return {TagState::kUnknown, c.distance};
  return {*c.template_index == 0 ? TagState::kOpen : TagState::kClosed, c.distance};
}

Advance advance(const StreamState& state, const Observation& obs, const DebounceConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(obs.timestamp)) invalid("observation timestamp must be finite");
  if (state.last_time && obs.timestamp < *state.last_time) {
    invalid("observation time went backwards for tag '" + state.tag_id + "'");
  }
  Advance out{state, std::nullopt};
  StreamState& next = out.state;
  next.last_time = obs.timestamp;

  if (obs.state == TagState::kUnknown) {
    if (next.last_known_time && obs.timestamp - *next.last_known_time > cfg.unknown_grace) {
      next.stable = TagState::kUnknown;
      next.candidate.reset();
    }
    return out;
  }

  next.last_known_time = obs.timestamp;
  if (obs.state == next.stable) {
    next.candidate.reset();
    return out;
  }
  if (next.candidate != obs.state) {
    next.candidate = obs.state;
    next.candidate_since = obs.timestamp;
  }
  if (obs.timestamp - next.candidate_since < cfg.hold_time) return out;

  next.stable = obs.state;
  next.candidate.reset();
  if (next.last_known && *next.last_known != obs.state) {
    out.event = DrugEvent{next.tag_id, obs.state == TagState::kOpen ? DrugEventKind::kOpened : DrugEventKind::kClosed,
                          next.candidate_since, obs.confidence};
  }
  next.last_known = obs.state;
  return out;
}

DecodedBits decode_bits(const NotchPattern& pattern, const std::map<std::string, std::string>& codebook,
                        std::span<const double> slot_freqs, double slot_tolerance_hz) {
  for (std::size_t k = 1; k < slot_freqs.size(); ++k) {
    if (!(slot_freqs[k] > slot_freqs[k - 1])) invalid("slot frequencies must be strictly increasing");
  }
  if (!(slot_tolerance_hz >= 0.0)) invalid("slot tolerance must be >= 0");

  DecodedBits out;
  out.bits.assign(slot_freqs.size(), false);
  for (const Notch& n : pattern.notches()) {
    std::optional<std::size_t> slot;
    double best = slot_tolerance_hz;
    for (std::size_t k = 0; k < slot_freqs.size(); ++k) {
      const double gap = std::abs(n.f_hz - slot_freqs[k]);
      if (gap <= best) {
        best = gap;
        slot = k;
      }
    }
    if (!slot) continue;
    if (out.bits[*slot]) {
      invalid("ambiguous read: two notches fall in slot " + std::to_string(*slot));
    }
    out.bits[*slot] = true;
  }
  if (const auto it = codebook.find(out.bit_string()); it != codebook.end()) out.code = it->second;
  return out;
}

TagSignature default_open_signature() {
  const double alpha_open = 2.0 * kPi * 1e8;
  return TagSignature("open", {Pole(alpha_open, 2.0 * kPi * 1.2e9)});
}

TagSignature default_closed_signature() {
  const double alpha_open = 2.0 * kPi * 1e8;
  return TagSignature("closed", {Pole(0.6 * alpha_open, 2.0 * kPi * 1.6e9)});
}

}  // namespace medtag
