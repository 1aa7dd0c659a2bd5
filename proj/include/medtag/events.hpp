#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medtag/pra.hpp"
#include "medtag/sem.hpp"

namespace medtag {

enum class TagState { kOpen, kClosed, kUnknown };

std::string_view to_string(TagState s);
TagState parse_tag_state(std::string_view s);

/// Open/closed event signatures of one container, plus an optional codebook
/// from bit strings ("101") to code words.
struct TagTemplateSet {
  std::string tag_id;
  PatternTemplate open_template;
  PatternTemplate closed_template;
  std::map<std::string, std::string> codebook;

  /// Throws unless the two templates are farther apart than both radii.
  void validate() const;
};

enum class DrugEventKind { kOpened, kClosed };

std::string_view to_string(DrugEventKind k);
DrugEventKind parse_drug_event_kind(std::string_view s);

struct DrugEvent {
  std::string tag_id;
  DrugEventKind kind = DrugEventKind::kOpened;
  double timestamp = 0.0;
  double confidence = 0.0;

  bool operator==(const DrugEvent&) const = default;
};

struct DebounceConfig {
  double hold_time = 0.5;
  double unknown_grace = 1.0;

  void validate() const;
};

struct Observation {
  TagState state = TagState::kUnknown;
  double confidence = 0.0;
  double timestamp = 0.0;
};

/// Per-tag debouncer state. Value type; advance() returns the successor.
struct StreamState {
  std::string tag_id;
  /// Debounced state. Starts UNKNOWN; the first settled state is adopted
  /// without an event.
  TagState stable = TagState::kUnknown;
  /// Last settled OPEN/CLOSED state; events fire only when this changes.
  std::optional<TagState> last_known;
  std::optional<TagState> candidate;
  double candidate_since = 0.0;
  std::optional<double> last_time;
  std::optional<double> last_known_time;

  static StreamState start(std::string tag_id, std::optional<TagState> initial = std::nullopt);
};

struct Advance {
  StreamState state;
  std::optional<DrugEvent> event;
};

struct DecodedBits {
  std::vector<bool> bits;
  std::optional<std::string> code;

  std::string bit_string() const;
};

std::pair<TagState, double> classify_state(const Spectrum& sp, const TagTemplateSet& templates,
                                           const ExtractionConfig& cfg);

/// Deterministic debounce step. Throws when the observation time goes backwards.
Advance advance(const StreamState& state, const Observation& obs, const DebounceConfig& cfg);

/// Bit k is set iff a notch lies within slot_tolerance_hz of slot_freqs[k].
/// Throws if two notches claim one slot.
DecodedBits decode_bits(const NotchPattern& pattern, const std::map<std::string, std::string>& codebook,
                        std::span<const double> slot_freqs, double slot_tolerance_hz);

/// Default synthetic event signatures: open at 1.2 GHz, closed at 1.6 GHz with
/// 0.6x the open damping.
TagSignature default_open_signature();
TagSignature default_closed_signature();

}  // namespace medtag
