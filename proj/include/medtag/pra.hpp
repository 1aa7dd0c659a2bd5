#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medtag/sem.hpp"

namespace medtag {

/// One spectral notch feature: location, width and depth.
struct Notch {
  double f_hz = 0.0;
  double w_hz = 0.0;
  double d_db = 0.0;

  bool operator==(const Notch&) const = default;
};

/// Notch features sorted by ascending frequency.
class NotchPattern {
 public:
  NotchPattern() = default;
  explicit NotchPattern(std::vector<Notch> notches);

  const std::vector<Notch>& notches() const noexcept { return notches_; }
  std::size_t size() const noexcept { return notches_.size(); }
  bool empty() const noexcept { return notches_.empty(); }

  bool operator==(const NotchPattern&) const = default;

 private:
  std::vector<Notch> notches_;
};

enum class Polarity { kPeak, kDip };

struct ExtractionConfig {
  /// Minimum topographic prominence of an extremum, dB.
  double prominence_floor_db = 3.0;
  /// Width is measured this many dB below (peak) or above (dip) the extremum.
  double width_level_db = 3.0;
  /// Extrema weaker than the strongest prominent extremum by more than this
  /// are ignored. Keeps noise ripple in the spectral tails out of the pattern.
  double relative_level_db = 12.0;
  double f_lo = 0.1e9;
  double f_hi = 5.0e9;
  Polarity polarity = Polarity::kPeak;

  void validate() const;
};

struct FeatureWeights {
  double f = 1.0;
  double w = 1.0;
  double d = 1.0;
};

/// Units each feature is divided by before distances are taken.
struct FeatureScales {
  double f_hz = 1e9;
  double w_hz = 1e8;
  double d_db = 10.0;
};

struct DistanceParams {
  FeatureWeights weights;
  FeatureScales scales;
  /// Cost of each notch left without a partner, normalized units.
  double miss_penalty = 10.0;

  void validate() const;
};

struct PatternTemplate {
  std::string label;
  NotchPattern pattern;
  DistanceParams params;
  double accept_radius = 5.0;

  void validate() const;
};

struct Classification {
  /// Template label, or "unknown" when the nearest template is out of range.
  std::string label;
  double distance = 0.0;
  std::optional<std::size_t> template_index;

  bool known() const noexcept { return template_index.has_value(); }
};

inline constexpr const char* kUnknownLabel = "unknown";

NotchPattern extract_pattern(const Spectrum& sp, const ExtractionConfig& cfg);

/// Greedy nearest-frequency matching; each matched pair adds its weighted
/// Euclidean feature distance, each unmatched notch adds the miss penalty.
double pattern_distance(const NotchPattern& a, const NotchPattern& b, const DistanceParams& params = {});

/// Nearest template, accepted if within its radius. Ties go to the earlier
/// template. Throws on an empty template list.
Classification classify(const NotchPattern& pattern, std::span<const PatternTemplate> templates);

}  // namespace medtag
