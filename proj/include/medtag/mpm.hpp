#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "medtag/sem.hpp"

namespace medtag {

enum class SvdEngine {
  /// Exact thin SVD of the whole Hankel matrix.
  kFull,
  /// Randomized range finder with power iterations (Halko, Martinsson and
  /// Tropp). Only the leading singular triplets are computed.
  kTruncated,
};

struct MpmConfig {
  /// Pencil parameter L; 0 selects n_samples / 3.
  std::size_t pencil_param = 0;
  /// Fixed model order M. When unset, the order is the number of singular
  /// values >= threshold * sigma_max.
  std::optional<std::size_t> order;
  double threshold = 1e-3;
  SvdEngine engine = SvdEngine::kTruncated;
  /// Vandermonde condition numbers above this mark the estimate ill-conditioned.
  double condition_cap = 1e12;

  static MpmConfig fixed(std::size_t m) {
    MpmConfig c;
    c.order = m;
    return c;
  }
};

/// A pole as estimated from data. Unlike Pole it may be unstable (alpha <= 0)
/// or carry a negative frequency.
struct EstimatedPole {
  double alpha = 0.0;
  double omega = 0.0;
  complex residue;

  complex s() const noexcept { return {alpha, omega}; }
};

struct PoleEstimate {
  std::vector<EstimatedPole> poles;  // ascending omega
  std::size_t order_used = 0;
  std::vector<double> singular_values;  // descending
  bool ill_conditioned = false;
};

/// Matrix pencil estimate of the poles in `ts`. An all-zero signal yields an
/// empty estimate.
PoleEstimate estimate_poles(const TimeSignal& ts, const MpmConfig& cfg);

/// sum_i |s_i - s^_i| / sum_i |s_i| after greedy nearest-neighbour pairing of
/// true and estimated poles. True poles left without a partner are paired
/// with s^ = 0. Throws on an empty truth list.
double mpm_error(std::span<const Pole> truth, const PoleEstimate& est);

}  // namespace medtag
