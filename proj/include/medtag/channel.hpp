#pragma once

#include <cstdint>
#include <optional>

#include "medtag/sem.hpp"

namespace medtag {

/// Noise applied to a clean spectrum. An absent snr_db means no additive noise.
struct ChannelConfig {
  std::optional<double> snr_db;
  double phase_noise_deg = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// SplitMix64 finalizer; used to derive independent per-trial and per-stream
/// seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Adds circular complex Gaussian noise with total variance
/// mean(|value|^2) / 10^(snr_db/10) per bin (half on each quadrature).
Spectrum apply_awgn(const Spectrum& sp, const ChannelConfig& cfg);

/// Rotates every bin by an independent angle drawn uniformly from
/// [-phase_noise_deg, +phase_noise_deg]. Magnitudes are untouched.
Spectrum apply_phase_noise(const Spectrum& sp, const ChannelConfig& cfg);

/// AWGN (when snr_db is set) followed by phase noise (when phase_noise_deg > 0).
/// The two draws use separate seed streams, so the additive realization does
/// not depend on whether phase noise is enabled.
Spectrum apply_channel(const Spectrum& sp, const ChannelConfig& cfg);

}  // namespace medtag
