#include "medtag/channel.hpp"

#include <cmath>
#include <random>

#include "medtag/error.hpp"

namespace medtag {
namespace {

constexpr std::uint64_t kAwgnStream = 0xA5A5'0001ULL;
constexpr std::uint64_t kPhaseStream = 0xA5A5'0002ULL;

// mt19937_64 is fully specified by the standard; the distributions are not,
// so the uniform and Gaussian transforms are done here to keep outputs
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal pair via Box-Muller.
  std::pair<double, double> normal_pair() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

void ChannelConfig::validate() const {
  if (snr_db && !std::isfinite(*snr_db)) invalid("snr_db must be finite");
  if (!(phase_noise_deg >= 0.0) || !std::isfinite(phase_noise_deg)) {
    invalid("phase_noise_deg must be finite and >= 0");
  }
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Spectrum apply_awgn(const Spectrum& sp, const ChannelConfig& cfg) {
  cfg.validate();
  if (!cfg.snr_db) invalid("apply_awgn needs snr_db; skip the call for a noiseless channel");
  sp.validate();
  Spectrum out = sp;
  if (sp.size() == 0) return out;

  double power = 0.0;
  for (const complex& v : sp.values) power += std::norm(v);
  power /= static_cast<double>(sp.size());
  const double variance = power / std::pow(10.0, *cfg.snr_db / 10.0);
  const double sigma = std::sqrt(variance / 2.0);

  Rng rng(mix_seed(cfg.seed, kAwgnStream));
  for (complex& v : out.values) {
    const auto [re, im] = rng.normal_pair();
    v += complex(sigma * re, sigma * im);
  }
  return out;
}

Spectrum apply_phase_noise(const Spectrum& sp, const ChannelConfig& cfg) {
  cfg.validate();
  sp.validate();
  Spectrum out = sp;
  if (cfg.phase_noise_deg == 0.0) return out;

  const double half_width = cfg.phase_noise_deg * kPi / 180.0;
  Rng rng(mix_seed(cfg.seed, kPhaseStream));
  for (complex& v : out.values) {
    const double theta = (2.0 * rng.uniform() - 1.0) * half_width;
    v = std::polar(std::abs(v), std::arg(v) + theta);
  }
  return out;
}

Spectrum apply_channel(const Spectrum& sp, const ChannelConfig& cfg) {
  Spectrum out = cfg.snr_db ? apply_awgn(sp, cfg) : sp;
  if (cfg.phase_noise_deg > 0.0) out = apply_phase_noise(out, cfg);
  return out;
}

}  // namespace medtag
