#include "medtag/sem.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <string>

#include "medtag/error.hpp"

namespace medtag {

Pole::Pole(double alpha, double omega, complex residue)
    : alpha_(alpha), omega_(omega), residue_(residue) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    invalid("pole damping must be positive and finite, got " + std::to_string(alpha));
  }
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    invalid("pole angular frequency must be positive and finite, got " + std::to_string(omega));
  }
  if (!std::isfinite(residue.real()) || !std::isfinite(residue.imag())) {
    invalid("pole residue must be finite");
  }
}

TagSignature::TagSignature(std::string label, std::vector<Pole> poles)
    : label_(std::move(label)), poles_(std::move(poles)) {
  if (poles_.empty()) {
    invalid("tag signature '" + label_ + "' has no poles");
  }
  std::stable_sort(poles_.begin(), poles_.end(),
                   [](const Pole& a, const Pole& b) { return a.omega() < b.omega(); });
  for (std::size_t i = 1; i < poles_.size(); ++i) {
    if (!(poles_[i].omega() > poles_[i - 1].omega())) {
      invalid("tag signature '" + label_ + "' has duplicate pole frequencies");
    }
  }
}

void SamplingGrid::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) invalid("sampling interval must be positive");
  if (n_samples < 16) invalid("sampling grid needs at least 16 samples");
  if (!(f_start >= 0.0) || !(f_stop > f_start)) invalid("sweep band must satisfy 0 <= f_start < f_stop");
  if (1.0 / dt < 2.0 * f_stop) invalid("sampling rate 1/dt must be at least 2 * f_stop");
}

std::vector<double> SamplingGrid::dft_bins() const {
  const auto n = static_cast<long>(n_samples);
  const double df = bin_spacing();
  std::vector<double> out;
  out.reserve(n_samples);
  for (long k = -n / 2; k < n - n / 2; ++k) out.push_back(static_cast<double>(k) * df);
  return out;
}

std::vector<double> SamplingGrid::band_bins() const {
  std::vector<double> out;
  for (double f : dft_bins()) {
    if (f >= f_start && f <= f_stop) out.push_back(f);
  }
  return out;
}

SamplingGrid default_grid() { return SamplingGrid{}; }

void Spectrum::validate() const {
  if (freqs.size() != values.size()) invalid("spectrum frequency/value length mismatch");
  for (std::size_t i = 1; i < freqs.size(); ++i) {
    if (!(freqs[i] > freqs[i - 1])) invalid("spectrum frequencies must be strictly increasing");
  }
}

TagSignature reference_signature() {
  return TagSignature("reference", {
                                    Pole(2.0 * kPi * 1e8, 2.0 * kPi * 1e9),
                                    Pole(3.5 * kPi * 1e8, 3.5 * kPi * 1e9),
                                    Pole(5.0 * kPi * 1e8, 5.0 * kPi * 1e9),
                                });
}

TimeSignal synthesize_time(const TagSignature& signature, const SamplingGrid& grid) {
  grid.validate();
  TimeSignal ts{grid, std::vector<complex>(grid.n_samples, complex{})};
  for (const Pole& p : signature.poles()) {
    // exp(-s k dt) evaluated directly per sample; a running product would
    // drift over long grids.
    const complex s = p.s();
    for (std::size_t k = 0; k < grid.n_samples; ++k) {
      ts.samples[k] += p.residue() * std::exp(-s * (static_cast<double>(k) * grid.dt));
    }
  }
  return ts;
}

Spectrum analytic_spectrum(const TagSignature& signature, std::span<const double> freqs) {
  Spectrum sp{std::vector<double>(freqs.begin(), freqs.end()), std::vector<complex>(freqs.size())};
  sp.validate();
  for (std::size_t m = 0; m < freqs.size(); ++m) {
    complex acc{};
    for (const Pole& p : signature.poles()) {
      acc += p.residue() / complex(p.alpha(), p.omega() - 2.0 * kPi * freqs[m]);
    }
    sp.values[m] = acc;
  }
  return sp;
}

Spectrum dft_spectrum(const TimeSignal& ts, std::span<const double> freqs) {
  const SamplingGrid& grid = ts.grid;
  grid.validate();
  if (ts.samples.size() != grid.n_samples) invalid("time signal length does not match its grid");
  const double nyquist = 0.5 / grid.dt;
  Spectrum sp{std::vector<double>(freqs.begin(), freqs.end()), std::vector<complex>(freqs.size())};
  sp.validate();
  const std::size_t n = ts.samples.size();
  for (std::size_t m = 0; m < freqs.size(); ++m) {
    const double f = freqs[m];
    if (std::abs(f) > nyquist * (1.0 + 1e-12)) {
      invalid("requested frequency " + std::to_string(f) + " Hz is outside +/- 1/(2 dt)");
    }
    const complex w = std::polar(1.0, 2.0 * kPi * f * grid.dt);
    // Horner evaluation of sum_k x[k] w^k.
    complex acc{};
    for (std::size_t k = n; k-- > 1;) acc = acc * w + ts.samples[k];
    acc = acc * w + 0.5 * ts.samples[0];
    sp.values[m] = grid.dt * acc;
  }
  return sp;
}

TimeSignal inverse_spectrum(const Spectrum& sp, const SamplingGrid& grid) {
  grid.validate();
  sp.validate();
  const std::size_t n = grid.n_samples;
  TimeSignal ts{grid, std::vector<complex>(n, complex{})};
  if (sp.size() == 0) return ts;
  if (sp.size() > n) invalid("spectrum has more bins than the time grid has samples");

  const double df = grid.bin_spacing();
  const double tol = 1e-6;
  std::vector<std::size_t> index(sp.size());
  std::vector<bool> used(n, false);
  for (std::size_t m = 0; m < sp.size(); ++m) {
    if (m > 0 && std::abs((sp.freqs[m] - sp.freqs[m - 1]) / df - 1.0) > tol) {
      invalid("inverse_spectrum needs a uniform grid with spacing 1/(N dt)");
    }
    const double b = sp.freqs[m] / df;
    const double rb = std::round(b);
    if (std::abs(b - rb) > tol) invalid("spectrum frequency is not on the DFT bin grid");
    const auto nn = static_cast<long long>(n);
    const long long wrapped = ((static_cast<long long>(rb) % nn) + nn) % nn;
    if (used[static_cast<std::size_t>(wrapped)]) invalid("two spectrum bins alias onto one DFT bin");
    used[static_cast<std::size_t>(wrapped)] = true;
    index[m] = static_cast<std::size_t>(wrapped);
  }

  // x[k] = df * sum_b X[b] exp(-j 2 pi b k / N): a forward FFT of the
  // scattered bins.
  std::vector<complex> scattered(n, complex{});
  for (std::size_t m = 0; m < sp.size(); ++m) scattered[index[m]] = sp.values[m];
  Eigen::FFT<double> fft;
  fft.fwd(ts.samples, scattered);
  const double scale = 1.0 / (static_cast<double>(n) * grid.dt);
  for (complex& v : ts.samples) v *= scale;
  ts.samples[0] *= 2.0;
  return ts;
}

}  // namespace medtag
