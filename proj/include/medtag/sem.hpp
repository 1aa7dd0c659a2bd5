#pragma once

// Singularity-expansion model of a chipless tag response.
//
// Sign convention: a resonance contributes R * exp(-(alpha + j*omega) * t),
// i.e. the phasor rotates clockwise. The matching continuous transform is
//
//   X(f) = integral_0^inf x(t) exp(+j*2*pi*f*t) dt = R / (alpha + j*(omega - 2*pi*f))
//
// so each pole shows up as a magnitude peak at f = omega / 2pi with height
// |R| / alpha and half-power full width alpha / pi Hz. Every spectrum in this
// library (analytic or discrete) uses the exp(+j*2*pi*f*t) kernel.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace medtag {

using complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// One complex resonance s = alpha + j*omega with residue R.
class Pole {
 public:
  Pole(double alpha, double omega, complex residue = {1.0, 0.0});

  double alpha() const noexcept { return alpha_; }
  double omega() const noexcept { return omega_; }
  complex residue() const noexcept { return residue_; }
  complex s() const noexcept { return {alpha_, omega_}; }
  double frequency_hz() const noexcept { return omega_ / (2.0 * kPi); }

  Pole with_residue(complex r) const { return Pole(alpha_, omega_, r); }

 private:
  double alpha_;
  double omega_;
  complex residue_;
};

/// Poles of one tag configuration, kept sorted by ascending omega.
class TagSignature {
 public:
  TagSignature(std::string label, std::vector<Pole> poles);

  const std::string& label() const noexcept { return label_; }
  const std::vector<Pole>& poles() const noexcept { return poles_; }

 private:
  std::string label_;
  std::vector<Pole> poles_;
};

/// Uniform time grid plus the sweep band the features are read from.
struct SamplingGrid {
  double dt = 0.05e-9;
  std::size_t n_samples = 1024;
  double f_start = 0.1e9;
  double f_stop = 5.0e9;

  /// Throws on dt <= 0, n_samples < 16, an empty band, or aliasing of f_stop.
  void validate() const;

  double bin_spacing() const noexcept { return 1.0 / (static_cast<double>(n_samples) * dt); }

  /// All n_samples DFT bins, k / (N dt) for k in [-N/2, N/2).
  std::vector<double> dft_bins() const;

  /// DFT bins restricted to [f_start, f_stop].
  std::vector<double> band_bins() const;
};

SamplingGrid default_grid();

struct TimeSignal {
  SamplingGrid grid;
  std::vector<complex> samples;
};

struct Spectrum {
  std::vector<double> freqs;
  std::vector<complex> values;

  std::size_t size() const noexcept { return freqs.size(); }
  /// Throws unless the lengths agree and freqs are strictly increasing.
  void validate() const;
};

/// The three resonances used throughout the decoder studies (1.0, 1.75 and
/// 2.5 GHz, unit residues).
TagSignature reference_signature();

TimeSignal synthesize_time(const TagSignature& signature, const SamplingGrid& grid);

Spectrum analytic_spectrum(const TagSignature& signature, std::span<const double> freqs);

/// dt * sum_k w_k x[k] exp(+j 2 pi f k dt), with w_0 = 1/2 and w_k = 1 for
/// k > 0: the sample at t = 0 sits on the causal jump and takes half weight.
/// Requested frequencies must satisfy |f| <= 1 / (2 dt).
Spectrum dft_spectrum(const TimeSignal& ts, std::span<const double> freqs);

/// Inverse of dft_spectrum on the bin grid of `grid`. Bins missing from `sp`
/// count as zero. Throws if the frequencies are not on a uniform grid with
/// spacing 1 / (N dt) or if two bins alias onto each other.
TimeSignal inverse_spectrum(const Spectrum& sp, const SamplingGrid& grid);

}  // namespace medtag
