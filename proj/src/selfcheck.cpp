#include "medtag/selfcheck.hpp"

#include <algorithm>
#include <cmath>

#include "medtag/events.hpp"
#include "medtag/mpm.hpp"
#include "medtag/pra.hpp"
#include "medtag/sem.hpp"
#include "medtag/sweep.hpp"

namespace medtag {
namespace {

double relative_l2(const Spectrum& a, const Spectrum& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a.values[i] - b.values[i]);
    den += std::norm(b.values[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace

std::vector<CheckResult> run_self_checks() {
  std::vector<CheckResult> out;
  const SamplingGrid grid = default_grid();
  const TagSignature sig = reference_signature();
  const TimeSignal ts = synthesize_time(sig, grid);

  const std::vector<double> band = grid.band_bins();
  out.push_back({"dft_vs_analytic_rel_l2", false,
                 relative_l2(dft_spectrum(ts, band), analytic_spectrum(sig, band)), 0.02});

  const std::vector<double> bins = grid.dft_bins();
  const TimeSignal back = inverse_spectrum(dft_spectrum(ts, bins), grid);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < ts.samples.size(); ++k) {
    num += std::norm(back.samples[k] - ts.samples[k]);
    den += std::norm(ts.samples[k]);
  }
  out.push_back({"inverse_round_trip_rel_error", false, std::sqrt(num / den), 1e-9});

  const PoleEstimate est = estimate_poles(ts, MpmConfig::fixed(3));
  double worst = est.poles.size() == 3 ? 0.0 : 1.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, est.poles.size()); ++i) {
    const Pole& p = sig.poles()[i];
    worst = std::max(worst, std::abs(est.poles[i].alpha - p.alpha()) / p.alpha());
    worst = std::max(worst, std::abs(est.poles[i].omega - p.omega()) / p.omega());
  }
  out.push_back({"mpm_noiseless_reference_max_rel_error", false, worst, 1e-6});

  const Pole p1 = sig.poles()[0];
  const NotchPattern pat = extract_pattern(analytic_spectrum(TagSignature("p1", {p1}), bins), ExtractionConfig{});
  const double expected_w = p1.alpha() / kPi;
  const double w_err = pat.size() == 1 ? std::abs(pat.notches()[0].w_hz - expected_w) / expected_w : 1.0;
  out.push_back({"notch_width_vs_alpha_over_pi", false, w_err, 0.05});

  ExtractionConfig ex;
  TagTemplateSet set;
  set.tag_id = "check";
  set.open_template = {"open", extract_pattern(clean_spectrum(default_open_signature(), grid), ex), {}, 0.5};
  set.closed_template = {"closed", extract_pattern(clean_spectrum(default_closed_signature(), grid), ex), {}, 0.5};
  const bool open_ok = classify_state(clean_spectrum(default_open_signature(), grid), set, ex).first == TagState::kOpen;
  const bool closed_ok =
      classify_state(clean_spectrum(default_closed_signature(), grid), set, ex).first == TagState::kClosed;
  out.push_back({"event_signatures_noiseless", false, (open_ok && closed_ok) ? 0.0 : 1.0, 0.5});

  for (CheckResult& c : out) c.passed = c.value < c.limit;
  return out;
}

}  // namespace medtag
