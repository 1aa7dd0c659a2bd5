#include "medtag/pra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "medtag/error.hpp"

namespace medtag {
namespace {

constexpr double kFloorDb = -400.0;

struct Extremum {
  std::size_t index;  // representative bin (middle of a plateau)
  bool plateau;
  double prominence;
  std::size_t left_base;
  std::size_t right_base;
};

// Local maxima of `level`, plateaus reported once at their middle bin.
std::vector<Extremum> local_maxima(const std::vector<double>& level) {
  std::vector<Extremum> out;
  const std::size_t n = level.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (level[i] > level[i - 1]) {
      std::size_t j = i;
      while (j + 1 < n && level[j + 1] == level[i]) ++j;
      if (j + 1 < n && level[j + 1] < level[i]) {
        out.push_back({(i + j) / 2, j != i, 0.0, 0, 0});
      }
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

// Topographic prominence: walk outwards until a strictly higher bin or the
// band edge; the higher of the two minima found is the reference.
void measure_prominence(const std::vector<double>& level, Extremum& e) {
  const double top = level[e.index];
  std::size_t left = e.index;
  double left_min = top;
  for (std::size_t k = e.index; k-- > 0;) {
    if (level[k] > top) break;
    if (level[k] < left_min) {
      left_min = level[k];
      left = k;
    }
  }
  std::size_t right = e.index;
  double right_min = top;
  for (std::size_t k = e.index + 1; k < level.size(); ++k) {
    if (level[k] > top) break;
    if (level[k] < right_min) {
      right_min = level[k];
      right = k;
    }
  }
  e.left_base = left;
  e.right_base = right;
  e.prominence = top - std::max(left_min, right_min);
}

double local_spacing(const std::vector<double>& f, std::size_t i) {
  if (i == 0) return f[1] - f[0];
  if (i + 1 == f.size()) return f[i] - f[i - 1];
  return 0.5 * (f[i + 1] - f[i - 1]);
}

double crossing(double f0, double l0, double f1, double l1, double ref) {
  if (l0 == l1) return f0;
  return f0 + (ref - l0) * (f1 - f0) / (l1 - l0);
}

double scaled_pair_cost(const Notch& a, const Notch& b, const DistanceParams& p) {
  const double df = (a.f_hz - b.f_hz) / p.scales.f_hz;
  const double dw = (a.w_hz - b.w_hz) / p.scales.w_hz;
  const double dd = (a.d_db - b.d_db) / p.scales.d_db;
  return std::sqrt(p.weights.f * df * df + p.weights.w * dw * dw + p.weights.d * dd * dd);
}

}  // namespace

NotchPattern::NotchPattern(std::vector<Notch> notches) : notches_(std::move(notches)) {
  std::sort(notches_.begin(), notches_.end(), [](const Notch& a, const Notch& b) { return a.f_hz < b.f_hz; });
  for (std::size_t i = 0; i < notches_.size(); ++i) {
    const Notch& n = notches_[i];
    if (!std::isfinite(n.f_hz) || !(n.w_hz > 0.0) || !(n.d_db > 0.0)) {
      invalid("notch features need finite frequency, positive width and positive depth");
    }
    if (i > 0 && !(n.f_hz > notches_[i - 1].f_hz)) invalid("notch frequencies must be distinct");
  }
}

void ExtractionConfig::validate() const {
  if (!(prominence_floor_db > 0.0)) invalid("prominence floor must be > 0 dB");
  if (!(width_level_db > 0.0)) invalid("width level must be > 0 dB");
  if (!(relative_level_db > 0.0)) invalid("relative level must be > 0 dB");
  if (!(f_hi > f_lo)) invalid("extraction band must satisfy f_lo < f_hi");
}

void DistanceParams::validate() const {
  if (weights.f < 0.0 || weights.w < 0.0 || weights.d < 0.0) invalid("feature weights must be >= 0");
  if (!(weights.f > 0.0 || weights.w > 0.0 || weights.d > 0.0)) invalid("at least one feature weight must be > 0");
  if (!(scales.f_hz > 0.0 && scales.w_hz > 0.0 && scales.d_db > 0.0)) invalid("feature scales must be > 0");
  if (!(miss_penalty >= 0.0)) invalid("miss penalty must be >= 0");
}

void PatternTemplate::validate() const {
  params.validate();
  if (!(accept_radius > 0.0)) invalid("template '" + label + "' needs accept_radius > 0");
}

NotchPattern extract_pattern(const Spectrum& sp, const ExtractionConfig& cfg) {
  cfg.validate();
  sp.validate();
  if (sp.size() == 0) invalid("cannot extract a pattern from an empty spectrum");

  std::vector<double> freq;
  std::vector<double> level;
  const double sign = cfg.polarity == Polarity::kPeak ? 1.0 : -1.0;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    if (sp.freqs[i] < cfg.f_lo || sp.freqs[i] > cfg.f_hi) continue;
    const double mag = std::abs(sp.values[i]);
    const double db = mag > 0.0 ? 20.0 * std::log10(mag) : kFloorDb;
    freq.push_back(sp.freqs[i]);
    level.push_back(sign * std::max(db, kFloorDb));
  }
  if (freq.empty()) invalid("extraction band contains no spectrum bins");
  if (freq.size() < 3) return {};

  std::vector<Extremum> candidates = local_maxima(level);
  std::vector<Extremum> kept;
  double strongest = -std::numeric_limits<double>::infinity();
  for (Extremum& e : candidates) {
    measure_prominence(level, e);
    if (e.prominence >= cfg.prominence_floor_db) {
      kept.push_back(e);
      strongest = std::max(strongest, level[e.index]);
    }
  }

  std::vector<Notch> notches;
  for (const Extremum& e : kept) {
    if (level[e.index] < strongest - cfg.relative_level_db) continue;
    const std::size_t p = e.index;

    double f_peak = freq[p];
    double top = level[p];
    if (!e.plateau && p > 0 && p + 1 < level.size()) {
      const double a = level[p - 1];
      const double b = level[p];
      const double c = level[p + 1];
      const double denom = a - 2.0 * b + c;
      if (denom < 0.0) {
        const double delta = 0.5 * (a - c) / denom;
        f_peak += delta * local_spacing(freq, p);
        top = b - 0.25 * (a - c) * delta;
      }
    }

    const double ref = top - cfg.width_level_db;
    double f_left = freq[e.left_base];
    for (std::size_t k = p; k > e.left_base; --k) {
      if (level[k - 1] <= ref) {
        f_left = crossing(freq[k - 1], level[k - 1], freq[k], level[k], ref);
        break;
      }
    }
    double f_right = freq[e.right_base];
    for (std::size_t k = p; k < e.right_base; ++k) {
      if (level[k + 1] <= ref) {
        f_right = crossing(freq[k], level[k], freq[k + 1], level[k + 1], ref);
        break;
      }
    }
    const double width = f_right - f_left;
    if (!(width > 0.0)) continue;
    notches.push_back({f_peak, width, e.prominence});
  }

  // Interpolation can, in pathological cases, push two neighbours onto one
  // frequency; keep the deeper notch.
  std::sort(notches.begin(), notches.end(), [](const Notch& a, const Notch& b) { return a.f_hz < b.f_hz; });
  std::vector<Notch> distinct;
  for (const Notch& n : notches) {
    if (!distinct.empty() && !(n.f_hz > distinct.back().f_hz)) {
      if (n.d_db > distinct.back().d_db) distinct.back() = n;
      continue;
    }
    distinct.push_back(n);
  }
  return NotchPattern(std::move(distinct));
}

double pattern_distance(const NotchPattern& a, const NotchPattern& b, const DistanceParams& params) {
  params.validate();
  struct Candidate {
    double gap;
    double lo;
    double hi;
    double cost;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const Notch& x = a.notches()[i];
      const Notch& y = b.notches()[j];
      candidates.push_back({std::abs(x.f_hz - y.f_hz), std::min(x.f_hz, y.f_hz), std::max(x.f_hz, y.f_hz),
                            scaled_pair_cost(x, y, params), i, j});
    }
  }
  // Every key is symmetric in (a, b), so d(a, b) == d(b, a).
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(x.gap, x.lo, x.hi, x.cost) < std::tie(y.gap, y.lo, y.hi, y.cost);
  });

  std::vector<bool> used_a(a.size(), false);
  std::vector<bool> used_b(b.size(), false);
  std::vector<double> costs;
  std::size_t matched = 0;
  for (const Candidate& c : candidates) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    costs.push_back(c.cost);
    ++matched;
  }
  std::sort(costs.begin(), costs.end());
  double total = 0.0;
  for (double c : costs) total += c;
  const std::size_t unmatched = (a.size() - matched) + (b.size() - matched);
  return total + params.miss_penalty * static_cast<double>(unmatched);
}

Classification classify(const NotchPattern& pattern, std::span<const PatternTemplate> templates) {
  if (templates.empty()) invalid("classify needs at least one template");
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < templates.size(); ++i) {
    templates[i].validate();
    const double d = pattern_distance(pattern, templates[i].pattern, templates[i].params);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  if (best_distance <= templates[best].accept_radius) {
    return {templates[best].label, best_distance, best};
  }
  return {kUnknownLabel, best_distance, std::nullopt};
}

}  // namespace medtag
