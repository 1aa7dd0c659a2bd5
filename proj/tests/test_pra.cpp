#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "medtag/channel.hpp"
#include "medtag/error.hpp"
#include "medtag/pra.hpp"
#include "medtag/sem.hpp"
#include "medtag/sweep.hpp"

using namespace medtag;

namespace {

constexpr double kTwoPi = 2.0 * kPi;

NotchPattern one(double f, double w, double d) { return NotchPattern({Notch{f, w, d}}); }

// Half-power width of a single-pole magnitude, found by brute-force scan of
// the closed-form |X|^2 on a 100 kHz grid.
double dense_half_power_width(double alpha, double omega) {
  const double f0 = omega / kTwoPi;
  const double peak = 1.0 / (alpha * alpha);
  double lo = f0;
  double hi = f0;
  for (double f = f0; 1.0 / (alpha * alpha + std::pow(omega - kTwoPi * f, 2)) >= 0.5 * peak; f -= 1e5) lo = f;
  for (double f = f0; 1.0 / (alpha * alpha + std::pow(omega - kTwoPi * f, 2)) >= 0.5 * peak; f += 1e5) hi = f;
  return hi - lo;
}

}  // namespace

TEST_CASE("pattern construction sorts and validates") {
  const NotchPattern p({Notch{2e9, 1e8, 10}, Notch{1e9, 1e8, 10}});
  CHECK(p.notches()[0].f_hz == 1e9);
  CHECK_THROWS_AS(NotchPattern({Notch{1e9, 0.0, 10}}), Error);
  CHECK_THROWS_AS(NotchPattern({Notch{1e9, 1e8, -1}}), Error);
  CHECK_THROWS_AS(NotchPattern({Notch{1e9, 1e8, 5}, Notch{1e9, 2e8, 5}}), Error);
}

TEST_CASE("flat spectrum gives an empty pattern") {
  const SamplingGrid g;
  const auto band = g.band_bins();
  Spectrum flat{band, std::vector<complex>(band.size(), complex(1.0, 0.0))};
  CHECK(extract_pattern(flat, ExtractionConfig{}).empty());
  CHECK_THROWS_AS(extract_pattern(Spectrum{}, ExtractionConfig{}), Error);
}

TEST_CASE("single analytic pole: location within a bin and width near alpha/pi") {
  const SamplingGrid g;
  const auto band = g.band_bins();
  const Pole p1 = reference_signature().poles()[0];
  const NotchPattern p = extract_pattern(analytic_spectrum(TagSignature("p1", {p1}), band), ExtractionConfig{});
  REQUIRE(p.size() == 1);
  CHECK(std::abs(p.notches()[0].f_hz - 1.0e9) <= g.bin_spacing());
  const double oracle = dense_half_power_width(p1.alpha(), p1.omega());
  CHECK(oracle == doctest::Approx(p1.alpha() / kPi).epsilon(2e-3));
  CHECK(p.notches()[0].w_hz == doctest::Approx(oracle).epsilon(0.05));
  CHECK(p.notches()[0].d_db > 3.0);
}

TEST_CASE("extracted width tracks the analytic half-power width across damping values") {
  const SamplingGrid g;
  const auto band = g.band_bins();
  for (double scale : {1.0, 2.0, 5.0}) {
    const double alpha = kTwoPi * 1e8 * scale;
    for (double f0 : {1.0e9, 1.6e9, 2.5e9}) {
      const TagSignature sig("p", {Pole(alpha, kTwoPi * f0)});
      const double oracle = dense_half_power_width(alpha, kTwoPi * f0);
      for (const Spectrum& sp : {analytic_spectrum(sig, band), dft_spectrum(synthesize_time(sig, g), band)}) {
        const NotchPattern p = extract_pattern(sp, ExtractionConfig{});
        REQUIRE(p.size() == 1);
        CHECK(p.notches()[0].w_hz == doctest::Approx(oracle).epsilon(0.05));
      }
    }
  }
}

TEST_CASE("reference signature yields three notches at the pole-sum maxima") {
  const SamplingGrid g;
  const TagSignature sig = reference_signature();
  const NotchPattern p = extract_pattern(clean_spectrum(sig, g), ExtractionConfig{});
  REQUIRE(p.size() == 3);
  const double expected[] = {1.0e9, 1.75e9, 2.5e9};
  for (int i = 0; i < 3; ++i) {
    // Closed-form maximum of the summed response near each pole.
    double best_f = 0.0;
    double best = -1.0;
    for (double f = expected[i] - 0.2e9; f <= expected[i] + 0.2e9; f += 1e5) {
      complex acc = 0.0;
      for (const Pole& q : sig.poles()) acc += q.residue() / complex(q.alpha(), q.omega() - kTwoPi * f);
      if (std::abs(acc) > best) {
        best = std::abs(acc);
        best_f = f;
      }
    }
    CHECK(std::abs(p.notches()[i].f_hz - best_f) <= g.bin_spacing());
  }
}

TEST_CASE("dip polarity finds minima") {
  const SamplingGrid g;
  const auto band = g.band_bins();
  Spectrum sp = analytic_spectrum(TagSignature("p", {Pole(kTwoPi * 1e8, kTwoPi * 2e9)}), band);
  for (complex& v : sp.values) v = 1.0 / v;  // peak -> notch
  ExtractionConfig cfg;
  cfg.polarity = Polarity::kDip;
  const NotchPattern p = extract_pattern(sp, cfg);
  REQUIRE(p.size() == 1);
  CHECK(std::abs(p.notches()[0].f_hz - 2e9) <= g.bin_spacing());
  ExtractionConfig peaks;
  CHECK(extract_pattern(sp, peaks).empty());
}

TEST_CASE("extraction equivariance under a frequency shift") {
  const SamplingGrid g;
  const auto band = g.band_bins();
  const double alpha = kTwoPi * 1.5e8;
  const NotchPattern base = extract_pattern(analytic_spectrum(TagSignature("a", {Pole(alpha, kTwoPi * 1.3e9)}), band), {});
  for (double shift : {0.137e9, 0.5e9, 1.71e9}) {
    const NotchPattern moved =
        extract_pattern(analytic_spectrum(TagSignature("b", {Pole(alpha, kTwoPi * (1.3e9 + shift))}), band), {});
    REQUIRE(moved.size() == 1);
    CHECK(std::abs(moved.notches()[0].f_hz - base.notches()[0].f_hz - shift) <= g.bin_spacing());
    CHECK(moved.notches()[0].w_hz == doctest::Approx(base.notches()[0].w_hz).epsilon(0.05));
    // Depth is measured against the band-edge bases, so it is not shift invariant.
  }
}

TEST_CASE("pattern distance: identities and the 3-4-5 case") {
  const NotchPattern a = one(1e9, 1e8, 10);
  CHECK(pattern_distance(a, a) == 0.0);
  // 3 normalized units of frequency, 4 of width.
  const NotchPattern b = one(4e9, 5e8, 10);
  CHECK(pattern_distance(a, b) == doctest::Approx(5.0));
  CHECK(pattern_distance(b, a) == doctest::Approx(5.0));
  // Unmatched notches cost the miss penalty each.
  CHECK(pattern_distance(a, NotchPattern{}) == doctest::Approx(10.0));
  CHECK(pattern_distance(NotchPattern{}, NotchPattern{}) == 0.0);
  DistanceParams heavy;
  heavy.weights.f = 4.0;  // sqrt(4 * 9 + 16)
  CHECK(pattern_distance(a, b, heavy) == doctest::Approx(std::sqrt(52.0)));
  DistanceParams bad;
  bad.weights = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(pattern_distance(a, b, bad), Error);
}

TEST_CASE("pattern distance is a symmetric premetric on random patterns") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> f(0.1e9, 5e9);
  std::uniform_real_distribution<double> w(0.05e9, 0.5e9);
  std::uniform_real_distribution<double> d(3.0, 30.0);
  std::uniform_int_distribution<int> count(0, 4);
  auto random_pattern = [&] {
    std::vector<Notch> n;
    for (int i = count(rng); i > 0; --i) n.push_back({f(rng), w(rng), d(rng)});
    return NotchPattern(n);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const NotchPattern a = random_pattern();
    const NotchPattern b = random_pattern();
    const double ab = pattern_distance(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab == pattern_distance(b, a));
    CHECK(pattern_distance(a, a) == 0.0);
  }
}

TEST_CASE("classify picks the nearest template within its radius") {
  PatternTemplate ta{"A", one(1e9, 1e8, 10), {}, 1.0};
  PatternTemplate tb{"B", one(2e9, 1e8, 10), {}, 1.0};
  const std::vector<PatternTemplate> ts = {ta, tb};
  Classification c = classify(ta.pattern, ts);
  CHECK(c.label == "A");
  CHECK(c.distance == 0.0);
  REQUIRE(c.known());
  CHECK(*c.template_index == 0);

  c = classify(one(2.1e9, 1e8, 10), ts);
  CHECK(c.label == "B");
  CHECK(c.distance == doctest::Approx(0.1));

  c = classify(one(4.5e9, 1e8, 10), ts);
  CHECK(c.label == kUnknownLabel);
  CHECK_FALSE(c.known());
  CHECK(c.distance == doctest::Approx(2.5));

  // Equidistant: the earlier template wins.
  c = classify(one(1.5e9, 1e8, 10), std::vector<PatternTemplate>{{"A", one(1e9, 1e8, 10), {}, 1.0},
                                                                 {"B", one(2e9, 1e8, 10), {}, 1.0}});
  CHECK(c.label == "A");
  CHECK_THROWS_AS(classify(ta.pattern, std::vector<PatternTemplate>{}), Error);
}

TEST_CASE("phase noise never changes the classification") {
  const SamplingGrid g;
  const TagSignature sig = reference_signature();
  const ExtractionConfig cfg;
  const auto templates = code_templates(sig, g, cfg, 5.0);
  const Spectrum clean = clean_spectrum(sig, g);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    ChannelConfig awgn;
    awgn.snr_db = 5.0 + static_cast<double>(seed % 8) * 2.5;
    awgn.seed = seed;
    ChannelConfig both = awgn;
    both.phase_noise_deg = 1.0 + static_cast<double>(seed % 5) * 20.0;
    const Classification a = classify(extract_pattern(apply_channel(clean, awgn), cfg), templates);
    const Classification b = classify(extract_pattern(apply_channel(clean, both), cfg), templates);
    CHECK(a.label == b.label);
    CHECK(a.distance == doctest::Approx(b.distance).epsilon(1e-12));
  }
}

TEST_CASE("three-bit code templates") {
  const SamplingGrid g;
  const auto templates = code_templates(reference_signature(), g, ExtractionConfig{}, 5.0);
  REQUIRE(templates.size() == 8);
  CHECK(templates[0].label == "000");
  CHECK(templates[0].pattern.empty());
  for (const PatternTemplate& t : templates) {
    std::size_t ones = 0;
    for (char ch : t.label) ones += ch == '1' ? 1 : 0;
    CHECK(t.pattern.size() == ones);
  }
  // Noiseless subsets classify as themselves.
  for (const PatternTemplate& t : templates) CHECK(classify(t.pattern, templates).label == t.label);
}

TEST_CASE("noisy reference pattern at 25 dB is recognised in at least 99 percent of trials") {
  const SamplingGrid g;
  const TagSignature sig = reference_signature();
  const ExtractionConfig cfg;
  const auto templates = code_templates(sig, g, cfg, 5.0);
  const Spectrum clean = clean_spectrum(sig, g);
  int correct = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    ChannelConfig ch;
    ch.snr_db = 25.0;
    ch.seed = trial_seed(77, 0, t);
    correct += classify(extract_pattern(apply_channel(clean, ch), cfg), templates).label == "111" ? 1 : 0;
  }
  CHECK(correct >= 990);
}
