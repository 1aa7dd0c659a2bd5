#include "medtag/mpm.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <tuple>

#include "medtag/error.hpp"

namespace medtag {
namespace {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr std::size_t kOversample = 10;
constexpr int kPowerIterations = 3;
constexpr std::uint64_t kSketchSeed = 0x6D70'6D5F'736BULL;

struct RightSubspace {
  Eigen::VectorXd singular_values;
  Matrix v;  // n x k, columns are right singular vectors
};

Matrix orthonormal_basis(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

RightSubspace full_svd(const Matrix& y) {
  Eigen::BDCSVD<Matrix> svd(y, Eigen::ComputeThinV);
  return {svd.singularValues(), svd.matrixV()};
}

// Products with the Hankel matrix H(i, j) = s[i + j] done as FFT
// correlations. A circular transform of length n is enough: the entries we
// keep never overlap the wrapped tail of the linear convolution.
class HankelOperator {
 public:
  HankelOperator(const std::vector<complex>& samples, Eigen::Index rows, Eigen::Index cols)
      : rows_(rows), cols_(cols), n_(static_cast<Eigen::Index>(samples.size())) {
    fft_.fwd(samples_hat_, samples);
  }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  // H * x
  Matrix apply(const Matrix& x) const {
    Matrix out(rows_, x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const std::vector<complex> conv = correlate(x.col(c), cols_, false);
      for (Eigen::Index i = 0; i < rows_; ++i) out(i, c) = conv[static_cast<std::size_t>(i + cols_ - 1)];
    }
    return out;
  }

  // H^H * y
  Matrix apply_adjoint(const Matrix& y) const {
    Matrix out(cols_, y.cols());
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
      const std::vector<complex> conv = correlate(y.col(c), rows_, true);
      for (Eigen::Index j = 0; j < cols_; ++j) {
        out(j, c) = std::conj(conv[static_cast<std::size_t>(j + rows_ - 1)]);
      }
    }
    return out;
  }

 private:
  std::vector<complex> correlate(const Eigen::Ref<const Vector>& v, Eigen::Index len, bool conjugate) const {
    std::vector<complex> rev(static_cast<std::size_t>(n_), complex{});
    for (Eigen::Index k = 0; k < len; ++k) {
      const complex value = v(len - 1 - k);
      rev[static_cast<std::size_t>(k)] = conjugate ? std::conj(value) : value;
    }
    std::vector<complex> rev_hat;
    fft_.fwd(rev_hat, rev);
    for (std::size_t k = 0; k < rev_hat.size(); ++k) rev_hat[k] *= samples_hat_[k];
    std::vector<complex> conv;
    fft_.inv(conv, rev_hat);
    return conv;
  }

  Eigen::Index rows_;
  Eigen::Index cols_;
  Eigen::Index n_;
  mutable Eigen::FFT<double> fft_;
  std::vector<complex> samples_hat_;
};

// Randomized range finder with power iterations, followed by an exact SVD of
// the small projected matrix.
RightSubspace truncated_svd(const HankelOperator& h, Eigen::Index rank) {
  std::mt19937_64 engine(kSketchSeed);
  auto unit = [&engine] { return static_cast<double>(engine() >> 11) * 0x1.0p-53 - 0.5; };
  Matrix omega(h.cols(), rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    for (Eigen::Index i = 0; i < h.cols(); ++i) omega(i, j) = complex(unit(), unit());
  }
  Matrix q = orthonormal_basis(h.apply(omega));
  for (int it = 0; it < kPowerIterations; ++it) {
    const Matrix z = orthonormal_basis(h.apply_adjoint(q));
    q = orthonormal_basis(h.apply(z));
  }
  const Matrix b = h.apply_adjoint(q).adjoint();
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinV);
  return {svd.singularValues(), svd.matrixV()};
}

std::size_t count_above(const Eigen::VectorXd& sv, double threshold) {
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) >= threshold * sv(0)) ++count;
  }
  return count;
}

}  // namespace

PoleEstimate estimate_poles(const TimeSignal& ts, const MpmConfig& cfg) {
  const std::size_t n = ts.samples.size();
  if (n != ts.grid.n_samples) invalid("time signal length does not match its grid");
  if (!(ts.grid.dt > 0.0)) invalid("sampling interval must be positive");
  if (cfg.order && *cfg.order == 0) invalid("fixed model order must be >= 1");
  if (!cfg.order && !(cfg.threshold > 0.0 && cfg.threshold < 1.0)) {
    invalid("singular-value threshold must lie in (0, 1)");
  }
  const std::size_t pencil = cfg.pencil_param == 0 ? n / 3 : cfg.pencil_param;
  if (cfg.order) {
    const std::size_t m = *cfg.order;
    if (n < 2 * m + 1) invalid("need at least 2M+1 samples for model order " + std::to_string(m));
    if (pencil < m || pencil > n - m) invalid("pencil parameter must satisfy M <= L <= N - M");
  } else if (pencil < 1 || pencil >= n) {
    invalid("pencil parameter must satisfy 1 <= L < N");
  }

  PoleEstimate est;
  const bool all_zero = std::all_of(ts.samples.begin(), ts.samples.end(),
                                    [](const complex& v) { return v == complex{}; });
  if (all_zero) return est;

  const auto rows = static_cast<Eigen::Index>(n - pencil);
  const auto cols = static_cast<Eigen::Index>(pencil + 1);
  auto dense_hankel = [&] {
    Matrix hankel(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) hankel(i, j) = ts.samples[static_cast<std::size_t>(i + j)];
    }
    return hankel;
  };
  const HankelOperator op(ts.samples, rows, cols);

  const Eigen::Index max_rank = std::min(rows, cols);
  RightSubspace sub;
  if (cfg.engine == SvdEngine::kFull) {
    sub = full_svd(dense_hankel());
  } else if (cfg.order) {
    const auto k = std::min<Eigen::Index>(max_rank, static_cast<Eigen::Index>(*cfg.order + kOversample));
    sub = k == max_rank ? full_svd(dense_hankel()) : truncated_svd(op, k);
  } else {
    // Grow the sketch until it holds every singular value above threshold
    // with room to spare.
    Eigen::Index k = std::min<Eigen::Index>(max_rank, 2 * kOversample);
    for (;;) {
      sub = k == max_rank ? full_svd(dense_hankel()) : truncated_svd(op, k);
      const auto kept = static_cast<Eigen::Index>(count_above(sub.singular_values, cfg.threshold));
      if (k == max_rank || kept + static_cast<Eigen::Index>(kOversample) / 2 <= k) break;
      k = std::min(max_rank, 2 * k);
    }
  }

  est.singular_values.assign(sub.singular_values.data(),
                             sub.singular_values.data() + sub.singular_values.size());

  std::size_t order = cfg.order ? *cfg.order : count_above(sub.singular_values, cfg.threshold);
  order = std::min<std::size_t>(order, static_cast<std::size_t>(sub.v.cols()));
  order = std::min<std::size_t>(order, pencil);
  if (order == 0) return est;
  const auto m = static_cast<Eigen::Index>(order);

  // The row space of the Hankel matrix is spanned by [1, z, z^2, ...]; with
  // Y = U S V^H those vectors live in the span of conj(V).
  const Matrix signal_space = sub.v.leftCols(m).conjugate();
  const Matrix v1 = signal_space.topRows(cols - 1);
  const Matrix v2 = signal_space.bottomRows(cols - 1);
  const Matrix pencil_matrix = v1.completeOrthogonalDecomposition().solve(v2);
  Eigen::ComplexEigenSolver<Matrix> eig(pencil_matrix, false);
  if (eig.info() != Eigen::Success) runtime_failure("matrix pencil eigenproblem did not converge");
  const Vector z = eig.eigenvalues();

  Matrix vandermonde(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const complex log_z = std::log(z(i));
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
      vandermonde(k, i) = std::exp(static_cast<double>(k) * log_z);
    }
  }
  Vector y(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) y(static_cast<Eigen::Index>(k)) = ts.samples[k];
  const Vector residues = vandermonde.colPivHouseholderQr().solve(y);

  Eigen::JacobiSVD<Matrix> vsvd(vandermonde);
  const auto& vs = vsvd.singularValues();
  const double smallest = vs(vs.size() - 1);
  const double condition = smallest > 0.0 ? vs(0) / smallest : std::numeric_limits<double>::infinity();
  est.ill_conditioned = !(condition <= cfg.condition_cap);

  est.poles.reserve(order);
  for (Eigen::Index i = 0; i < m; ++i) {
    const complex s = -std::log(z(i)) / ts.grid.dt;
    est.poles.push_back({s.real(), s.imag(), residues(i)});
  }
  std::sort(est.poles.begin(), est.poles.end(),
            [](const EstimatedPole& a, const EstimatedPole& b) { return a.omega < b.omega; });
  est.order_used = est.poles.size();
  return est;
}

double mpm_error(std::span<const Pole> truth, const PoleEstimate& est) {
  if (truth.empty()) invalid("mpm_error needs at least one true pole");

  struct Pair {
    double distance;
    double true_omega;
    double est_omega;
    double est_alpha;
    std::size_t ti;
    std::size_t ei;
  };
  std::vector<Pair> pairs;
  pairs.reserve(truth.size() * est.poles.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = 0; j < est.poles.size(); ++j) {
      pairs.push_back({std::abs(truth[i].s() - est.poles[j].s()), truth[i].omega(), est.poles[j].omega,
                       est.poles[j].alpha, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.distance, a.true_omega, a.est_omega, a.est_alpha) <
           std::tie(b.distance, b.true_omega, b.est_omega, b.est_alpha);
  });

  std::vector<bool> true_used(truth.size(), false);
  std::vector<bool> est_used(est.poles.size(), false);
  std::vector<double> contribution(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) contribution[i] = std::abs(truth[i].s());
  for (const Pair& p : pairs) {
    if (true_used[p.ti] || est_used[p.ei]) continue;
    true_used[p.ti] = est_used[p.ei] = true;
    contribution[p.ti] = p.distance;
  }

  // Sum in ascending true-omega order so the result does not depend on how
  // the caller ordered the truth list.
  std::vector<std::size_t> order(truth.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::make_tuple(truth[a].omega(), truth[a].alpha()) < std::make_tuple(truth[b].omega(), truth[b].alpha());
  });
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t i : order) {
    numerator += contribution[i];
    denominator += std::abs(truth[i].s());
  }
  return numerator / denominator;
}

}  // namespace medtag
