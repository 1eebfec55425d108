// Estimation-theoretic bounds: Fisher information / CRB for arbitrary
// measurement matrices, the Bayesian information matrix, pairwise
// detection-error probability, the periodic single-sinusoid ZZB, threshold
// detection on bound curves, and the measurement-count rule of thumb.
#pragma once

#include <cfreq/measurement.hpp>
#include <cfreq/signal_manifold.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfreq {

enum class Parametrization { FreqPhase, FreqGainReIm };
enum class BoundKind { CRB, ZZB };

inline std::string to_string(BoundKind k) { return k == BoundKind::CRB ? "crb" : "zzb"; }

// Gaussian tail Q(x) = Pr[N(0,1) > x] via Q(x) = erfc(x/sqrt(2))/2.
inline double q_function(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

struct FisherMatrix {
  Eigen::MatrixXd entries;  // real symmetric, parameter order: frequencies first
  double sigma2 = 1.0;
  Eigen::Index dim() const { return entries.rows(); }
};

// F_{m,n} = (2/sigma^2) Re{ (Phi dx/dtheta_m)^H (Phi dx/dtheta_n) } for the
// mixture s = sum_l g_l x(omega_l).  Parameter layouts:
//   FreqPhase:     (omega_1..omega_K, phi_1..phi_K), phases of the gains;
//                  requires every |g_l| > 0.
//   FreqGainReIm:  (omega_1..omega_K, Re g_1..Re g_K, Im g_1..Im g_K).
inline FisherMatrix fisher_matrix(const SinusoidManifold& m, const MixtureParams& p,
                                  const MeasurementMatrix& phi, double sigma2,
                                  Parametrization par) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("fisher_matrix: sigma2 must be positive");
  if (phi.cols() != m.n_samples)
    throw std::invalid_argument("fisher_matrix: matrix/manifold dimension mismatch");
  const Eigen::Index k = p.gains.size();
  const std::complex<double> j(0.0, 1.0);
  const Eigen::Index dim = (par == Parametrization::FreqPhase) ? 2 * k : 3 * k;
  Eigen::MatrixXcd d(m.n_samples, dim);
  for (Eigen::Index l = 0; l < k; ++l) {
    const double w = p.frequencies[l];
    const std::complex<double> g = p.gains[l];
    if (par == Parametrization::FreqPhase) {
      if (std::abs(g) == 0.0)
        throw std::invalid_argument("fisher_matrix: zero gain is singular under FreqPhase");
      d.col(l) = g * sinusoid_derivative(m, w, 1);
      d.col(k + l) = j * g * sinusoid(m, w);
    } else {
      d.col(l) = g * sinusoid_derivative(m, w, 1);
      d.col(k + l) = sinusoid(m, w);
      d.col(2 * k + l) = j * sinusoid(m, w);
    }
  }
  const Eigen::MatrixXcd pd =
      (phi.kind == MatrixKind::Identity) ? Eigen::MatrixXcd(phi.scale * d)
                                         : Eigen::MatrixXcd(phi.entries * d);
  Eigen::MatrixXd f = (2.0 / sigma2) * (pd.adjoint() * pd).real();
  f = ((f + f.transpose()) / 2.0).eval();  // exact symmetry
  return FisherMatrix{std::move(f), sigma2};
}

inline double condition_number(const FisherMatrix& fim) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fim.entries, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(fim.dim() - 1);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

// e^T F^{-1} e for the unit vector selecting frequency coordinate `index`.
inline double crb_frequency(const FisherMatrix& fim, Eigen::Index index) {
  if (index < 0 || index >= fim.dim())
    throw std::invalid_argument("crb_frequency: index out of range");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fim.entries);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double hi = ev(fim.dim() - 1);
  if (ev(0) <= 1e-12 * std::max(hi, 1.0))
    throw std::domain_error("crb_frequency: singular Fisher matrix, smallest eigenvalue " +
                            std::to_string(ev(0)) + ", condition number " +
                            std::to_string(ev(0) > 0.0 ? hi / ev(0)
                                                       : std::numeric_limits<double>::infinity()));
  const Eigen::VectorXd row = es.eigenvectors().row(index);
  return (row.array().square() / ev.array()).sum();
}

// B = E_theta{F(theta)} + prior score outer-product term.  A uniform
// circular prior on [0, 2*pi) has zero score where defined, so its prior
// term is the zero matrix.
inline FisherMatrix bayesian_information_matrix(const std::vector<FisherMatrix>& samples,
                                                const Eigen::MatrixXd& prior_score_outer) {
  if (samples.empty())
    throw std::invalid_argument("bayesian_information_matrix: empty sample set");
  const Eigen::Index dim = samples.front().dim();
  if (prior_score_outer.rows() != dim || prior_score_outer.cols() != dim)
    throw std::invalid_argument("bayesian_information_matrix: prior term dimension mismatch");
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : samples) {
    if (s.dim() != dim)
      throw std::invalid_argument("bayesian_information_matrix: inconsistent dimensions");
    b += s.entries;
  }
  b /= static_cast<double>(samples.size());
  b += prior_score_outer;
  return FisherMatrix{std::move(b), samples.front().sigma2};
}

// Minimum detection-error probability for the binary test between signals
// at distance d with priors (p1, p2), noise CN(0, sigma2 I):
//   p1/(p1+p2) Q(d/(sqrt2 s) + (s/(sqrt2 d)) ln(p1/p2))
// + p2/(p1+p2) Q(d/(sqrt2 s) - (s/(sqrt2 d)) ln(p1/p2)),   s = sqrt(sigma2).
// The d -> 0 limit with unequal priors is min(p1,p2)/(p1+p2).
inline double detection_error_probability(double d, double p1, double p2, double sigma2) {
  if (!(d >= 0.0) || !(p1 > 0.0) || !(p2 > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("detection_error_probability: bad arguments");
  const double psum = p1 + p2;
  if (d == 0.0) return std::min(p1, p2) / psum;
  const double s = std::sqrt(sigma2);
  const double a = d / (std::numbers::sqrt2 * s);
  const double b = (s / (std::numbers::sqrt2 * d)) * std::log(p1 / p2);
  return (p1 / psum) * q_function(a + b) + (p2 / psum) * q_function(a - b);
}

// Integrand of the periodic single-sinusoid ZZB:
//   Q( sqrt( (M_eff/sigma2) (1 - |sin(N h/2)/(N sin(h/2))|) ) ) * h.
inline double zzb_integrand(Eigen::Index n, double effective_m, double sigma2, double h) {
  const double nn = static_cast<double>(n);
  double kernel = 1.0;
  const double den = nn * std::sin(h / 2.0);
  if (den != 0.0) kernel = std::abs(std::sin(nn * h / 2.0) / den);
  const double arg = (effective_m / sigma2) * std::max(0.0, 1.0 - kernel);
  return q_function(std::sqrt(arg)) * h;
}

struct QuadratureSpec {
  int initial_panels = 0;     // 0 -> max(4096, 16 N)
  double rel_tol = 1e-8;      // interval-halving agreement target
  int max_doublings = 24;
};

namespace detail {
inline double simpson_zzb(Eigen::Index n, double m_eff, double s2, long panels) {
  const double h = std::numbers::pi / static_cast<double>(panels);
  double odd = 0.0, even = 0.0;
  for (long i = 1; i < panels; i += 2) odd += zzb_integrand(n, m_eff, s2, i * h);
  for (long i = 2; i < panels; i += 2) even += zzb_integrand(n, m_eff, s2, i * h);
  const double ends = zzb_integrand(n, m_eff, s2, 0.0) +
                      zzb_integrand(n, m_eff, s2, std::numbers::pi);
  return (h / 3.0) * (ends + 4.0 * odd + 2.0 * even);
}
}  // namespace detail

// Periodic-MSE ZZB for a single sinusoid, integrated by composite Simpson
// with panel doubling until successive estimates agree to rel_tol.
inline double zzb_single_sinusoid(Eigen::Index n, double effective_m, double sigma2,
                                  QuadratureSpec quad = {}) {
  if (n < 2) throw std::invalid_argument("zzb_single_sinusoid: N must be >= 2");
  if (!(effective_m > 0.0) || effective_m > static_cast<double>(n))
    throw std::invalid_argument("zzb_single_sinusoid: effective_M must lie in (0, N]");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("zzb_single_sinusoid: sigma2 must be positive");
  long panels = quad.initial_panels > 0
                    ? quad.initial_panels
                    : std::max<long>(4096, 16 * static_cast<long>(n));
  if (panels % 2) ++panels;
  double prev = detail::simpson_zzb(n, effective_m, sigma2, panels);
  for (int d = 0; d < quad.max_doublings; ++d) {
    panels *= 2;
    const double cur = detail::simpson_zzb(n, effective_m, sigma2, panels);
    if (std::abs(cur - prev) <= quad.rel_tol * std::max(std::abs(cur), 1e-300)) return cur;
    prev = cur;
  }
  throw std::runtime_error("zzb_single_sinusoid: quadrature did not converge to rel_tol " +
                           std::to_string(quad.rel_tol));
}

// Valley filling V{g}(i) = max_{j >= i} g(j): running suffix maximum.
inline Eigen::VectorXd valley_fill(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw std::invalid_argument("valley_fill: empty input");
  Eigen::VectorXd out(values.size());
  double run = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = values.size() - 1; i >= 0; --i) {
    run = std::max(run, values[i]);
    out[i] = run;
  }
  return out;
}

struct BoundCurve {
  Eigen::VectorXd snr_grid_db;  // ascending
  Eigen::VectorXd values;       // MSE units (rad^2), strictly positive
  BoundKind kind = BoundKind::ZZB;
  std::optional<double> threshold_db;
};

// Shared sliding-window slope detector.  Returns the smallest grid SNR such
// that every window_db-wide window starting at or above it has least-squares
// slope of log10(values) vs SNR(dB) within tol of target_slope.  Windows
// that do not fit inside the grid do not constrain the result.
inline std::optional<double> slope_qualified_threshold(const Eigen::VectorXd& snr_db,
                                                       const Eigen::VectorXd& values,
                                                       double target_slope, double tol,
                                                       double window_db) {
  const Eigen::Index n = snr_db.size();
  if (n < 2 || values.size() != n)
    throw std::invalid_argument("slope_qualified_threshold: need >= 2 grid points");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(snr_db[i] > snr_db[i - 1]))
      throw std::invalid_argument("slope_qualified_threshold: grid must be ascending");
  if (!(values.minCoeff() > 0.0))
    throw std::invalid_argument("slope_qualified_threshold: values must be positive");
  Eigen::VectorXd lv = values.array().log10();
  const double last_start = snr_db[n - 1] - window_db + 1e-9;

  std::vector<char> ok(static_cast<std::size_t>(n), 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (snr_db[i] > last_start) continue;  // partial window: not constraining
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long count = 0;
    for (Eigen::Index jj = i; jj < n && snr_db[jj] <= snr_db[i] + window_db + 1e-9; ++jj) {
      sx += snr_db[jj];
      sy += lv[jj];
      sxx += snr_db[jj] * snr_db[jj];
      sxy += snr_db[jj] * lv[jj];
      ++count;
    }
    const double denom = sxx - sx * sx / count;
    const double slope = (sxy - sx * sy / count) / denom;
    ok[static_cast<std::size_t>(i)] = std::abs(slope - target_slope) <= tol ? 1 : 0;
  }

  std::optional<double> best;
  bool suffix_ok = true;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    suffix_ok = suffix_ok && ok[static_cast<std::size_t>(i)];
    if (!suffix_ok) break;
    if (snr_db[i] <= last_start) best = snr_db[i];
  }
  return best;
}

// ZZB threshold: onset of the asymptotic -0.1/dB falloff of log10(MSE bound).
inline std::optional<double> zzb_threshold(const BoundCurve& curve,
                                           double slope_tolerance = 0.01,
                                           double window_db = 6.0) {
  if (curve.kind != BoundKind::ZZB)
    throw std::invalid_argument("zzb_threshold: curve kind must be ZZB");
  const Eigen::Index n = curve.snr_grid_db.size();
  if (n < 2 || curve.snr_grid_db[n - 1] - curve.snr_grid_db[0] < 20.0)
    throw std::invalid_argument("zzb_threshold: curve must span at least 20 dB");
  return slope_qualified_threshold(curve.snr_grid_db, curve.values, -0.1, slope_tolerance,
                                   window_db);
}

// Rule of thumb M > N * sigma2 * 10^(threshold_dB/10).
inline double required_measurements(Eigen::Index n, double sigma2, double threshold_snr_db) {
  if (n < 1 || !(sigma2 > 0.0) || !std::isfinite(threshold_snr_db))
    throw std::invalid_argument("required_measurements: bad arguments");
  return static_cast<double>(n) * sigma2 * std::pow(10.0, threshold_snr_db / 10.0);
}

}  // namespace cfreq
