// Isometry machinery: tangent-plane matrices, smallest singular values and
// their closed forms, empirical isometry-constant estimation over manifold
// grids, sufficient-measurement calculators, and the single-sinusoid regime
// constants with their Taylor error bounds.
#pragma once

#include <cfreq/measurement.hpp>
#include <cfreq/signal_manifold.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cfreq {

enum class IsometryMode { Pairwise, TangentPlane };

inline std::string to_string(IsometryMode m) {
  return m == IsometryMode::Pairwise ? "pairwise" : "tangent";
}

// T(omega) = [x(w_1) ... x(w_K), tau x'(w_1) ... tau x'(w_K)] with
// tau = 1/||x'(w)|| (omega-independent), so every column has unit norm.
struct TangentPlaneMatrix {
  Eigen::MatrixXcd entries;
  Eigen::VectorXd omega;
  double tau = 0.0;
};

inline TangentPlaneMatrix tangent_matrix(const SinusoidManifold& m,
                                         const Eigen::VectorXd& omega) {
  if (m.normalization != Normalization::UnitEnergy)
    throw std::invalid_argument("tangent_matrix: requires a UnitEnergy manifold");
  if (omega.size() < 1) throw std::invalid_argument("tangent_matrix: empty frequency set");
  const double tau = window_spectrum_derivatives(m).tau;
  const Eigen::Index k = omega.size();
  Eigen::MatrixXcd t(m.n_samples, 2 * k);
  for (Eigen::Index l = 0; l < k; ++l) {
    t.col(l) = sinusoid(m, omega[l]);
    t.col(k + l) = tau * sinusoid_derivative(m, omega[l], 1);
  }
  return TangentPlaneMatrix{std::move(t), omega, tau};
}

// Smallest singular value via Jacobi SVD (one-sided, numerically stable).
inline double smallest_singular_value(const Eigen::MatrixXcd& mat) {
  if (mat.rows() < mat.cols())
    throw std::invalid_argument("smallest_singular_value: need rows >= cols");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mat);
  return svd.singularValues()(mat.cols() - 1);
}

// sigma_signal = sqrt(1 - |H(w1 - w2)|) for the pair [x(w1) x(w2)].
inline double pair_singular_value_closed_form(const SinusoidManifold& m, double omega1,
                                              double omega2) {
  if (m.normalization != Normalization::UnitEnergy)
    throw std::invalid_argument("pair_singular_value_closed_form: requires UnitEnergy");
  const double h = std::abs(window_spectrum(m, omega1 - omega2));
  return std::sqrt(std::max(0.0, 1.0 - h));
}

struct SamplerSpec {
  IsometryMode mode = IsometryMode::Pairwise;
  Eigen::Index omega_grid = 0;   // 0 -> 4N uniform points on [0, 2pi)
  Eigen::Index phase_count = 16;
  Eigen::Index gain_count = 8;   // log-spaced gain ratios in [1/4, 4]
  double degenerate_tol = 1e-9;  // reject pairs with ||x(t1) - x(t2)|| below this
  std::vector<double> explicit_omegas;  // overrides the uniform grid when nonempty
};

struct IsometryReport {
  double epsilon_lower = 0.0;  // min over samples of r - 1
  double epsilon_upper = 0.0;  // max over samples of r - 1
  std::pair<double, double> pairwise_snr_deviation_db{0.0, 0.0};  // 20 log10 extremes of r
  std::int64_t samples_evaluated = 0;
  std::int64_t degenerate_filtered = 0;
  std::string config;
};

namespace detail {

inline Eigen::VectorXd isometry_grid(const SinusoidManifold& m, const SamplerSpec& spec) {
  if (!spec.explicit_omegas.empty())
    return Eigen::Map<const Eigen::VectorXd>(spec.explicit_omegas.data(),
                                             static_cast<Eigen::Index>(spec.explicit_omegas.size()));
  const Eigen::Index g = spec.omega_grid > 0 ? spec.omega_grid : 4 * m.n_samples;
  Eigen::VectorXd qs(g);
  for (Eigen::Index i = 0; i < g; ++i) qs[i] = kTwoPi * double(i) / double(g);
  return qs;
}

inline Eigen::MatrixXcd project_columns(const MeasurementMatrix& a, const Eigen::MatrixXcd& x) {
  if (a.kind == MatrixKind::Identity) return a.scale * x;
  return a.entries * x;
}

inline IsometryReport finish_report(double r2_min, double r2_max, std::int64_t samples,
                                    std::int64_t degenerate, std::string config) {
  if (samples == 0)
    throw std::runtime_error("empirical_isometry: every sampled pair was degenerate");
  IsometryReport rep;
  rep.epsilon_lower = std::sqrt(std::max(r2_min, 0.0)) - 1.0;
  rep.epsilon_upper = std::sqrt(r2_max) - 1.0;
  rep.pairwise_snr_deviation_db = {10.0 * std::log10(std::max(r2_min, 1e-300)),
                                   10.0 * std::log10(std::max(r2_max, 1e-300))};
  rep.samples_evaluated = samples;
  rep.degenerate_filtered = degenerate;
  rep.config = std::move(config);
  return rep;
}

}  // namespace detail

// Empirical isometry over the single-sinusoid manifold {g e^{j phi} x(w)}.
//
// Pairwise mode samples differences x(w_i) - rho x(w_j) with rho = g e^{j phi}
// over the grid (the ratio r is invariant to common scaling of the pair, so
// only the relative gain rho matters).  Both Gram matrices are formed once:
// ||A(x_i - rho x_j)||^2 and ||x_i - rho x_j||^2 expand in entries of
// (AX)^H(AX) and of the signal Gram <x_i, x_j> = H(q_j - q_i).
//
// TangentPlane mode reports, for each grid frequency, the exact extremes of
// r over all tangent vectors T(w) q (a 2x2 generalized eigenproblem), which
// dominates any finite q grid.
inline IsometryReport empirical_isometry(const MeasurementMatrix& a,
                                         const SinusoidManifold& m,
                                         const SamplerSpec& spec = {}) {
  if (a.cols() != m.n_samples)
    throw std::invalid_argument("empirical_isometry: matrix/manifold dimension mismatch");
  const Eigen::VectorXd qs = detail::isometry_grid(m, spec);
  const Eigen::Index g = qs.size();
  const double scale_nm = double(m.n_samples) / double(a.rows());
  const bool uniform = spec.explicit_omegas.empty();

  if (spec.mode == IsometryMode::TangentPlane) {
    if (m.normalization != Normalization::UnitEnergy)
      throw std::invalid_argument("empirical_isometry: tangent mode requires UnitEnergy");
    const double tau = window_spectrum_derivatives(m).tau;
    Eigen::MatrixXcd t(m.n_samples, 2);
    double r2_min = std::numeric_limits<double>::infinity(), r2_max = 0.0;
    for (Eigen::Index i = 0; i < g; ++i) {
      t.col(0) = sinusoid(m, qs[i]);
      t.col(1) = tau * sinusoid_derivative(m, qs[i], 1);
      const Eigen::MatrixXcd at = detail::project_columns(a, t);
      const Eigen::Matrix2cd num = scale_nm * (at.adjoint() * at);
      const Eigen::Matrix2cd den = t.adjoint() * t;
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2cd> ges(num, den,
                                                                     Eigen::EigenvaluesOnly);
      r2_min = std::min(r2_min, ges.eigenvalues()(0));
      r2_max = std::max(r2_max, ges.eigenvalues()(1));
    }
    return detail::finish_report(r2_min, r2_max, g, 0,
                                 "tangent omega_grid=" + std::to_string(g) +
                                     " q=exact-extremes");
  }

  Eigen::MatrixXcd x(m.n_samples, g);
  for (Eigen::Index i = 0; i < g; ++i) x.col(i) = sinusoid(m, qs[i]);
  const Eigen::MatrixXcd b = detail::project_columns(a, x);
  const Eigen::MatrixXcd gram_a = b.adjoint() * b;
  // signal Gram <x_i, x_j> = H(q_j - q_i); uniform grids need only G values
  Eigen::VectorXcd hdiff;
  if (uniform) {
    hdiff.resize(g);
    for (Eigen::Index k = 0; k < g; ++k) hdiff[k] = window_spectrum(m, kTwoPi * double(k) / double(g));
  }
  const double s0 = std::abs(window_spectrum(m, 0.0));

  const Eigen::Index np = std::max<Eigen::Index>(spec.phase_count, 1);
  const Eigen::Index ng = std::max<Eigen::Index>(spec.gain_count, 1);
  Eigen::VectorXd cphi(np), sphi(np), gains(ng);
  for (Eigen::Index p = 0; p < np; ++p) {
    cphi[p] = std::cos(kTwoPi * double(p) / double(np));
    sphi[p] = std::sin(kTwoPi * double(p) / double(np));
  }
  for (Eigen::Index t = 0; t < ng; ++t)
    gains[t] = ng == 1 ? 1.0
                       : std::exp(std::log(0.25) + (std::log(4.0) - std::log(0.25)) *
                                                       double(t) / double(ng - 1));

  const double tol2 = spec.degenerate_tol * spec.degenerate_tol;
  double r2_min = std::numeric_limits<double>::infinity(), r2_max = 0.0;
  std::int64_t samples = 0, degenerate = 0;
  for (Eigen::Index i = 0; i < g; ++i) {
    for (Eigen::Index j = i; j < g; ++j) {
      const std::complex<double> gij = gram_a(i, j);
      const std::complex<double> sij =
          uniform ? hdiff[j - i] : window_spectrum(m, qs[j] - qs[i]);
      const double aii = gram_a(i, i).real(), ajj = gram_a(j, j).real();
      for (Eigen::Index t = 0; t < ng; ++t) {
        const double ga = gains[t];
        const double num0 = aii + ga * ga * ajj;
        const double den0 = s0 * (1.0 + ga * ga);
        for (Eigen::Index p = 0; p < np; ++p) {
          const double den =
              den0 - 2.0 * ga * (cphi[p] * sij.real() - sphi[p] * sij.imag());
          if (!(den > tol2)) {
            ++degenerate;
            continue;
          }
          const double num =
              num0 - 2.0 * ga * (cphi[p] * gij.real() - sphi[p] * gij.imag());
          const double r2 = scale_nm * std::max(num, 0.0) / den;
          r2_min = std::min(r2_min, r2);
          r2_max = std::max(r2_max, r2);
          ++samples;
        }
      }
    }
  }
  return detail::finish_report(r2_min, r2_max, samples, degenerate,
                               "pairwise omega_grid=" + std::to_string(g) +
                                   " phases=" + std::to_string(np) +
                                   " gains=" + std::to_string(ng));
}

// Explicit mixture pairs (general K): r over the listed (theta_1, theta_2).
inline IsometryReport empirical_isometry(
    const MeasurementMatrix& a, const SinusoidManifold& m,
    const std::vector<std::pair<MixtureParams, MixtureParams>>& pairs,
    double degenerate_tol = 1e-9) {
  if (a.cols() != m.n_samples)
    throw std::invalid_argument("empirical_isometry: matrix/manifold dimension mismatch");
  if (pairs.empty()) throw std::invalid_argument("empirical_isometry: empty pair list");
  const double scale_nm = double(m.n_samples) / double(a.rows());
  double r2_min = std::numeric_limits<double>::infinity(), r2_max = 0.0;
  std::int64_t samples = 0, degenerate = 0;
  for (const auto& [t1, t2] : pairs) {
    const Eigen::VectorXcd u = mixture(m, t1) - mixture(m, t2);
    const double den = u.squaredNorm();
    if (!(den > degenerate_tol * degenerate_tol)) {
      ++degenerate;
      continue;
    }
    const double r2 = scale_nm * cfreq::apply(a, u).squaredNorm() / den;
    r2_min = std::min(r2_min, r2);
    r2_max = std::max(r2_max, r2);
    ++samples;
  }
  return detail::finish_report(r2_min, r2_max, samples, degenerate,
                               "explicit pairs=" + std::to_string(pairs.size()));
}

// Sufficient measurement count from the covering argument: with
// eps0 = eps/3.5, R = 4 pi N sqrt(N K') / (eps0 delta), K' = K (pairwise) or
// 2K (tangent plane), and S = R^{K'} (6/eps0)^{2K'}, the smallest M with
// 4 S exp(-M c(32 eps/49)) <= fail_prob.  Carried in log-space.  This is a
// sufficiency bound — typically very conservative; practical measurement
// counts come from the ZZB rule of thumb.
inline std::int64_t sufficient_measurements_mixture(Eigen::Index n, Eigen::Index k,
                                                    double epsilon, double delta,
                                                    double fail_prob, IsometryMode mode) {
  if (n < 2 || k < 1)
    throw std::invalid_argument("sufficient_measurements_mixture: need N >= 2, K >= 1");
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("sufficient_measurements_mixture: epsilon must lie in (0,1)");
  if (!(delta > 0.0))
    throw std::invalid_argument("sufficient_measurements_mixture: delta must be positive");
  if (!(fail_prob > 0.0) || !(fail_prob < 1.0))
    throw std::invalid_argument("sufficient_measurements_mixture: fail_prob must lie in (0,1)");
  const double c = concentration_rate(32.0 * epsilon / 49.0);
  if (!(c > 0.0))
    throw std::domain_error("sufficient_measurements_mixture: nonpositive concentration rate");
  const double eps0 = epsilon / 3.5;
  const double kp = (mode == IsometryMode::TangentPlane ? 2.0 : 1.0) * double(k);
  const double ln_r = std::log(4.0 * std::numbers::pi) + std::log(double(n)) +
                      0.5 * std::log(double(n) * kp) - std::log(eps0) - std::log(delta);
  const double ln_s = kp * ln_r + 2.0 * kp * (std::log(6.0) - std::log(eps0));
  const double m = (std::log(4.0) + ln_s - std::log(fail_prob)) / c;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(m)));
}

// Constants of the two-regime single-sinusoid isometry argument:
//   mu            = 4 alpha (eps/2) sqrt(1 - tau chi) / 5
//   cutoff        = mu / N^{1.5}   (close/far separation boundary)
//   sigma_signal  > sqrt(0.4 zeta mu^2 / N) for separations above the cutoff
// side_lobe_peak reports D, the largest |H|^2 local maximum beyond the main
// lobe; the window hypotheses (D < 0.99, |H|^2 non-increasing on
// (0, pi/(2N))) are checked numerically on a 64N-point scan.
struct RegimeConstants {
  double mu = 0.0;
  double sigma_signal_bound = 0.0;
  double close_regime_cutoff = 0.0;
  double side_lobe_peak = 0.0;
};

inline RegimeConstants single_sinusoid_regime_constants(const SinusoidManifold& m,
                                                        double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("single_sinusoid_regime_constants: epsilon must lie in (0,1)");
  const WindowConstants wc = window_spectrum_derivatives(m);  // enforces UnitEnergy
  const double n = double(m.n_samples);

  const Eigen::Index scan = 64 * m.n_samples;
  Eigen::VectorXd h2(scan + 1);
  for (Eigen::Index i = 0; i <= scan; ++i) {
    const double w = std::numbers::pi * double(i) / double(scan);
    h2[i] = std::norm(window_spectrum(m, w));
  }
  const double lobe_edge = std::numbers::pi / (2.0 * n);
  for (Eigen::Index i = 1; i <= scan; ++i) {
    const double w = std::numbers::pi * double(i) / double(scan);
    if (w > lobe_edge) break;
    if (h2[i] > h2[i - 1] + 1e-12)
      throw std::domain_error(
          "single_sinusoid_regime_constants: |H|^2 is not non-increasing on (0, pi/(2N))");
  }
  double side_lobe = 0.0;
  Eigen::Index first_min = -1;
  for (Eigen::Index i = 1; i < scan; ++i) {
    if (h2[i] <= h2[i - 1] && h2[i] <= h2[i + 1]) {
      first_min = i;
      break;
    }
  }
  if (first_min >= 0) side_lobe = h2.tail(scan + 1 - first_min).maxCoeff();
  if (side_lobe >= 0.99)
    throw std::domain_error("single_sinusoid_regime_constants: side-lobe peak D=" +
                            std::to_string(side_lobe) + " is not below 0.99");

  RegimeConstants rc;
  rc.mu = 4.0 * wc.alpha * (epsilon / 2.0) * std::sqrt(1.0 - wc.tau * wc.chi) / 5.0;
  rc.close_regime_cutoff = rc.mu / std::pow(n, 1.5);
  rc.sigma_signal_bound = std::sqrt(0.4 * wc.zeta * rc.mu * rc.mu / n);
  rc.side_lobe_peak = side_lobe;
  return rc;
}

// First-order expansion of the pair combination about the midpoint
// q = (w1 + w2)/2:  X(omega) g = v + e with
//   v = (g1 + g2) x(q) + (Delta/2)(g2 - g1) x'(q),
//   e = g1 e1 + g2 e2 the expansion remainders.
// Returns the analytic bounds ||e|| <= N^2 Delta^2 / (4 sqrt(2)) and
// ||v|| >= sqrt(1 - tau chi) |Delta| / (sqrt(2) tau) together with the
// exactly computed norms (the lower bound requires |Delta| <= 2 tau).
struct TaylorBounds {
  double e_norm_bound = 0.0;
  double v_norm_lower = 0.0;
  double e_norm = 0.0;
  double v_norm = 0.0;
};

inline TaylorBounds taylor_error_bounds(const SinusoidManifold& m, double omega1,
                                        double omega2, const Eigen::Vector2cd& gains) {
  if (std::abs(gains.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("taylor_error_bounds: gains must have unit norm");
  const WindowConstants wc = window_spectrum_derivatives(m);
  const double q = (omega1 + omega2) / 2.0;
  const double delta = omega2 - omega1;
  // unreduced evaluations: the expansion lives on one analytic branch
  const Eigen::VectorXcd x1 = detail::sinusoid_raw(m, omega1, 0);
  const Eigen::VectorXcd x2 = detail::sinusoid_raw(m, omega2, 0);
  const Eigen::VectorXcd xq = detail::sinusoid_raw(m, q, 0);
  const Eigen::VectorXcd xqp = detail::sinusoid_raw(m, q, 1);
  const Eigen::VectorXcd e1 = x1 - (xq - (delta / 2.0) * xqp);
  const Eigen::VectorXcd e2 = x2 - (xq + (delta / 2.0) * xqp);
  const Eigen::VectorXcd e = gains[0] * e1 + gains[1] * e2;
  const Eigen::VectorXcd v =
      (gains[0] + gains[1]) * xq + (delta / 2.0) * (gains[1] - gains[0]) * xqp;
  TaylorBounds tb;
  const double n = double(m.n_samples);
  tb.e_norm_bound = n * n * delta * delta / (4.0 * std::numbers::sqrt2);
  tb.v_norm_lower = std::sqrt(1.0 - wc.tau * wc.chi) * std::abs(delta) /
                    (std::numbers::sqrt2 * wc.tau);
  tb.e_norm = e.norm();
  tb.v_norm = v.norm();
  return tb;
}

}  // namespace cfreq
