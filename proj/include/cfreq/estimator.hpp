// Two-stage single-sinusoid estimator: coarse detection on a uniform
// frequency grid maximizing the matched-filter cost G, then Newton
// refinement of S(g, omega) with alternating gain updates.
#pragma once

#include <cfreq/measurement.hpp>
#include <cfreq/signal_manifold.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cfreq {

// Precomputed projections Phi x(q) over the detection grid; read-only after
// construction and shareable across threads / repeated trials.
struct ProjectedGrid {
  Eigen::VectorXd omegas;      // G uniform points on [0, 2pi)
  Eigen::MatrixXcd projected;  // M x G, column i = Phi x(omegas[i])
  Eigen::VectorXd norms2;      // squared column norms
  Eigen::Index size() const { return omegas.size(); }
};

struct EstimatorConfig {
  Eigen::Index grid_size = 0;  // 0 -> 4N
  int newton_rounds = 3;
  std::shared_ptr<const ProjectedGrid> projected_columns;  // optional cache
};

struct EstimateResult {
  double omega_hat = 0.0;  // in [0, 2pi)
  std::complex<double> gain_hat{0.0, 0.0};
  double coarse_omega = 0.0;
  std::vector<std::pair<double, double>> newton_trace;  // per round: (omega, |S''|)
  bool converged = false;  // final S'' negative and step not skipped
  bool clamped = false;    // a Newton step left the trust interval
};

namespace detail {
inline Eigen::Index resolve_grid_size(const SinusoidManifold& m, Eigen::Index requested) {
  const Eigen::Index g = requested > 0 ? requested : 4 * m.n_samples;
  if (g < m.n_samples)
    throw std::invalid_argument("estimator: grid_size must be at least N");
  return g;
}
}  // namespace detail

inline ProjectedGrid make_projected_grid(const MeasurementMatrix& a,
                                         const SinusoidManifold& m,
                                         Eigen::Index grid_size = 0) {
  if (a.cols() != m.n_samples)
    throw std::invalid_argument("make_projected_grid: matrix/manifold dimension mismatch");
  const Eigen::Index g = detail::resolve_grid_size(m, grid_size);
  ProjectedGrid pg;
  pg.omegas.resize(g);
  Eigen::MatrixXcd x(m.n_samples, g);
  for (Eigen::Index i = 0; i < g; ++i) {
    pg.omegas[i] = kTwoPi * double(i) / double(g);
    x.col(i) = sinusoid(m, pg.omegas[i]);
  }
  pg.projected = (a.kind == MatrixKind::Identity) ? Eigen::MatrixXcd(a.scale * x)
                                                  : Eigen::MatrixXcd(a.entries * x);
  pg.norms2 = pg.projected.colwise().squaredNorm().real();
  return pg;
}

// S(g, omega) = Re{y^H g Phi x(omega)} - 0.5 |g|^2 ||Phi x(omega)||^2.
inline double refine_cost(const Eigen::VectorXcd& y, const MeasurementMatrix& a,
                          const SinusoidManifold& m, std::complex<double> gain,
                          double omega) {
  const Eigen::VectorXcd px = cfreq::apply(a, detail::sinusoid_raw(m, omega, 0));
  return (y.dot(gain * px)).real() - 0.5 * std::norm(gain) * px.squaredNorm();
}

// (dS/domega, d2S/domega2) at (gain, omega):
//   S'  = Re{(y - g Phi x)^H g Phi x'}
//   S'' = Re{(y - g Phi x)^H g Phi x''} - |g|^2 ||Phi x'||^2
inline std::pair<double, double> refine_derivatives(const Eigen::VectorXcd& y,
                                                    const MeasurementMatrix& a,
                                                    const SinusoidManifold& m,
                                                    std::complex<double> gain,
                                                    double omega) {
  const Eigen::VectorXcd px = cfreq::apply(a, detail::sinusoid_raw(m, omega, 0));
  const Eigen::VectorXcd px1 = cfreq::apply(a, detail::sinusoid_raw(m, omega, 1));
  const Eigen::VectorXcd px2 = cfreq::apply(a, detail::sinusoid_raw(m, omega, 2));
  const Eigen::VectorXcd r = y - gain * px;
  const double s1 = r.dot(gain * px1).real();
  const double s2 = r.dot(gain * px2).real() - std::norm(gain) * px1.squaredNorm();
  return {s1, s2};
}

struct CoarseDetection {
  double q_star = 0.0;
  std::complex<double> gain{0.0, 0.0};
  Eigen::Index grid_index = 0;
};

// argmax over the grid of G(q) = 0.5 |y^H Phi x(q)|^2 / ||Phi x(q)||^2;
// ties resolved toward the smallest grid index.
inline CoarseDetection coarse_detect(const Eigen::VectorXcd& y, const MeasurementMatrix& a,
                                     const SinusoidManifold& m,
                                     const EstimatorConfig& config = {}) {
  if (!y.allFinite()) throw std::invalid_argument("coarse_detect: non-finite measurements");
  if (y.size() != a.rows())
    throw std::invalid_argument("coarse_detect: measurement length mismatch");
  std::shared_ptr<const ProjectedGrid> pg = config.projected_columns;
  if (!pg) pg = std::make_shared<ProjectedGrid>(make_projected_grid(a, m, config.grid_size));
  else if (config.grid_size > 0 && pg->size() != config.grid_size)
    throw std::invalid_argument("coarse_detect: cache size disagrees with grid_size");

  const Eigen::VectorXcd c = pg->projected.adjoint() * y;
  Eigen::Index best = 0;
  double best_val = -1.0;
  for (Eigen::Index i = 0; i < pg->size(); ++i) {
    const double val = pg->norms2[i] > 0.0 ? 0.5 * std::norm(c[i]) / pg->norms2[i] : 0.0;
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }
  CoarseDetection out;
  out.grid_index = best;
  out.q_star = pg->omegas[best];
  out.gain = pg->norms2[best] > 0.0 ? c[best] / pg->norms2[best] : std::complex<double>(0.0);
  return out;
}

// Exactly `rounds` iterations of: Newton step on omega, then gain update
// g <- (Phi x)^H y / ||Phi x||^2.  Steps with |S''| <= 1e-14 |S'| are
// skipped (covers the 0/0 case); steps leaving [start - clamp, start + clamp]
// are clamped to the edge and flagged.
inline EstimateResult newton_refine(
    const Eigen::VectorXcd& y, const MeasurementMatrix& a, const SinusoidManifold& m,
    std::complex<double> gain0, double omega0, int rounds,
    double clamp_halfwidth = std::numeric_limits<double>::infinity()) {
  if (!y.allFinite() || !std::isfinite(omega0) || !std::isfinite(std::abs(gain0)))
    throw std::invalid_argument("newton_refine: non-finite inputs");
  if (rounds < 0) throw std::invalid_argument("newton_refine: rounds must be >= 0");
  EstimateResult res;
  res.coarse_omega = omega0;
  double w = omega0;
  std::complex<double> g = gain0;
  bool last_ok = false;
  double last_s2 = 0.0;
  for (int it = 0; it < rounds; ++it) {
    const auto [s1, s2] = refine_derivatives(y, a, m, g, w);
    last_s2 = s2;
    if (std::abs(s2) <= 1e-14 * std::abs(s1) || !std::isfinite(s1) || !std::isfinite(s2)) {
      last_ok = false;
      res.newton_trace.emplace_back(w, std::abs(s2));
      continue;
    }
    last_ok = true;
    w -= s1 / s2;
    if (std::abs(w - omega0) > clamp_halfwidth) {
      w = omega0 + (w > omega0 ? clamp_halfwidth : -clamp_halfwidth);
      res.clamped = true;
    }
    const Eigen::VectorXcd px = cfreq::apply(a, detail::sinusoid_raw(m, w, 0));
    const double n2 = px.squaredNorm();
    if (n2 > 0.0) g = px.dot(y) / n2;
    res.newton_trace.emplace_back(w, std::abs(s2));
  }
  res.omega_hat = reduce_mod_2pi(w);
  res.gain_hat = g;
  res.converged = last_ok && last_s2 < 0.0;
  return res;
}

// coarse_detect then newton_refine; Newton steps confined to the coarse
// estimate +- two grid spacings.
inline EstimateResult estimate(const Eigen::VectorXcd& y, const MeasurementMatrix& a,
                               const SinusoidManifold& m,
                               const EstimatorConfig& config = {}) {
  EstimatorConfig local = config;
  if (!local.projected_columns)
    local.projected_columns =
        std::make_shared<ProjectedGrid>(make_projected_grid(a, m, config.grid_size));
  const CoarseDetection coarse = coarse_detect(y, a, m, local);
  const double spacing = kTwoPi / double(local.projected_columns->size());
  EstimateResult res = newton_refine(y, a, m, coarse.gain, coarse.q_star,
                                     local.newton_rounds, 2.0 * spacing);
  res.coarse_omega = coarse.q_star;
  return res;
}

// distance on the circle: min(|d| mod 2pi, 2pi - |d| mod 2pi), in [0, pi]
inline double periodic_error(double omega_hat, double omega_true) {
  const double d = std::fmod(std::abs(omega_hat - omega_true), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace cfreq
