// Windowed complex sinusoids x(omega), their frequency derivatives, the
// window spectrum H(omega) and its exact moment-based constants, and
// K-sinusoid mixtures.  This is the signal geometry the rest of the
// library consumes.
//
// Model: entry n (1-based) of x(omega) is h_n * exp(j*omega*d_n) with
// sample offsets d_n = n - (N+1)/2.  Two normalizations are supported:
//   UnitModulus: h_n == 1,            ||x|| = sqrt(N)
//   UnitEnergy:  sum h_n^2 == 1,      ||x|| = 1
// Window families are defined on h_n^2; h_n = sqrt(window value).
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cfreq {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Normalization { UnitModulus, UnitEnergy };
enum class WindowFamily { AllOnes, Hamming, Hanning, Triangular, Blackman };

inline std::string to_string(WindowFamily f) {
  switch (f) {
    case WindowFamily::AllOnes: return "all-ones";
    case WindowFamily::Hamming: return "hamming";
    case WindowFamily::Hanning: return "hanning";
    case WindowFamily::Triangular: return "triangular";
    case WindowFamily::Blackman: return "blackman";
  }
  return "?";
}

inline std::string to_string(Normalization n) {
  return n == Normalization::UnitModulus ? "unit-modulus" : "unit-energy";
}

// Reduces a frequency to [0, 2*pi).
inline double reduce_mod_2pi(double w) {
  double r = std::fmod(w, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

// Sample offsets d_n = n - (N+1)/2 for n = 1..N.
inline Eigen::VectorXd sample_offsets(Eigen::Index n) {
  Eigen::VectorXd d(n);
  const double mid = (static_cast<double>(n) + 1.0) / 2.0;
  for (Eigen::Index i = 0; i < n; ++i) d[i] = static_cast<double>(i + 1) - mid;
  return d;
}

// Squared window values w_n = h_n^2 before any normalization.
inline Eigen::VectorXd window_squared_values(WindowFamily family, Eigen::Index n) {
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = (n == 1) ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    double v = 1.0;
    switch (family) {
      case WindowFamily::AllOnes: v = 1.0; break;
      case WindowFamily::Hamming: v = 0.54 - 0.46 * std::cos(kTwoPi * x); break;
      case WindowFamily::Hanning: v = 0.5 - 0.5 * std::cos(kTwoPi * x); break;
      case WindowFamily::Triangular: v = 1.0 - std::abs(2.0 * x - 1.0); break;
      case WindowFamily::Blackman:
        v = 0.42 - 0.5 * std::cos(kTwoPi * x) + 0.08 * std::cos(2.0 * kTwoPi * x);
        break;
    }
    w[i] = std::max(v, 0.0);  // guard endpoint rounding below zero
  }
  return w;
}

struct SinusoidManifold {
  Eigen::Index n_samples = 0;
  Eigen::VectorXd window;  // amplitude weights h_n >= 0
  Normalization normalization = Normalization::UnitModulus;
};

// Builds a manifold from squared window values, normalizing per mode.
inline SinusoidManifold manifold_from_window_squared(Eigen::VectorXd window_sq,
                                                     Normalization norm) {
  const Eigen::Index n = window_sq.size();
  if (n < 2) throw std::invalid_argument("manifold: n_samples must be >= 2");
  Eigen::Index nonzero = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (window_sq[i] < 0.0)
      throw std::invalid_argument("manifold: window values must be nonnegative");
    if (window_sq[i] > 0.0) ++nonzero;
  }
  if (nonzero < 2)
    throw std::invalid_argument("manifold: at least two window taps must be nonzero");
  if (norm == Normalization::UnitEnergy) {
    window_sq /= window_sq.sum();
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      if (window_sq[i] != 1.0)
        throw std::invalid_argument(
            "manifold: unit-modulus normalization requires the all-ones window");
  }
  SinusoidManifold m;
  m.n_samples = n;
  m.window = window_sq.cwiseSqrt();
  m.normalization = norm;
  return m;
}

inline SinusoidManifold make_manifold(Eigen::Index n, WindowFamily family,
                                      Normalization norm) {
  return manifold_from_window_squared(window_squared_values(family, n), norm);
}

struct MixtureParams {
  Eigen::VectorXcd gains;
  Eigen::VectorXd frequencies;  // stored reduced mod 2*pi
};

inline MixtureParams make_mixture_params(Eigen::VectorXcd gains,
                                         Eigen::VectorXd frequencies) {
  if (gains.size() != frequencies.size())
    throw std::invalid_argument("mixture params: gains and frequencies must have equal length");
  if (gains.size() < 1)
    throw std::invalid_argument("mixture params: need at least one component");
  for (Eigen::Index i = 0; i < frequencies.size(); ++i)
    frequencies[i] = reduce_mod_2pi(frequencies[i]);
  return MixtureParams{std::move(gains), std::move(frequencies)};
}

namespace detail {

// Evaluates h_n * (j*d_n)^order * exp(j*omega*d_n) without reducing omega.
// Taylor-expansion checks need this analytic (non-wrapped) form; public
// entry points reduce omega first.
inline Eigen::VectorXcd sinusoid_raw(const SinusoidManifold& m, double omega,
                                     int order) {
  const Eigen::Index n = m.n_samples;
  Eigen::VectorXcd x(n);
  const double mid = (static_cast<double>(n) + 1.0) / 2.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(i + 1) - mid;
    std::complex<double> v = std::polar(m.window[i], omega * d);
    if (order == 1) v *= std::complex<double>(0.0, d);
    else if (order == 2) v *= -d * d;
    x[i] = v;
  }
  return x;
}

}  // namespace detail

inline Eigen::VectorXcd sinusoid(const SinusoidManifold& m, double omega) {
  return detail::sinusoid_raw(m, reduce_mod_2pi(omega), 0);
}

inline Eigen::VectorXcd sinusoid_derivative(const SinusoidManifold& m, double omega,
                                            int order) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("sinusoid_derivative: order must be 1 or 2");
  return detail::sinusoid_raw(m, reduce_mod_2pi(omega), order);
}

// Window spectrum H(omega) = sum_n h_n^2 exp(j*omega*d_n).
// Satisfies |<x(w1), x(w2)>| = |H(w1 - w2)|.
inline std::complex<double> window_spectrum(const SinusoidManifold& m, double omega) {
  std::complex<double> h(0.0, 0.0);
  const Eigen::Index n = m.n_samples;
  const double mid = (static_cast<double>(n) + 1.0) / 2.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(i + 1) - mid;
    h += std::polar(m.window[i] * m.window[i], omega * d);
  }
  return h;
}

struct WindowConstants {
  double chi;    // |dH(0)/domega| = |sum w_n d_n|
  double zeta;   // -(N^-2/2) d^2|H(0)|^2/domega^2 = (M0*M2 - M1^2)/N^2
  double tau;    // 1/||dx/domega||
  double alpha;  // 1/(N*tau)
};

// Exact window-moment constants (UnitEnergy only).  With weights w = h^2 and
// moments Mk = sum w d^k:  chi = |M1|, tau = 1/sqrt(M2), alpha = 1/(N tau),
// zeta = (M0*M2 - M1^2)/N^2.  Cauchy-Schwarz gives tau*chi < 1 whenever the
// window has at least two nonzero taps.
inline WindowConstants window_spectrum_derivatives(const SinusoidManifold& m) {
  if (m.normalization != Normalization::UnitEnergy)
    throw std::invalid_argument("window constants require unit-energy normalization");
  const Eigen::Index n = m.n_samples;
  const double mid = (static_cast<double>(n) + 1.0) / 2.0;
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  Eigen::Index nonzero = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = m.window[i] * m.window[i];
    if (w > 0.0) ++nonzero;
    const double d = static_cast<double>(i + 1) - mid;
    m0 += w;
    m1 += w * d;
    m2 += w * d * d;
  }
  if (nonzero < 2)
    throw std::invalid_argument("window constants degenerate: single nonzero tap");
  WindowConstants c;
  c.chi = std::abs(m1);
  c.tau = 1.0 / std::sqrt(m2);
  c.alpha = 1.0 / (static_cast<double>(n) * c.tau);
  c.zeta = (m0 * m2 - m1 * m1) / (static_cast<double>(n) * static_cast<double>(n));
  return c;
}

inline Eigen::VectorXcd mixture(const SinusoidManifold& m, const MixtureParams& p) {
  if (p.gains.size() != p.frequencies.size() || p.gains.size() < 1)
    throw std::invalid_argument("mixture: invalid params");
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(m.n_samples);
  for (Eigen::Index l = 0; l < p.gains.size(); ++l)
    s += p.gains[l] * sinusoid(m, p.frequencies[l]);
  return s;
}

}  // namespace cfreq
