// Random compressive measurement matrices, the concentration-inequality
// audit, and noise-whitening reductions.
//
// Matrix entries are i.i.d. zero-mean with variance 1/N:
//   QpskLike:   uniform over {+1, +j, -1, -j} / sqrt(N)
//   Rademacher: uniform over {+1, -1} / sqrt(N)
//   Gaussian:   real N(0, 1/N)
// Matrices regenerate bit-identically from (distribution, seed, M, N).
#pragma once

#include <cfreq/rng.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>

namespace cfreq {

enum class Distribution { QpskLike, Rademacher, Gaussian };
enum class MatrixKind { Random, Identity };
enum class CovarianceKind { White, PerProjection, Folded };

inline std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::QpskLike: return "qpsk";
    case Distribution::Rademacher: return "rademacher";
    case Distribution::Gaussian: return "gaussian";
  }
  return "?";
}

struct NoiseModel {
  double variance = 1.0;
  CovarianceKind covariance_kind = CovarianceKind::White;
};

inline NoiseModel make_noise_model(double variance, CovarianceKind kind) {
  if (!(variance > 0.0)) throw std::invalid_argument("noise variance must be positive");
  return NoiseModel{variance, kind};
}

struct MeasurementMatrix {
  MatrixKind kind = MatrixKind::Random;
  Distribution distribution = Distribution::QpskLike;
  std::uint64_t seed = 0;
  double scale = 1.0;  // identity scaling factor; 1.0 for random matrices
  Eigen::MatrixXcd entries;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

namespace detail {
// Stream tags keeping the independent random streams of this module apart.
inline constexpr std::uint64_t kMatrixStreamTag = 0x4D41;  // matrix entries
inline constexpr std::uint64_t kVectorStreamTag = 0x5645;  // audit test vector
inline constexpr std::uint64_t kTrialStreamTag = 0x5452;   // audit per-trial

inline void fill_matrix(Eigen::MatrixXcd& a, Distribution dist, Eigen::Index m,
                        Eigen::Index n, SplitMix64& g) {
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  const std::complex<double> qpsk[4] = {{s, 0.0}, {0.0, s}, {-s, 0.0}, {0.0, -s}};
  a.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      switch (dist) {
        case Distribution::QpskLike: a(i, j) = qpsk[g.next() >> 62]; break;
        case Distribution::Rademacher:
          a(i, j) = (g.next() >> 63) ? std::complex<double>(-s, 0.0)
                                     : std::complex<double>(s, 0.0);
          break;
        case Distribution::Gaussian: a(i, j) = std::complex<double>(g.normal() * s, 0.0); break;
      }
    }
  }
}
}  // namespace detail

inline MeasurementMatrix sample_matrix(Distribution dist, Eigen::Index m,
                                       Eigen::Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("sample_matrix: M and N must be >= 1");
  MeasurementMatrix a;
  a.kind = MatrixKind::Random;
  a.distribution = dist;
  a.seed = seed;
  a.scale = 1.0;
  SplitMix64 g(derive_stream(seed, static_cast<std::uint64_t>(m),
                             static_cast<std::uint64_t>(n),
                             detail::kMatrixStreamTag + static_cast<std::uint64_t>(dist)));
  detail::fill_matrix(a.entries, dist, m, n, g);
  return a;
}

inline MeasurementMatrix identity_matrix(Eigen::Index n, double scale = 1.0) {
  if (n < 1) throw std::invalid_argument("identity_matrix: N must be >= 1");
  MeasurementMatrix a;
  a.kind = MatrixKind::Identity;
  a.distribution = Distribution::QpskLike;  // unused for identity
  a.seed = 0;
  a.scale = scale;
  a.entries = scale * Eigen::MatrixXcd::Identity(n, n);
  return a;
}

inline Eigen::VectorXcd apply(const MeasurementMatrix& a, const Eigen::VectorXcd& v) {
  if (v.size() != a.cols()) throw std::invalid_argument("apply: dimension mismatch");
  if (a.kind == MatrixKind::Identity) return a.scale * v;
  return a.entries * v;
}

// Concentration exponent c(delta) = delta^2/4 - delta^3/6.
inline double concentration_rate(double delta) {
  return delta * delta / 4.0 - delta * delta * delta / 6.0;
}

// Tail bound 4*exp(-M*c(delta)) on Pr[| (N/M)||Av||^2 - ||v||^2 | > delta].
inline double concentration_bound(Eigen::Index m, double delta) {
  return 4.0 * std::exp(-static_cast<double>(m) * concentration_rate(delta));
}

struct ConcentrationAudit {
  double empirical_tail = 0.0;
  double bound = 0.0;
};

// Draws `trials` fresh matrices, measures how often (N/M)||Av||^2 leaves the
// delta-band around ||v||^2 = 1 for a fixed unit vector v, and returns the
// empirical tail next to the analytic bound.
inline ConcentrationAudit concentration_audit(Distribution dist, Eigen::Index m,
                                              Eigen::Index n, double delta,
                                              long trials, std::uint64_t seed) {
  if (!(delta > 0.0) || concentration_rate(delta) <= 0.0)
    throw std::invalid_argument("concentration_audit: need 0 < delta < 3/2");
  if (m < 1 || n < 1 || trials < 1)
    throw std::invalid_argument("concentration_audit: bad sizes");

  SplitMix64 gv(derive_stream(seed, static_cast<std::uint64_t>(m),
                              static_cast<std::uint64_t>(n), detail::kVectorStreamTag));
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gv.normal_complex();
  v.normalize();

  Eigen::MatrixXcd a;
  long violations = 0;
  const double ratio = static_cast<double>(n) / static_cast<double>(m);
  for (long t = 0; t < trials; ++t) {
    SplitMix64 g(derive_stream(seed, static_cast<std::uint64_t>(t), detail::kTrialStreamTag,
                               static_cast<std::uint64_t>(dist)));
    detail::fill_matrix(a, dist, m, n, g);
    const double q = ratio * (a * v).squaredNorm();
    if (std::abs(q - 1.0) > delta) ++violations;
  }
  return ConcentrationAudit{static_cast<double>(violations) / static_cast<double>(trials),
                            concentration_bound(m, delta)};
}

struct WhitenedMatrix {
  Eigen::MatrixXcd a_eff;
  Eigen::VectorXd k_singular_values;  // singular values of K, descending
};

// Whitens per the reduced noise models:
//   PerProjection (K1): K1 = diag(||row_l||^2),   A_eff = K1^{-1/2} A
//   Folded (K2):        K2 = A A^H,               A_eff = K2^{-1/2} A
// K2^{-1/2} uses a Hermitian eigendecomposition with eigenvalue floor 1e-12.
inline WhitenedMatrix whitened_effective_matrix(const MeasurementMatrix& mat,
                                                CovarianceKind kind) {
  const Eigen::Index m = mat.rows();
  WhitenedMatrix out;
  if (kind == CovarianceKind::PerProjection) {
    Eigen::VectorXd rn2(m);
    for (Eigen::Index i = 0; i < m; ++i) rn2[i] = mat.entries.row(i).squaredNorm();
    if (rn2.minCoeff() <= 1e-12)
      throw std::domain_error("whitening: singular K1, smallest diagonal " +
                              std::to_string(rn2.minCoeff()));
    out.a_eff = rn2.cwiseSqrt().cwiseInverse().asDiagonal() * mat.entries;
    out.k_singular_values = rn2;
    std::sort(out.k_singular_values.begin(), out.k_singular_values.end(),
              std::greater<double>());
    return out;
  }
  if (kind == CovarianceKind::Folded) {
    if (mat.kind != MatrixKind::Identity && m > mat.cols())
      throw std::invalid_argument("whitening: folded model needs M <= N");
    const Eigen::MatrixXcd k2 = mat.entries * mat.entries.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(k2);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("whitening: eigendecomposition failed");
    const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
    const double lo = ev[0], hi = ev[m - 1];
    if (lo <= 1e-12 * std::max(hi, 1.0))
      throw std::domain_error("whitening: singular K2, smallest singular value " +
                              std::to_string(std::max(lo, 0.0)));
    const Eigen::VectorXd inv_sqrt =
        ev.cwiseMax(1e-12).cwiseSqrt().cwiseInverse();
    out.a_eff = es.eigenvectors() * inv_sqrt.asDiagonal() *
                es.eigenvectors().adjoint() * mat.entries;
    out.k_singular_values = ev.reverse();
    return out;
  }
  throw std::invalid_argument("whitening: kind must be PerProjection or Folded");
}

// --- matrix file format ------------------------------------------------
//
// Self-describing text format, bit-exact round trip via hexfloats:
//   cfreq-matrix-v1
//   kind random|identity
//   distribution qpsk|rademacher|gaussian
//   seed <u64>
//   rows <M>
//   cols <N>
//   scale <hexfloat>
//   data
//   <re> <im> <re> <im> ...   (one matrix row per line)

inline void save_matrix(const MeasurementMatrix& a, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_matrix: cannot open " + path);
  f << "cfreq-matrix-v1\n";
  f << "kind " << (a.kind == MatrixKind::Identity ? "identity" : "random") << "\n";
  f << "distribution " << to_string(a.distribution) << "\n";
  f << "seed " << a.seed << "\n";
  f << "rows " << a.rows() << "\n";
  f << "cols " << a.cols() << "\n";
  f << "scale " << std::hexfloat << a.scale << std::defaultfloat << "\n";
  f << "data\n";
  f << std::hexfloat;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) f << ' ';
      f << a.entries(i, j).real() << ' ' << a.entries(i, j).imag();
    }
    f << '\n';
  }
  if (!f) throw std::runtime_error("save_matrix: write failed for " + path);
}

inline MeasurementMatrix load_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_matrix: cannot open " + path);
  std::string magic;
  std::getline(f, magic);
  if (magic != "cfreq-matrix-v1")
    throw std::runtime_error("load_matrix: bad magic line in " + path);
  MeasurementMatrix a;
  std::string key, value;
  Eigen::Index rows = 0, cols = 0;
  while (f >> key) {
    if (key == "data") break;
    if (!(f >> value)) throw std::runtime_error("load_matrix: truncated header");
    if (key == "kind") {
      if (value == "identity") a.kind = MatrixKind::Identity;
      else if (value == "random") a.kind = MatrixKind::Random;
      else throw std::runtime_error("load_matrix: unknown kind " + value);
    } else if (key == "distribution") {
      if (value == "qpsk") a.distribution = Distribution::QpskLike;
      else if (value == "rademacher") a.distribution = Distribution::Rademacher;
      else if (value == "gaussian") a.distribution = Distribution::Gaussian;
      else throw std::runtime_error("load_matrix: unknown distribution " + value);
    } else if (key == "seed") {
      a.seed = std::stoull(value);
    } else if (key == "rows") {
      rows = static_cast<Eigen::Index>(std::stoll(value));
    } else if (key == "cols") {
      cols = static_cast<Eigen::Index>(std::stoll(value));
    } else if (key == "scale") {
      a.scale = std::strtod(value.c_str(), nullptr);
    } else {
      throw std::runtime_error("load_matrix: unknown header key " + key);
    }
  }
  if (key != "data") throw std::runtime_error("load_matrix: missing data section");
  if (rows < 1 || cols < 1) throw std::runtime_error("load_matrix: bad dimensions");
  a.entries.resize(rows, cols);
  std::string tok;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double re, im;
      if (!(f >> tok)) throw std::runtime_error("load_matrix: truncated data");
      re = std::strtod(tok.c_str(), nullptr);
      if (!(f >> tok)) throw std::runtime_error("load_matrix: truncated data");
      im = std::strtod(tok.c_str(), nullptr);
      a.entries(i, j) = std::complex<double>(re, im);
    }
  }
  return a;
}

}  // namespace cfreq
