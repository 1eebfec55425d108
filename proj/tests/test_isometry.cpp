#include <doctest.h>

#include <cfreq/isometry.hpp>
#include <cfreq/rng.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace cfreq;
using Eigen::MatrixXcd;
using Eigen::Vector2cd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cd = std::complex<double>;

namespace {

const WindowFamily kFamilies[] = {WindowFamily::AllOnes, WindowFamily::Hamming,
                                  WindowFamily::Hanning, WindowFamily::Triangular,
                                  WindowFamily::Blackman};

VectorXd omegas(std::initializer_list<double> ws) {
  VectorXd v(static_cast<Eigen::Index>(ws.size()));
  Eigen::Index i = 0;
  for (double w : ws) v[i++] = w;
  return v;
}

}  // namespace

TEST_CASE("tangent_matrix columns are unit-norm sinusoids and scaled derivatives") {
  auto m = make_manifold(64, WindowFamily::Hanning, Normalization::UnitEnergy);
  auto t = tangent_matrix(m, omegas({0.7, 2.5}));
  REQUIRE(t.entries.cols() == 4);
  CHECK((t.entries.col(0) - sinusoid(m, 0.7)).norm() == 0.0);
  CHECK((t.entries.col(1) - sinusoid(m, 2.5)).norm() == 0.0);
  CHECK((t.entries.col(2) - t.tau * sinusoid_derivative(m, 0.7, 1)).norm() <= 1e-14);
  for (Eigen::Index c = 0; c < 4; ++c)
    CHECK(t.entries.col(c).norm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(t.tau == doctest::Approx(window_spectrum_derivatives(m).tau).epsilon(1e-14));

  auto mod = make_manifold(64, WindowFamily::AllOnes, Normalization::UnitModulus);
  CHECK_THROWS_AS(tangent_matrix(mod, omegas({1.0})), std::invalid_argument);
  CHECK_THROWS_AS(tangent_matrix(m, VectorXd()), std::invalid_argument);
}

TEST_CASE("tangent Gram matrices depend only on frequency differences") {
  auto m = make_manifold(32, WindowFamily::Hamming, Normalization::UnitEnergy);
  const VectorXd base = omegas({0.5, 1.7, 3.1});
  auto t1 = tangent_matrix(m, base);
  auto t2 = tangent_matrix(m, (base.array() + 0.9).matrix());
  const MatrixXcd g1 = t1.entries.adjoint() * t1.entries;
  const MatrixXcd g2 = t2.entries.adjoint() * t2.entries;
  CHECK((g1 - g2).norm() <= 1e-10 * g1.norm());
}

TEST_CASE("smallest_singular_value basics") {
  MatrixXcd ortho = MatrixXcd::Zero(4, 2);
  ortho(0, 0) = 1.0;
  ortho(2, 1) = cd(0.0, 1.0);
  CHECK(smallest_singular_value(ortho) == doctest::Approx(1.0).epsilon(1e-14));

  auto m = make_manifold(32, WindowFamily::Hanning, Normalization::UnitEnergy);
  MatrixXcd dup(32, 2);
  dup.col(0) = sinusoid(m, 1.1);
  dup.col(1) = sinusoid(m, 1.1);
  CHECK(smallest_singular_value(dup) <= 1e-10);
  CHECK_THROWS_AS(smallest_singular_value(MatrixXcd::Zero(2, 4)), std::invalid_argument);
}

TEST_CASE("tangent-plane smallest singular value matches sqrt(1 - tau chi)") {
  for (auto fam : kFamilies) {
    for (Eigen::Index n : {16, 64, 256}) {
      auto m = make_manifold(n, fam, Normalization::UnitEnergy);
      const auto wc = window_spectrum_derivatives(m);
      const double closed = std::sqrt(1.0 - wc.tau * wc.chi);
      for (double w : {0.0, 1.3}) {
        auto t = tangent_matrix(m, omegas({w}));
        CHECK(std::abs(smallest_singular_value(t.entries) - closed) <= 1e-8);
      }
    }
  }
}

TEST_CASE("pair_singular_value_closed_form matches the SVD oracle") {
  auto m = make_manifold(64, WindowFamily::Hamming, Normalization::UnitEnergy);
  CHECK(pair_singular_value_closed_form(m, 1.4, 1.4) == 0.0);

  // Dirichlet null of the all-ones window at DFT spacing
  auto ones = make_manifold(64, WindowFamily::AllOnes, Normalization::UnitEnergy);
  CHECK(pair_singular_value_closed_form(ones, 0.0, kTwoPi / 64.0) ==
        doctest::Approx(1.0).epsilon(1e-12));

  MatrixXcd x(64, 2);
  x.col(0) = sinusoid(m, 0.3);
  x.col(1) = sinusoid(m, 0.3 + std::numbers::pi);
  CHECK(std::abs(pair_singular_value_closed_form(m, 0.3, 0.3 + std::numbers::pi) -
                 smallest_singular_value(x)) <= 1e-8);

  auto hann = make_manifold(64, WindowFamily::Hanning, Normalization::UnitEnergy);
  SplitMix64 rng(derive_stream(5, 21));
  for (int rep = 0; rep < 100; ++rep) {
    const double w = kTwoPi * rng.uniform();
    const double dw = (rng.uniform() - 0.5) * kTwoPi;
    MatrixXcd pairm(64, 2);
    pairm.col(0) = sinusoid(hann, w);
    pairm.col(1) = sinusoid(hann, w + dw);
    CHECK(std::abs(pair_singular_value_closed_form(hann, w, w + dw) -
                   smallest_singular_value(pairm)) <= 1e-8);
  }

  auto mod = make_manifold(64, WindowFamily::AllOnes, Normalization::UnitModulus);
  CHECK_THROWS_AS(pair_singular_value_closed_form(mod, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("empirical_isometry with an identity matrix reports zero epsilon") {
  auto m = make_manifold(64, WindowFamily::AllOnes, Normalization::UnitModulus);
  auto rep = empirical_isometry(identity_matrix(64), m);
  CHECK(std::abs(rep.epsilon_lower) <= 1e-10);
  CHECK(std::abs(rep.epsilon_upper) <= 1e-10);
  CHECK(std::abs(rep.pairwise_snr_deviation_db.first) <= 1e-9);
  CHECK(std::abs(rep.pairwise_snr_deviation_db.second) <= 1e-9);
  CHECK(rep.samples_evaluated > 0);

  auto me = make_manifold(48, WindowFamily::Hanning, Normalization::UnitEnergy);
  SamplerSpec tp;
  tp.mode = IsometryMode::TangentPlane;
  auto rep2 = empirical_isometry(identity_matrix(48), me, tp);
  CHECK(std::abs(rep2.epsilon_lower) <= 1e-10);
  CHECK(std::abs(rep2.epsilon_upper) <= 1e-10);
  CHECK(rep2.samples_evaluated == 4 * 48);
}

TEST_CASE("empirical_isometry pairwise matches a brute-force oracle") {
  const Eigen::Index n = 16, rows = 8;
  auto m = make_manifold(n, WindowFamily::Hamming, Normalization::UnitEnergy);
  auto a = sample_matrix(Distribution::QpskLike, rows, n, 3);
  SamplerSpec spec;
  spec.explicit_omegas = {0.3, 1.9, 4.0};
  spec.phase_count = 4;
  spec.gain_count = 3;  // {1/4, 1, 4} -- includes the degenerate rho = 1
  auto rep = empirical_isometry(a, m, spec);

  double r2_min = std::numeric_limits<double>::infinity(), r2_max = 0.0;
  std::int64_t samples = 0, degenerate = 0;
  const double gains[3] = {0.25, 1.0, 4.0};
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      const VectorXcd xi = sinusoid(m, spec.explicit_omegas[size_t(i)]);
      const VectorXcd xj = sinusoid(m, spec.explicit_omegas[size_t(j)]);
      for (double ga : gains) {
        for (int p = 0; p < 4; ++p) {
          const cd rho = ga * std::polar(1.0, kTwoPi * p / 4.0);
          const VectorXcd u = xi - rho * xj;
          if (!(u.norm() > 1e-9)) {
            ++degenerate;
            continue;
          }
          const double r2 = (double(n) / double(rows)) *
                            cfreq::apply(a, u).squaredNorm() / u.squaredNorm();
          r2_min = std::min(r2_min, r2);
          r2_max = std::max(r2_max, r2);
          ++samples;
        }
      }
    }
  }
  CHECK(rep.samples_evaluated == samples);
  CHECK(rep.degenerate_filtered == degenerate);
  CHECK(rep.degenerate_filtered == 3);  // each i == j pair at rho exactly 1
  CHECK(rep.epsilon_lower == doctest::Approx(std::sqrt(r2_min) - 1.0).epsilon(1e-12));
  CHECK(rep.epsilon_upper == doctest::Approx(std::sqrt(r2_max) - 1.0).epsilon(1e-12));
  CHECK(rep.pairwise_snr_deviation_db.first ==
        doctest::Approx(10.0 * std::log10(r2_min)).epsilon(1e-12));
  CHECK(rep.pairwise_snr_deviation_db.second ==
        doctest::Approx(10.0 * std::log10(r2_max)).epsilon(1e-12));
}

TEST_CASE("empirical_isometry tangent mode attains the exact q-extremes") {
  const Eigen::Index n = 16, rows = 8;
  auto m = make_manifold(n, WindowFamily::Hanning, Normalization::UnitEnergy);
  auto a = sample_matrix(Distribution::Gaussian, rows, n, 9);
  SamplerSpec spec;
  spec.mode = IsometryMode::TangentPlane;
  spec.explicit_omegas = {1.2};
  auto rep = empirical_isometry(a, m, spec);
  CHECK(rep.samples_evaluated == 1);

  auto t = tangent_matrix(m, omegas({1.2}));
  const MatrixXcd at = a.entries * t.entries;
  const Eigen::Matrix2cd num = (double(n) / double(rows)) * (at.adjoint() * at);
  const Eigen::Matrix2cd den = t.entries.adjoint() * t.entries;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2cd> ges(num, den,
                                                                 Eigen::EigenvaluesOnly);
  CHECK(rep.epsilon_lower ==
        doctest::Approx(std::sqrt(ges.eigenvalues()(0)) - 1.0).epsilon(1e-12));
  CHECK(rep.epsilon_upper ==
        doctest::Approx(std::sqrt(ges.eigenvalues()(1)) - 1.0).epsilon(1e-12));

  // every sampled unit q stays inside the reported extremes
  SplitMix64 rng(derive_stream(31, 4));
  for (int rep_i = 0; rep_i < 500; ++rep_i) {
    Vector2cd q(rng.normal_complex(), rng.normal_complex());
    const VectorXcd tq = t.entries * q;
    const double r = std::sqrt(double(n) / double(rows)) *
                     cfreq::apply(a, VectorXcd(tq)).norm() / tq.norm();
    CHECK(r >= 1.0 + rep.epsilon_lower - 1e-9);
    CHECK(r <= 1.0 + rep.epsilon_upper + 1e-9);
  }
}

TEST_CASE("empirical_isometry deviation extremes shrink with more measurements") {
  auto m = make_manifold(64, WindowFamily::AllOnes, Normalization::UnitModulus);
  auto small = empirical_isometry(sample_matrix(Distribution::QpskLike, 16, 64, 5), m);
  auto large = empirical_isometry(sample_matrix(Distribution::QpskLike, 64, 64, 5), m);
  CHECK(large.pairwise_snr_deviation_db.second < small.pairwise_snr_deviation_db.second);
  CHECK(large.pairwise_snr_deviation_db.first > small.pairwise_snr_deviation_db.first);
  // deviation entries are consistent with the epsilon extremes
  CHECK(small.pairwise_snr_deviation_db.first ==
        doctest::Approx(20.0 * std::log10(1.0 + small.epsilon_lower)).epsilon(1e-9));
  CHECK(small.pairwise_snr_deviation_db.second ==
        doctest::Approx(20.0 * std::log10(1.0 + small.epsilon_upper)).epsilon(1e-9));
}

TEST_CASE("empirical_isometry explicit mixture pairs and degenerate filtering") {
  const Eigen::Index n = 32, rows = 12;
  auto m = make_manifold(n, WindowFamily::Hamming, Normalization::UnitEnergy);
  auto a = sample_matrix(Distribution::Rademacher, rows, n, 13);

  VectorXcd g1(2), g2(2);
  g1 << cd(1.0, 0.2), cd(-0.4, 0.7);
  g2 << cd(0.9, 0.1), cd(-0.5, 0.6);
  VectorXd w1(2), w2(2);
  w1 << 0.4, 2.0;
  w2 << 0.5, 2.1;
  std::vector<std::pair<MixtureParams, MixtureParams>> pairs;
  pairs.emplace_back(make_mixture_params(g1, w1), make_mixture_params(g2, w2));
  pairs.emplace_back(make_mixture_params(g1, w1), make_mixture_params(g1, w2));
  pairs.emplace_back(make_mixture_params(g1, w1), make_mixture_params(g1, w1));  // degenerate

  auto rep = empirical_isometry(a, m, pairs);
  CHECK(rep.samples_evaluated == 2);
  CHECK(rep.degenerate_filtered == 1);

  double r_min = std::numeric_limits<double>::infinity(), r_max = 0.0;
  for (int i = 0; i < 2; ++i) {
    const VectorXcd u = mixture(m, pairs[size_t(i)].first) - mixture(m, pairs[size_t(i)].second);
    const double r =
        std::sqrt(double(n) / double(rows)) * cfreq::apply(a, u).norm() / u.norm();
    r_min = std::min(r_min, r);
    r_max = std::max(r_max, r);
  }
  CHECK(rep.epsilon_lower == doctest::Approx(r_min - 1.0).epsilon(1e-12));
  CHECK(rep.epsilon_upper == doctest::Approx(r_max - 1.0).epsilon(1e-12));

  std::vector<std::pair<MixtureParams, MixtureParams>> all_degenerate(
      1, {make_mixture_params(g1, w1), make_mixture_params(g1, w1)});
  CHECK_THROWS_AS(empirical_isometry(a, m, all_degenerate), std::runtime_error);
  const std::vector<std::pair<MixtureParams, MixtureParams>> empty;
  CHECK_THROWS_AS(empirical_isometry(a, m, empty), std::invalid_argument);
}

TEST_CASE("sufficient_measurements_mixture monotonicity and scaling") {
  using M = std::int64_t;
  const auto smm = [](Eigen::Index n, Eigen::Index k, double e, double d, double p,
                      IsometryMode mode) {
    return sufficient_measurements_mixture(n, k, e, d, p, mode);
  };
  const M base = smm(256, 1, 0.5, 0.1, 0.01, IsometryMode::Pairwise);
  CHECK(base > 0);
  // fail_prob down => M strictly up
  CHECK(smm(256, 1, 0.5, 0.1, 0.001, IsometryMode::Pairwise) > base);
  // non-increasing in epsilon and delta
  CHECK(smm(256, 1, 0.25, 0.1, 0.01, IsometryMode::Pairwise) >= base);
  CHECK(smm(256, 1, 0.5, 0.05, 0.01, IsometryMode::Pairwise) >= base);
  // non-decreasing in N and K; tangent mode doubles the covering dimension
  CHECK(smm(512, 1, 0.5, 0.1, 0.01, IsometryMode::Pairwise) >= base);
  CHECK(smm(256, 2, 0.5, 0.1, 0.01, IsometryMode::Pairwise) >= base);
  CHECK(smm(256, 1, 0.5, 0.1, 0.01, IsometryMode::TangentPlane) > base);

  // N-scaling tracks log(N K / (eps delta)) within 20%
  const double m_ratio = double(smm(4096, 1, 0.5, 0.1, 0.01, IsometryMode::Pairwise)) /
                         double(base);
  const double log_ratio = std::log(4096.0 * 2.0 * 10.0) / std::log(256.0 * 2.0 * 10.0);
  CHECK(std::abs(m_ratio - log_ratio) <= 0.2 * log_ratio);

  // doubling K scales M by slightly less than 2: the union-bound constant
  // (ln 4 - ln p)/c does not double
  const double c = concentration_rate(32.0 * 0.5 / 49.0);
  const double slack = std::ceil((std::log(4.0) - std::log(0.01)) / c) + 2.0;
  const M m1 = base, m2 = smm(256, 2, 0.5, 0.1, 0.01, IsometryMode::Pairwise);
  CHECK(double(m2) > 2.0 * double(m1) - slack);
  CHECK(m2 > m1);

  CHECK_THROWS_AS(smm(256, 1, 0.0, 0.1, 0.01, IsometryMode::Pairwise), std::invalid_argument);
  CHECK_THROWS_AS(smm(256, 1, 1.0, 0.1, 0.01, IsometryMode::Pairwise), std::invalid_argument);
  CHECK_THROWS_AS(smm(256, 1, 0.5, 0.0, 0.01, IsometryMode::Pairwise), std::invalid_argument);
  CHECK_THROWS_AS(smm(256, 1, 0.5, 0.1, 0.0, IsometryMode::Pairwise), std::invalid_argument);
  CHECK_THROWS_AS(smm(256, 1, 0.5, 0.1, 1.0, IsometryMode::Pairwise), std::invalid_argument);
  CHECK_THROWS_AS(smm(1, 1, 0.5, 0.1, 0.01, IsometryMode::Pairwise), std::invalid_argument);
}

TEST_CASE("single_sinusoid_regime_constants closed forms and window checks") {
  // symmetric window: chi = 0, so mu = 4 alpha (eps/2) / 5, linear in eps
  auto ones = make_manifold(64, WindowFamily::AllOnes, Normalization::UnitEnergy);
  const auto wc = window_spectrum_derivatives(ones);
  auto rc = single_sinusoid_regime_constants(ones, 0.5);
  CHECK(rc.mu == doctest::Approx(4.0 * wc.alpha * 0.25 / 5.0).epsilon(1e-12));
  CHECK(rc.close_regime_cutoff == doctest::Approx(rc.mu / std::pow(64.0, 1.5)).epsilon(1e-12));
  CHECK(rc.sigma_signal_bound ==
        doctest::Approx(std::sqrt(0.4 * wc.zeta * rc.mu * rc.mu / 64.0)).epsilon(1e-12));
  auto rc_small = single_sinusoid_regime_constants(ones, 0.001);
  CHECK(rc_small.mu == doctest::Approx(rc.mu * 0.001 / 0.5).epsilon(1e-12));
  // Dirichlet first side lobe of |H|^2 is about (2/3pi)^2
  CHECK(rc.side_lobe_peak > 0.01);
  CHECK(rc.side_lobe_peak < 0.1);

  // exact sigma_signal at the cutoff separation dominates the Taylor bound
  auto ham = make_manifold(256, WindowFamily::Hamming, Normalization::UnitEnergy);
  auto rch = single_sinusoid_regime_constants(ham, 0.5);
  CHECK(pair_singular_value_closed_form(ham, 0.0, rch.close_regime_cutoff) >=
        rch.sigma_signal_bound);

  // window with taps at distance 2: |H(pi)| = 1, side-lobe check must reject
  VectorXd bad(3);
  bad << 1.0, 0.0, 1.0;
  auto pathological = manifold_from_window_squared(bad, Normalization::UnitEnergy);
  bool threw = false;
  try {
    single_sinusoid_regime_constants(pathological, 0.5);
  } catch (const std::domain_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("side-lobe") != std::string::npos);
  }
  CHECK(threw);

  CHECK_THROWS_AS(single_sinusoid_regime_constants(ones, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(single_sinusoid_regime_constants(ones, 1.0), std::invalid_argument);
}

TEST_CASE("taylor_error_bounds at zero separation") {
  auto m = make_manifold(64, WindowFamily::Hamming, Normalization::UnitEnergy);
  Vector2cd g(cd(1.0 / std::numbers::sqrt2, 0.0), cd(0.0, 1.0 / std::numbers::sqrt2));
  auto tb = taylor_error_bounds(m, 1.3, 1.3, g);
  CHECK(tb.e_norm_bound == 0.0);
  CHECK(tb.v_norm_lower == 0.0);
  CHECK(tb.e_norm == 0.0);
  CHECK(tb.v_norm == doctest::Approx(std::abs(g[0] + g[1])).epsilon(1e-12));
}

TEST_CASE("taylor_error_bounds example at N=64, small separation") {
  auto m = make_manifold(64, WindowFamily::Hamming, Normalization::UnitEnergy);
  Vector2cd g(cd(1.0 / std::numbers::sqrt2, 0.0), cd(1.0 / std::numbers::sqrt2, 0.0));
  auto tb = taylor_error_bounds(m, 2.0, 2.0 + 1e-3, g);
  CHECK(tb.e_norm_bound == doctest::Approx(64.0 * 64.0 * 1e-6 / (4.0 * std::numbers::sqrt2))
                               .epsilon(1e-12));
  CHECK(tb.e_norm <= tb.e_norm_bound);
  CHECK(tb.v_norm >= tb.v_norm_lower);
}

TEST_CASE("taylor_error_bounds inequalities hold on randomized draws") {
  auto m = make_manifold(64, WindowFamily::Hanning, Normalization::UnitEnergy);
  const double tau = window_spectrum_derivatives(m).tau;
  SplitMix64 rng(derive_stream(77, 8));
  for (int rep = 0; rep < 100; ++rep) {
    const double w1 = kTwoPi * rng.uniform();
    const double delta = 2.0 * tau * rng.uniform_pos();  // bound valid for |D| <= 2 tau
    Vector2cd g(rng.normal_complex(), rng.normal_complex());
    g /= g.norm();
    auto tb = taylor_error_bounds(m, w1, w1 + delta, g);
    CHECK(tb.e_norm <= tb.e_norm_bound);
    CHECK(tb.v_norm >= tb.v_norm_lower);

    // decomposition identity: X(omega) g = v + e
    const VectorXcd lhs = g[0] * detail::sinusoid_raw(m, w1, 0) +
                          g[1] * detail::sinusoid_raw(m, w1 + delta, 0);
    const double q = w1 + delta / 2.0;
    const VectorXcd v = (g[0] + g[1]) * detail::sinusoid_raw(m, q, 0) +
                        (delta / 2.0) * (g[1] - g[0]) * detail::sinusoid_raw(m, q, 1);
    CHECK((lhs - v).norm() == doctest::Approx(tb.e_norm).epsilon(1e-9));
  }
  Vector2cd big(cd(1.0, 0.0), cd(1.0, 0.0));
  CHECK_THROWS_AS(taylor_error_bounds(m, 0.0, 0.1, big), std::invalid_argument);
}
