#pragma once

// Experiment runner: Monte Carlo RMSE sweeps, isometry sweeps, bound-curve
// reports, sufficiency tables, and CSV persistence with config headers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <cfreq/bounds.hpp>
#include <cfreq/estimator.hpp>
#include <cfreq/isometry.hpp>
#include <cfreq/measurement.hpp>
#include <cfreq/rng.hpp>
#include <cfreq/signal_manifold.hpp>

namespace cfreq {

inline WindowFamily parse_window_family(const std::string& s) {
  if (s == "all-ones") return WindowFamily::AllOnes;
  if (s == "hamming") return WindowFamily::Hamming;
  if (s == "hanning") return WindowFamily::Hanning;
  if (s == "triangular") return WindowFamily::Triangular;
  if (s == "blackman") return WindowFamily::Blackman;
  throw std::invalid_argument("unknown window family: " + s);
}

inline Normalization parse_normalization(const std::string& s) {
  if (s == "unit-modulus") return Normalization::UnitModulus;
  if (s == "unit-energy") return Normalization::UnitEnergy;
  throw std::invalid_argument("unknown normalization: " + s);
}

inline Distribution parse_distribution(const std::string& s) {
  if (s == "qpsk") return Distribution::QpskLike;
  if (s == "rademacher") return Distribution::Rademacher;
  if (s == "gaussian") return Distribution::Gaussian;
  throw std::invalid_argument("unknown distribution: " + s);
}

inline IsometryMode parse_isometry_mode(const std::string& s) {
  if (s == "pairwise") return IsometryMode::Pairwise;
  if (s == "tangent") return IsometryMode::TangentPlane;
  throw std::invalid_argument("unknown isometry mode: " + s);
}

// x-axis of every sweep: effective per-measurement SNR M/(N sigma^2) in dB.
inline double noise_variance(Eigen::Index m_rows, Eigen::Index n, double snr_db) {
  return static_cast<double>(m_rows) /
         (static_cast<double>(n) * std::pow(10.0, snr_db / 10.0));
}

inline std::vector<double> default_snr_grid(double lo = -30.0, double hi = 6.0,
                                            double step = 1.0) {
  std::vector<double> g;
  for (double s = lo; s <= hi + 1e-12; s += step) g.push_back(s);
  return g;
}

struct ExperimentConfig {
  Eigen::Index n = 256;
  std::vector<Eigen::Index> m_list{10, 25, 40, 60, 256};
  bool include_identity = true;
  std::vector<double> snr_grid_db = default_snr_grid();
  int trials = 2000;
  std::uint64_t seed = 1;
  WindowFamily window = WindowFamily::AllOnes;
  Normalization normalization = Normalization::UnitModulus;
  Distribution distribution = Distribution::QpskLike;
  Eigen::Index grid_size = 0;  // estimator coarse grid, 0 -> 4N
  int newton_rounds = 3;
  int threads = 1;
  Eigen::Index isometry_grid = 0;  // frequency grid for isometry sweeps, 0 -> 2N
  Eigen::Index isometry_phases = 16;
  Eigen::Index isometry_gains = 8;
  std::string output_dir = ".";
};

inline void validate(const ExperimentConfig& c) {
  if (c.n < 2) throw std::invalid_argument("config: N must be >= 2");
  if (c.m_list.empty()) throw std::invalid_argument("config: M list must be nonempty");
  for (Eigen::Index m : c.m_list)
    if (m < 1) throw std::invalid_argument("config: every M must be >= 1");
  if (c.snr_grid_db.empty()) throw std::invalid_argument("config: SNR grid must be nonempty");
  for (std::size_t i = 1; i < c.snr_grid_db.size(); ++i)
    if (!(c.snr_grid_db[i] > c.snr_grid_db[i - 1]))
      throw std::invalid_argument("config: SNR grid must be strictly ascending");
  if (c.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (c.grid_size != 0 && c.grid_size < c.n)
    throw std::invalid_argument("config: grid_size must be 0 or >= N");
  if (c.newton_rounds < 0) throw std::invalid_argument("config: newton_rounds must be >= 0");
  if (c.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (c.isometry_grid < 0) throw std::invalid_argument("config: isometry_grid must be >= 0");
  if (c.isometry_phases < 1 || c.isometry_gains < 1)
    throw std::invalid_argument("config: isometry phase/gain counts must be >= 1");
}

// RMSE falls as sqrt(CRB) ~ sigma, i.e. -0.05 decades of log10(rmse) per dB;
// tolerance is looser than the bound detector's to absorb Monte Carlo noise.
inline constexpr double kRmseSlopeTarget = -0.05;
inline constexpr double kRmseSlopeTolerance = 0.02;

inline std::optional<double> rmse_threshold(const std::vector<double>& snr_db,
                                            const std::vector<double>& rmse_rad,
                                            double window_db = 6.0) {
  const Eigen::VectorXd s =
      Eigen::Map<const Eigen::VectorXd>(snr_db.data(), static_cast<Eigen::Index>(snr_db.size()));
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(
      rmse_rad.data(), static_cast<Eigen::Index>(rmse_rad.size()));
  return slope_qualified_threshold(s, v, kRmseSlopeTarget, kRmseSlopeTolerance, window_db);
}

struct RmseCurve {
  Eigen::Index m = 0;  // matrix rows (equals N for the identity run)
  bool identity = false;
  std::vector<double> snr_grid_db;
  std::vector<double> rmse_rad;
  std::vector<int> trial_counts;
  std::optional<double> threshold_db;
  bool low_trial_warning = false;  // trials < 100: threshold unreliable
};

namespace detail {

// Stream tag layout: high 32 bits distinguish the matrix kind (0 random,
// 1 identity) so the identity run at M = N never reuses random-run streams.
inline std::uint64_t trial_tag(bool identity, Eigen::Index m_rows) {
  const std::uint64_t kind = identity ? 1u : 0u;
  return (kind << 32) | static_cast<std::uint64_t>(m_rows);
}

inline void rmse_trial_range(const ExperimentConfig& cfg, const MeasurementMatrix& a,
                             const SinusoidManifold& mm, const EstimatorConfig& est,
                             std::uint64_t tag, std::size_t snr_idx, double sigma,
                             int t0, int t1, std::vector<double>& errs) {
  const Eigen::Index rows = a.rows();
  for (int t = t0; t < t1; ++t) {
    SplitMix64 rng(derive_stream(cfg.seed, tag, static_cast<std::uint64_t>(snr_idx),
                                 static_cast<std::uint64_t>(t)));
    const double omega = kTwoPi * rng.uniform();
    const double phase = kTwoPi * rng.uniform();
    Eigen::VectorXcd y =
        std::polar(1.0, phase) * cfreq::apply(a, sinusoid(mm, omega));
    for (Eigen::Index i = 0; i < rows; ++i) y[i] += sigma * rng.normal_complex();
    const EstimateResult res = estimate(y, a, mm, est);
    errs[static_cast<std::size_t>(t)] = periodic_error(res.omega_hat, omega);
  }
}

inline RmseCurve rmse_curve_for_matrix(const ExperimentConfig& cfg,
                                       const MeasurementMatrix& a,
                                       const SinusoidManifold& mm, bool identity) {
  RmseCurve curve;
  curve.m = a.rows();
  curve.identity = identity;
  curve.snr_grid_db = cfg.snr_grid_db;
  curve.low_trial_warning = cfg.trials < 100;

  EstimatorConfig est;
  est.grid_size = cfg.grid_size;
  est.newton_rounds = cfg.newton_rounds;
  est.projected_columns =
      std::make_shared<ProjectedGrid>(make_projected_grid(a, mm, cfg.grid_size));

  const std::uint64_t tag = trial_tag(identity, a.rows());
  for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
    const double sigma2 = noise_variance(a.rows(), cfg.n, cfg.snr_grid_db[si]);
    const double sigma = std::sqrt(sigma2);
    std::vector<double> errs(static_cast<std::size_t>(cfg.trials), 0.0);
    const int workers = std::min(cfg.threads, cfg.trials);
    if (workers <= 1) {
      rmse_trial_range(cfg, a, mm, est, tag, si, sigma, 0, cfg.trials, errs);
    } else {
      // fixed per-trial streams + slot-per-trial writes keep the result
      // identical for any worker count
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> eptrs(static_cast<std::size_t>(workers));
      const int chunk = (cfg.trials + workers - 1) / workers;
      for (int w = 0; w < workers; ++w) {
        const int t0 = w * chunk;
        const int t1 = std::min(cfg.trials, t0 + chunk);
        pool.emplace_back([&, w, t0, t1] {
          try {
            rmse_trial_range(cfg, a, mm, est, tag, si, sigma, t0, t1, errs);
          } catch (...) {
            eptrs[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (const auto& e : eptrs)
        if (e) std::rethrow_exception(e);
    }
    double sq = 0.0;
    for (double e : errs) sq += e * e;
    curve.rmse_rad.push_back(std::sqrt(sq / static_cast<double>(cfg.trials)));
    curve.trial_counts.push_back(cfg.trials);
  }
  curve.threshold_db = rmse_threshold(curve.snr_grid_db, curve.rmse_rad);
  return curve;
}

}  // namespace detail

// One matrix per M (reused across all SNR points); per-trial draws are
// omega, phase, then the M noise samples, from a stream derived from
// (seed, kind|M, snr index, trial index).
inline std::vector<RmseCurve> run_rmse_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const SinusoidManifold mm = make_manifold(cfg.n, cfg.window, cfg.normalization);
  std::vector<RmseCurve> curves;
  for (Eigen::Index m : cfg.m_list) {
    const MeasurementMatrix a = sample_matrix(cfg.distribution, m, cfg.n, cfg.seed);
    curves.push_back(detail::rmse_curve_for_matrix(cfg, a, mm, false));
  }
  if (cfg.include_identity) {
    const MeasurementMatrix id = identity_matrix(cfg.n);
    curves.push_back(detail::rmse_curve_for_matrix(cfg, id, mm, true));
  }
  return curves;
}

struct IsometrySweepRow {
  Eigen::Index m = 0;
  bool identity = false;
  IsometryReport report;
};

// Same matrices as the RMSE sweep; samples the gain/phase/frequency manifold
// pairwise on a fixed grid, so extremes are grid-dependent lower bounds.
inline std::vector<IsometrySweepRow> run_isometry_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const SinusoidManifold mm = make_manifold(cfg.n, cfg.window, cfg.normalization);
  SamplerSpec spec;
  spec.mode = IsometryMode::Pairwise;
  spec.omega_grid = cfg.isometry_grid > 0 ? cfg.isometry_grid : 2 * cfg.n;
  spec.phase_count = cfg.isometry_phases;
  spec.gain_count = cfg.isometry_gains;
  std::vector<IsometrySweepRow> rows;
  for (Eigen::Index m : cfg.m_list) {
    const MeasurementMatrix a = sample_matrix(cfg.distribution, m, cfg.n, cfg.seed);
    rows.push_back({m, false, empirical_isometry(a, mm, spec)});
  }
  if (cfg.include_identity) {
    const MeasurementMatrix id = identity_matrix(cfg.n);
    rows.push_back({cfg.n, true, empirical_isometry(id, mm, spec)});
  }
  return rows;
}

struct BoundsReport {
  Eigen::Index n = 0;
  BoundCurve crb;  // per-measurement effective SNR axis, M_eff = N
  BoundCurve zzb;
  double sigma2 = 1.0;      // noise variance used for the required-M evaluation
  double required_m = 0.0;  // N * sigma2 * 10^(threshold/10)
  std::string rule_line;    // N=256 comparison against the M >= max{40, 25.6 sigma2} rule
};

// CRB and ZZB vs effective SNR at M_eff = N (so snr_db = -10 log10 sigma^2),
// plus the slope-detected ZZB threshold and the measurement count it implies.
inline BoundsReport run_bounds_report(const ExperimentConfig& cfg, double sigma2 = 1.0) {
  validate(cfg);
  if (!(sigma2 > 0.0)) throw std::invalid_argument("run_bounds_report: sigma2 must be positive");
  BoundsReport rep;
  rep.n = cfg.n;
  rep.sigma2 = sigma2;
  rep.crb.kind = BoundKind::CRB;
  rep.zzb.kind = BoundKind::ZZB;
  const Eigen::Index g = static_cast<Eigen::Index>(cfg.snr_grid_db.size());
  rep.crb.snr_grid_db.resize(g);
  rep.crb.values.resize(g);
  rep.zzb.snr_grid_db.resize(g);
  rep.zzb.values.resize(g);
  const double nd = static_cast<double>(cfg.n);
  for (Eigen::Index i = 0; i < g; ++i) {
    const double s = cfg.snr_grid_db[static_cast<std::size_t>(i)];
    const double sig2 = std::pow(10.0, -s / 10.0);
    rep.crb.snr_grid_db[i] = s;
    rep.zzb.snr_grid_db[i] = s;
    rep.crb.values[i] = 6.0 * sig2 / (nd * (nd * nd - 1.0));
    rep.zzb.values[i] = zzb_single_sinusoid(cfg.n, nd, sig2);
  }
  rep.zzb.threshold_db = zzb_threshold(rep.zzb);
  if (rep.zzb.threshold_db) {
    const double thr = *rep.zzb.threshold_db;
    rep.required_m = required_measurements(cfg.n, sigma2, thr);
    if (cfg.n == 256) {
      const double coeff = nd * std::pow(10.0, thr / 10.0);
      std::ostringstream os;
      os.precision(3);
      os << "rule: nominal M >= max{40, 25.6*sigma2}; computed M >= max{40, " << coeff
         << "*sigma2} from zzb threshold " << thr << " dB";
      rep.rule_line = os.str();
    }
  }
  return rep;
}

struct SufficiencyRequest {
  std::vector<Eigen::Index> n_list{256};
  std::vector<Eigen::Index> k_list{1, 2, 4};
  std::vector<double> epsilon_list{0.1};
  double delta = 0.1;
  double fail_prob = 0.01;
  IsometryMode mode = IsometryMode::Pairwise;
};

struct SufficiencyRow {
  Eigen::Index n = 0;
  Eigen::Index k = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double fail_prob = 0.0;
  IsometryMode mode = IsometryMode::Pairwise;
  std::int64_t m = 0;
};

inline std::vector<SufficiencyRow> run_sufficiency_report(const SufficiencyRequest& req) {
  if (req.n_list.empty() || req.k_list.empty() || req.epsilon_list.empty())
    throw std::invalid_argument("sufficiency report: parameter lists must be nonempty");
  std::vector<SufficiencyRow> rows;
  for (Eigen::Index n : req.n_list)
    for (Eigen::Index k : req.k_list)
      for (double eps : req.epsilon_list)
        rows.push_back({n, k, eps, req.delta, req.fail_prob, req.mode,
                        sufficient_measurements_mixture(n, k, eps, req.delta,
                                                        req.fail_prob, req.mode)});
  return rows;
}

// Single-sinusoid plan: the separation parameter is derived from the window
// (close pairs via the tangent plane at separation sqrt(1 - tau*chi), far
// pairs as a K=2 mixture at the side-lobe signal bound); both regimes must
// hold, so the plan takes the max.
struct SingleSinusoidPlan {
  RegimeConstants constants;
  double epsilon = 0.0;
  double fail_prob = 0.0;
  std::int64_t m_close = 0;
  std::int64_t m_far = 0;
  std::int64_t m_total = 0;
};

inline SingleSinusoidPlan single_sinusoid_sufficiency(const SinusoidManifold& mm,
                                                      double epsilon, double fail_prob) {
  SingleSinusoidPlan plan;
  plan.constants = single_sinusoid_regime_constants(mm, epsilon);
  plan.epsilon = epsilon;
  plan.fail_prob = fail_prob;
  const WindowConstants wc = window_spectrum_derivatives(mm);
  const double delta_close = std::sqrt(1.0 - wc.tau * wc.chi);
  plan.m_close = sufficient_measurements_mixture(mm.n_samples, 1, epsilon / 2.0,
                                                 delta_close, fail_prob,
                                                 IsometryMode::TangentPlane);
  plan.m_far = sufficient_measurements_mixture(mm.n_samples, 2, epsilon,
                                               plan.constants.sigma_signal_bound,
                                               fail_prob, IsometryMode::Pairwise);
  plan.m_total = std::max(plan.m_close, plan.m_far);
  return plan;
}

// ---------------------------------------------------------------------------
// CSV persistence.  Every file starts with "# cfreq-csv v1", then "# key=value"
// config lines, then one column-header line, then data rows.

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string join_indices(const std::vector<Eigen::Index>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << fmt(v[i]);
  return os.str();
}

}  // namespace detail

inline constexpr const char* kCsvMagic = "# cfreq-csv v1";

inline void write_config_header(std::ostream& os, const ExperimentConfig& c) {
  os << kCsvMagic << "\n";
  os << "# n=" << c.n << "\n";
  os << "# m_list=" << detail::join_indices(c.m_list) << "\n";
  os << "# include_identity=" << (c.include_identity ? 1 : 0) << "\n";
  os << "# snr_grid_db=" << detail::join_doubles(c.snr_grid_db) << "\n";
  os << "# trials=" << c.trials << "\n";
  os << "# seed=" << c.seed << "\n";
  os << "# window=" << to_string(c.window) << "\n";
  os << "# normalization=" << to_string(c.normalization) << "\n";
  os << "# distribution=" << to_string(c.distribution) << "\n";
  os << "# grid_size=" << c.grid_size << "\n";
  os << "# newton_rounds=" << c.newton_rounds << "\n";
  os << "# threads=" << c.threads << "\n";
  os << "# isometry_grid=" << c.isometry_grid << "\n";
  os << "# isometry_phases=" << c.isometry_phases << "\n";
  os << "# isometry_gains=" << c.isometry_gains << "\n";
}

inline void write_rmse_csv(std::ostream& os, const ExperimentConfig& cfg,
                           const std::vector<RmseCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("write_rmse_csv: no curves");
  for (const RmseCurve& c : curves)
    if (c.identity != curves.front().identity)
      throw std::invalid_argument("write_rmse_csv: mixed matrix kinds in one file");
  write_config_header(os, cfg);
  os << "# matrix=" << (curves.front().identity ? "identity" : "random") << "\n";
  for (const RmseCurve& c : curves) {
    os << "# threshold_db_m" << c.m << "="
       << (c.threshold_db ? detail::fmt(*c.threshold_db) : std::string("none")) << "\n";
    if (c.low_trial_warning) os << "# warning_m" << c.m << "=trials_below_100\n";
  }
  os << "M,snr_db,rmse_rad,trials\n";
  for (const RmseCurve& c : curves)
    for (std::size_t i = 0; i < c.snr_grid_db.size(); ++i)
      os << c.m << "," << detail::fmt(c.snr_grid_db[i]) << ","
         << detail::fmt(c.rmse_rad[i]) << "," << c.trial_counts[i] << "\n";
}

inline void write_bounds_csv(std::ostream& os, const ExperimentConfig& cfg,
                             const BoundsReport& rep) {
  write_config_header(os, cfg);
  os << "# sigma2=" << detail::fmt(rep.sigma2) << "\n";
  os << "# zzb_threshold_db="
     << (rep.zzb.threshold_db ? detail::fmt(*rep.zzb.threshold_db) : std::string("none"))
     << "\n";
  os << "# required_m=" << detail::fmt(rep.required_m) << "\n";
  if (!rep.rule_line.empty()) os << "# " << rep.rule_line << "\n";
  os << "snr_db,value,kind\n";
  for (Eigen::Index i = 0; i < rep.crb.snr_grid_db.size(); ++i)
    os << detail::fmt(rep.crb.snr_grid_db[i]) << "," << detail::fmt(rep.crb.values[i])
       << "," << to_string(BoundKind::CRB) << "\n";
  for (Eigen::Index i = 0; i < rep.zzb.snr_grid_db.size(); ++i)
    os << detail::fmt(rep.zzb.snr_grid_db[i]) << "," << detail::fmt(rep.zzb.values[i])
       << "," << to_string(BoundKind::ZZB) << "\n";
}

inline void write_isometry_csv(std::ostream& os, const ExperimentConfig& cfg,
                               const std::vector<IsometrySweepRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("write_isometry_csv: no rows");
  for (const IsometrySweepRow& r : rows)
    if (r.identity != rows.front().identity)
      throw std::invalid_argument("write_isometry_csv: mixed matrix kinds in one file");
  write_config_header(os, cfg);
  os << "# matrix=" << (rows.front().identity ? "identity" : "random") << "\n";
  for (const IsometrySweepRow& r : rows)
    os << "# sampler_m" << r.m << "=" << r.report.config << "\n";
  os << "M,eps_lo,eps_hi,dev_lo_db,dev_hi_db\n";
  for (const IsometrySweepRow& r : rows)
    os << r.m << "," << detail::fmt(r.report.epsilon_lower) << ","
       << detail::fmt(r.report.epsilon_upper) << ","
       << detail::fmt(r.report.pairwise_snr_deviation_db.first) << ","
       << detail::fmt(r.report.pairwise_snr_deviation_db.second) << "\n";
}

inline void write_sufficiency_csv(std::ostream& os, const SufficiencyRequest& req,
                                  const std::vector<SufficiencyRow>& rows) {
  os << kCsvMagic << "\n";
  os << "# n_list=" << detail::join_indices(req.n_list) << "\n";
  os << "# k_list=" << detail::join_indices(req.k_list) << "\n";
  os << "# epsilon_list=" << detail::join_doubles(req.epsilon_list) << "\n";
  os << "# delta=" << detail::fmt(req.delta) << "\n";
  os << "# fail_prob=" << detail::fmt(req.fail_prob) << "\n";
  os << "# mode=" << to_string(req.mode) << "\n";
  os << "N,K,epsilon,delta,fail_prob,mode,M\n";
  for (const SufficiencyRow& r : rows)
    os << r.n << "," << r.k << "," << detail::fmt(r.epsilon) << ","
       << detail::fmt(r.delta) << "," << detail::fmt(r.fail_prob) << ","
       << to_string(r.mode) << "," << r.m << "\n";
}

inline void write_csv_file(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << body;
  if (!f) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Verifier: re-parses a CSV produced above and re-validates its header block,
// schema line, and row shape.

struct CsvSummary {
  std::map<std::string, std::string> header;
  std::string schema;
  std::size_t rows = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline bool numeric_cell(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  (void)v;
  return end == s.c_str() + s.size();
}

}  // namespace detail

inline CsvSummary verify_csv(std::istream& is) {
  CsvSummary out;
  std::string line;
  if (!std::getline(is, line) || line != kCsvMagic)
    throw std::runtime_error("csv: missing magic line '" + std::string(kCsvMagic) + "'");
  bool saw_schema = false;
  std::vector<std::string> columns;
  std::vector<bool> text_column;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      if (saw_schema) throw std::runtime_error("csv: comment after data section");
      const std::string kv = line.substr(2);
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0)
        throw std::runtime_error("csv: malformed header line: " + line);
      out.header[kv.substr(0, eq)] = kv.substr(eq + 1);
      continue;
    }
    if (!saw_schema) {
      out.schema = line;
      columns = detail::split_csv_line(line);
      if (columns.empty()) throw std::runtime_error("csv: empty schema line");
      for (const std::string& c : columns) {
        if (c.empty()) throw std::runtime_error("csv: empty column name");
        text_column.push_back(c == "kind" || c == "mode");
      }
      saw_schema = true;
      continue;
    }
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != columns.size())
      throw std::runtime_error("csv: row arity mismatch at data row " +
                               std::to_string(out.rows + 1));
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (!text_column[i] && !detail::numeric_cell(cells[i]))
        throw std::runtime_error("csv: non-numeric cell '" + cells[i] + "' in column " +
                                 columns[i]);
    ++out.rows;
  }
  if (!saw_schema) throw std::runtime_error("csv: missing schema line");
  if (out.header.empty()) throw std::runtime_error("csv: missing config header");
  // config invariants that survive the round trip
  auto it = out.header.find("trials");
  if (it != out.header.end() && std::stod(it->second) < 1.0)
    throw std::runtime_error("csv: header trials < 1");
  it = out.header.find("snr_grid_db");
  if (it != out.header.end()) {
    const std::vector<std::string> g = detail::split_csv_line(it->second);
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(std::stod(g[i]) > std::stod(g[i - 1])))
        throw std::runtime_error("csv: header snr grid not ascending");
  }
  return out;
}

inline CsvSummary verify_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open file: " + path);
  return verify_csv(f);
}

}  // namespace cfreq
