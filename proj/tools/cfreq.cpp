// cfreq: compressive frequency-estimation toolkit CLI.
//
// Subcommands: bounds, zzb-threshold, isometry, sufficiency, estimate,
// montecarlo, matgen, verify.  All numeric results go to CSV files with
// config headers; summaries go to stdout as key=value lines.  On failure a
// single "error: <reason>" line is printed to stderr and the exit code is 1.

#include <CLI11.hpp>

#include <cfreq/harness.hpp>

#include <complex>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CliState {
  // model
  Eigen::Index n = 256;
  std::string window = "all-ones";
  std::string normalization = "unit-modulus";
  std::string distribution = "qpsk";
  // SNR grid (effective per-measurement SNR, dB)
  double snr_lo = -30.0;
  double snr_hi = 6.0;
  double snr_step = 1.0;
  // Monte Carlo
  std::vector<Eigen::Index> m_list{10, 25, 40, 60, 256};
  bool no_identity = false;
  int trials = 2000;
  std::uint64_t seed = 1;
  int threads = 1;
  Eigen::Index grid_size = 0;
  int newton_rounds = 3;
  // isometry sampling
  Eigen::Index iso_grid = 0;
  Eigen::Index iso_phases = 16;
  Eigen::Index iso_gains = 8;
  // bounds
  double sigma2 = 1.0;
  // sufficiency
  std::vector<Eigen::Index> n_list{256};
  std::vector<Eigen::Index> k_list{1, 2, 4};
  std::vector<double> epsilon_list{0.1};
  double delta = 0.1;
  double fail_prob = 0.01;
  std::string mode = "pairwise";
  bool single_sinusoid = false;
  double epsilon = 0.1;
  // estimate / matgen
  std::string matrix_path;
  std::string obs_path;
  Eigen::Index rows = 64;
  bool gen_identity = false;
  // common
  std::string out;
  std::vector<std::string> verify_paths;
};

cfreq::ExperimentConfig make_config(const CliState& c) {
  cfreq::ExperimentConfig cfg;
  cfg.n = c.n;
  cfg.m_list = c.m_list;
  cfg.include_identity = !c.no_identity;
  cfg.snr_grid_db = cfreq::default_snr_grid(c.snr_lo, c.snr_hi, c.snr_step);
  cfg.trials = c.trials;
  cfg.seed = c.seed;
  cfg.window = cfreq::parse_window_family(c.window);
  cfg.normalization = cfreq::parse_normalization(c.normalization);
  cfg.distribution = cfreq::parse_distribution(c.distribution);
  cfg.grid_size = c.grid_size;
  cfg.newton_rounds = c.newton_rounds;
  cfg.threads = c.threads;
  cfg.isometry_grid = c.iso_grid;
  cfg.isometry_phases = c.iso_phases;
  cfg.isometry_gains = c.iso_gains;
  return cfg;
}

std::string identity_path(const std::string& p) {
  const auto dot = p.find_last_of('.');
  const auto slash = p.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return p + "_identity";
  return p.substr(0, dot) + "_identity" + p.substr(dot);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Observations file: one sample per line as "re im"; '#' starts a comment.
Eigen::VectorXcd load_observations(const std::string& path, Eigen::Index expected) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open observations file: " + path);
  std::vector<std::complex<double>> vals;
  std::string line;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    double re, im;
    if (is >> re) {
      if (!(is >> im)) throw std::runtime_error("observations: odd value count on a line");
      vals.emplace_back(re, im);
    }
  }
  if (static_cast<Eigen::Index>(vals.size()) != expected)
    throw std::runtime_error("observations: got " + std::to_string(vals.size()) +
                             " samples, matrix expects " + std::to_string(expected));
  Eigen::VectorXcd y(expected);
  for (Eigen::Index i = 0; i < expected; ++i) y[i] = vals[static_cast<std::size_t>(i)];
  return y;
}

void run_montecarlo(const CliState& c) {
  const auto cfg = make_config(c);
  const auto curves = cfreq::run_rmse_sweep(cfg);
  std::vector<cfreq::RmseCurve> random_curves, identity_curves;
  for (const auto& cu : curves) (cu.identity ? identity_curves : random_curves).push_back(cu);
  const std::string path = c.out.empty() ? "rmse.csv" : c.out;
  if (!random_curves.empty()) {
    std::ostringstream os;
    cfreq::write_rmse_csv(os, cfg, random_curves);
    cfreq::write_csv_file(path, os.str());
    std::cout << "wrote " << path << "\n";
  }
  if (!identity_curves.empty()) {
    std::ostringstream os;
    cfreq::write_rmse_csv(os, cfg, identity_curves);
    const std::string ipath = identity_path(path);
    cfreq::write_csv_file(ipath, os.str());
    std::cout << "wrote " << ipath << "\n";
  }
  for (const auto& cu : curves) {
    std::cout << "rmse_threshold_db_m" << cu.m << (cu.identity ? "_identity" : "") << "="
              << (cu.threshold_db ? fmt(*cu.threshold_db) : std::string("none")) << "\n";
    if (cu.low_trial_warning)
      std::cout << "warning_m" << cu.m << "=trials_below_100\n";
  }
}

void run_bounds(const CliState& c, bool write_file) {
  auto cfg = make_config(c);
  const auto rep = cfreq::run_bounds_report(cfg, c.sigma2);
  if (write_file) {
    std::ostringstream os;
    cfreq::write_bounds_csv(os, cfg, rep);
    const std::string path = c.out.empty() ? "bounds.csv" : c.out;
    cfreq::write_csv_file(path, os.str());
    std::cout << "wrote " << path << "\n";
  }
  std::cout << "zzb_threshold_db="
            << (rep.zzb.threshold_db ? fmt(*rep.zzb.threshold_db) : std::string("none"))
            << "\n";
  std::cout << "sigma2=" << fmt(rep.sigma2) << "\n";
  std::cout << "required_m=" << fmt(rep.required_m) << "\n";
  if (!rep.rule_line.empty()) std::cout << rep.rule_line << "\n";
}

void run_isometry(const CliState& c) {
  const auto cfg = make_config(c);
  const auto rows = cfreq::run_isometry_sweep(cfg);
  std::vector<cfreq::IsometrySweepRow> random_rows, identity_rows;
  for (const auto& r : rows) (r.identity ? identity_rows : random_rows).push_back(r);
  const std::string path = c.out.empty() ? "isometry.csv" : c.out;
  if (!random_rows.empty()) {
    std::ostringstream os;
    cfreq::write_isometry_csv(os, cfg, random_rows);
    cfreq::write_csv_file(path, os.str());
    std::cout << "wrote " << path << "\n";
  }
  if (!identity_rows.empty()) {
    std::ostringstream os;
    cfreq::write_isometry_csv(os, cfg, identity_rows);
    const std::string ipath = identity_path(path);
    cfreq::write_csv_file(ipath, os.str());
    std::cout << "wrote " << ipath << "\n";
  }
  for (const auto& r : rows)
    std::cout << "m=" << r.m << (r.identity ? " (identity)" : "") << " eps=["
              << fmt(r.report.epsilon_lower) << "," << fmt(r.report.epsilon_upper)
              << "] dev_db=[" << fmt(r.report.pairwise_snr_deviation_db.first) << ","
              << fmt(r.report.pairwise_snr_deviation_db.second) << "]\n";
}

void run_sufficiency(const CliState& c) {
  if (c.single_sinusoid) {
    // regime constants are defined on unit-energy windows
    const auto mm = cfreq::make_manifold(c.n, cfreq::parse_window_family(c.window),
                                         cfreq::Normalization::UnitEnergy);
    const auto plan = cfreq::single_sinusoid_sufficiency(mm, c.epsilon, c.fail_prob);
    std::cout << "n=" << c.n << "\nwindow=" << c.window << "\nepsilon=" << fmt(plan.epsilon)
              << "\nfail_prob=" << fmt(plan.fail_prob) << "\nmu=" << fmt(plan.constants.mu)
              << "\nsigma_signal_bound=" << fmt(plan.constants.sigma_signal_bound)
              << "\nclose_regime_cutoff=" << fmt(plan.constants.close_regime_cutoff)
              << "\nside_lobe_peak=" << fmt(plan.constants.side_lobe_peak)
              << "\nm_close=" << plan.m_close << "\nm_far=" << plan.m_far
              << "\nm_total=" << plan.m_total << "\n";
    return;
  }
  cfreq::SufficiencyRequest req;
  req.n_list = c.n_list;
  req.k_list = c.k_list;
  req.epsilon_list = c.epsilon_list;
  req.delta = c.delta;
  req.fail_prob = c.fail_prob;
  req.mode = cfreq::parse_isometry_mode(c.mode);
  const auto rows = cfreq::run_sufficiency_report(req);
  std::ostringstream os;
  cfreq::write_sufficiency_csv(os, req, rows);
  const std::string path = c.out.empty() ? "sufficiency.csv" : c.out;
  cfreq::write_csv_file(path, os.str());
  std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
}

void run_estimate(const CliState& c) {
  const auto a = cfreq::load_matrix(c.matrix_path);
  const auto y = load_observations(c.obs_path, a.rows());
  const auto mm = cfreq::make_manifold(a.cols(), cfreq::parse_window_family(c.window),
                                       cfreq::parse_normalization(c.normalization));
  cfreq::EstimatorConfig ecfg;
  ecfg.grid_size = c.grid_size;
  ecfg.newton_rounds = c.newton_rounds;
  const auto res = cfreq::estimate(y, a, mm, ecfg);
  std::cout << "omega_hat=" << fmt(res.omega_hat) << "\n";
  std::cout << "gain_re=" << fmt(res.gain_hat.real()) << "\n";
  std::cout << "gain_im=" << fmt(res.gain_hat.imag()) << "\n";
  std::cout << "coarse_omega=" << fmt(res.coarse_omega) << "\n";
  std::cout << "converged=" << (res.converged ? 1 : 0) << "\n";
  std::cout << "clamped=" << (res.clamped ? 1 : 0) << "\n";
}

void run_matgen(const CliState& c) {
  const cfreq::MeasurementMatrix a =
      c.gen_identity
          ? cfreq::identity_matrix(c.n)
          : cfreq::sample_matrix(cfreq::parse_distribution(c.distribution), c.rows, c.n,
                                 c.seed);
  const std::string path = c.out.empty() ? "matrix.txt" : c.out;
  cfreq::save_matrix(a, path);
  std::cout << "wrote " << path << " rows=" << a.rows() << " cols=" << a.cols() << "\n";
}

void run_verify(const CliState& c) {
  for (const auto& p : c.verify_paths) {
    const auto s = cfreq::verify_csv_file(p);
    std::cout << "ok " << p << " rows=" << s.rows << " schema=" << s.schema << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CliState cli;
  CLI::App app{"compressive frequency estimation toolkit"};
  app.set_config("--config", "", "declarative config file (ini sections per subcommand)");
  app.require_subcommand(1);

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--n", cli.n, "signal length N");
    sub->add_option("--window", cli.window,
                    "window family: all-ones|hamming|hanning|triangular|blackman");
    sub->add_option("--normalization", cli.normalization, "unit-modulus|unit-energy");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--snr-lo", cli.snr_lo, "SNR grid start (dB)");
    sub->add_option("--snr-hi", cli.snr_hi, "SNR grid end (dB)");
    sub->add_option("--snr-step", cli.snr_step, "SNR grid step (dB)");
  };

  auto* mc = app.add_subcommand("montecarlo", "RMSE sweep over measurement counts");
  add_model(mc);
  add_grid(mc);
  mc->add_option("--m-list", cli.m_list, "measurement counts")->delimiter(',');
  mc->add_flag("--no-identity", cli.no_identity, "skip the identity-matrix run");
  mc->add_option("--trials", cli.trials, "Monte Carlo trials per SNR point");
  mc->add_option("--seed", cli.seed, "base RNG seed");
  mc->add_option("--threads", cli.threads, "worker threads per SNR cell");
  mc->add_option("--distribution", cli.distribution, "qpsk|rademacher|gaussian");
  mc->add_option("--grid-size", cli.grid_size, "coarse grid size (0 = 4N)");
  mc->add_option("--newton-rounds", cli.newton_rounds, "refinement rounds");
  mc->add_option("--out", cli.out, "output CSV (identity run goes to *_identity.csv)");
  mc->callback([&] { run_montecarlo(cli); });

  auto* bd = app.add_subcommand("bounds", "CRB and ZZB curves vs effective SNR");
  add_model(bd);
  add_grid(bd);
  bd->add_option("--sigma2", cli.sigma2, "noise variance for the required-M evaluation");
  bd->add_option("--out", cli.out, "output CSV");
  bd->callback([&] { run_bounds(cli, true); });

  auto* zt = app.add_subcommand("zzb-threshold", "detect the ZZB threshold SNR");
  add_model(zt);
  add_grid(zt);
  zt->add_option("--sigma2", cli.sigma2, "noise variance for the required-M evaluation");
  zt->callback([&] { run_bounds(cli, false); });

  auto* iso = app.add_subcommand("isometry", "empirical isometry extremes per M");
  add_model(iso);
  iso->add_option("--m-list", cli.m_list, "measurement counts")->delimiter(',');
  iso->add_flag("--no-identity", cli.no_identity, "skip the identity-matrix run");
  iso->add_option("--seed", cli.seed, "base RNG seed");
  iso->add_option("--distribution", cli.distribution, "qpsk|rademacher|gaussian");
  iso->add_option("--iso-grid", cli.iso_grid, "frequency grid size (0 = 2N)");
  iso->add_option("--iso-phases", cli.iso_phases, "relative phases per pair");
  iso->add_option("--iso-gains", cli.iso_gains, "gain ratios per pair");
  iso->add_option("--out", cli.out, "output CSV (identity run goes to *_identity.csv)");
  iso->callback([&] { run_isometry(cli); });

  auto* suf = app.add_subcommand("sufficiency", "sufficient measurement counts");
  add_model(suf);
  suf->add_option("--n-list", cli.n_list, "signal lengths")->delimiter(',');
  suf->add_option("--k-list", cli.k_list, "mixture orders")->delimiter(',');
  suf->add_option("--epsilon-list", cli.epsilon_list, "isometry targets")->delimiter(',');
  suf->add_option("--delta", cli.delta, "separation parameter");
  suf->add_option("--fail-prob", cli.fail_prob, "failure probability");
  suf->add_option("--mode", cli.mode, "pairwise|tangent");
  suf->add_flag("--single-sinusoid", cli.single_sinusoid,
                "derive the separation from the window (close/far regimes)");
  suf->add_option("--epsilon", cli.epsilon, "isometry target for --single-sinusoid");
  suf->add_option("--out", cli.out, "output CSV (table mode)");
  suf->callback([&] { run_sufficiency(cli); });

  auto* est = app.add_subcommand("estimate", "single-shot estimate from files");
  add_model(est);
  est->add_option("--matrix", cli.matrix_path, "measurement matrix file")->required();
  est->add_option("--observations", cli.obs_path, "observations file ('re im' per line)")
      ->required();
  est->add_option("--grid-size", cli.grid_size, "coarse grid size (0 = 4N)");
  est->add_option("--newton-rounds", cli.newton_rounds, "refinement rounds");
  est->callback([&] { run_estimate(cli); });

  auto* mg = app.add_subcommand("matgen", "sample and save a measurement matrix");
  add_model(mg);
  mg->add_option("--rows", cli.rows, "measurement count M");
  mg->add_flag("--identity", cli.gen_identity, "emit the N x N identity");
  mg->add_option("--distribution", cli.distribution, "qpsk|rademacher|gaussian");
  mg->add_option("--seed", cli.seed, "matrix seed");
  mg->add_option("--out", cli.out, "output path");
  mg->callback([&] { run_matgen(cli); });

  auto* vf = app.add_subcommand("verify", "re-parse and validate result CSV headers");
  vf->add_option("files", cli.verify_paths, "CSV files to check")->required();
  vf->callback([&] { run_verify(cli); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) std::cerr << "error: " << e.what() << "\n";
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
