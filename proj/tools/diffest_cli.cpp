// Command-line front end: CSV ingestion, estimation runs, simulation,
// convergence studies, and the variance-ratio test.
//
// Exit codes: 0 success, 2 input error, 3 solver failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diffest/preprocess.hpp"
#include "diffest/shooting.hpp"
#include "diffest/sim.hpp"
#include "diffest/solver.hpp"
#include "diffest/spline.hpp"

namespace {

using namespace diffest;

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

// Proleptic Gregorian day count (days since 1970-01-01).
long days_from_civil(int y, unsigned mo, unsigned d) {
  y -= mo <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

double parse_timestamp(const std::string& field, bool iso_dates,
                       double day_count, int line_no) {
  if (iso_dates) {
    int y = 0;
    unsigned mo = 0, d = 0;
    char dash1 = 0, dash2 = 0;
    std::istringstream iss(field);
    iss >> y >> dash1 >> mo >> dash2 >> d;
    if (iss.fail() || dash1 != '-' || dash2 != '-' || mo < 1 || mo > 12 ||
        d < 1 || d > 31) {
      throw InputError("row " + std::to_string(line_no) +
                       ": malformed date '" + field + "'");
    }
    return static_cast<double>(days_from_civil(y, mo, d)) / day_count;
  }
  try {
    std::size_t pos = 0;
    const double t = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing junk");
    return t;
  } catch (const std::exception&) {
    throw InputError("row " + std::to_string(line_no) +
                     ": malformed time '" + field + "'");
  }
}

RawSeries read_csv(const std::string& path, double day_count) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty input file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool iso_dates;
  if (line == "date,value") {
    iso_dates = true;
  } else if (line == "t,value") {
    iso_dates = false;
  } else {
    throw InputError("header must be 'date,value' or 't,value', got '" + line +
                     "'");
  }

  std::vector<double> times, values;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw InputError("row " + std::to_string(line_no) + ": missing comma");
    }
    times.push_back(parse_timestamp(line.substr(0, comma), iso_dates,
                                    day_count, line_no));
    const std::string vfield = line.substr(comma + 1);
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(vfield, &pos));
      if (pos != vfield.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw InputError("row " + std::to_string(line_no) +
                       ": malformed value '" + vfield + "'");
    }
  }
  if (times.size() < 2) throw InputError("need at least 2 data rows");
  VectorXd t(static_cast<Eigen::Index>(times.size()));
  VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    t(i) = times[static_cast<std::size_t>(i)];
    v(i) = values[static_cast<std::size_t>(i)];
  }
  try {
    return RawSeries(std::move(t), std::move(v), path);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

std::vector<int> parse_thinning(const std::string& text) {
  std::vector<int> factors;
  std::istringstream iss(text);
  std::string tok;
  while (std::getline(iss, tok, ',')) {
    factors.push_back(std::stoi(tok));
  }
  return factors;
}

struct EstimateOptions {
  std::string input;
  std::string out_prefix = "estimate";
  int m = 2;
  std::optional<double> lambda;
  std::optional<double> lambda_kappa;
  double day_count = 365.25;
  bool log_transform = false;
  double tie_noise = 1e-8;
  std::uint64_t seed = 0;
  int grid_points = 200;
  std::string thinning = "16,4,1";
  double epsilon = 1e-10;
  double delta = 0.1;
  int max_iter = 500;
  double extend = 0.0;  // widen the output grid by this fraction per side
};

int run_estimate(const EstimateOptions& opt) {
  RawSeries series = read_csv(opt.input, opt.day_count);
  if (opt.log_transform) {
    VectorXd logged(series.size());
    for (Eigen::Index i = 0; i < series.size(); ++i) {
      if (series.values()(i) <= 0.0) {
        throw InputError("log transform requires positive values; row " +
                         std::to_string(i + 2) + " is not");
      }
      logged(i) = std::log(series.values()(i));
    }
    series = RawSeries(series.times(), std::move(logged), series.label());
  }
  series = break_ties(series, opt.tie_noise, opt.seed);

  SolverConfig solver;
  solver.epsilon = opt.epsilon;
  solver.delta = opt.delta;
  solver.max_iter = opt.max_iter;
  solver.thinning_factors = parse_thinning(opt.thinning);
  if (opt.lambda) {
    solver.lambda_rule = LambdaRule::fixed(*opt.lambda);
  } else {
    solver.lambda_rule = LambdaRule::scaled(opt.lambda_kappa.value_or(20.0));
  }

  const EstimateResult result = continuation_solve(series, opt.m, solver);
  const OrderedSample sample = order_sample(compute_returns(series));

  const double span = sample.max_level() - sample.min_level();
  const double lo = sample.min_level() - opt.extend * span;
  const double hi = sample.max_level() + opt.extend * span;
  const auto grid = sigma_grid(result.spline, opt.grid_points, lo, hi);

  const std::string grid_path = opt.out_prefix + "_grid.csv";
  std::ofstream gout(grid_path);
  if (!gout) throw InputError("cannot write '" + grid_path + "'");
  gout << "x,sigma,extrapolated\n";
  for (const GridPoint& p : grid) {
    gout << fmt(p.x) << ',' << fmt(p.sigma) << ',' << (p.extrapolated ? 1 : 0)
         << '\n';
  }

  const std::string report_path = opt.out_prefix + "_report.txt";
  std::ofstream rout(report_path);
  if (!rout) throw InputError("cannot write '" + report_path + "'");
  rout << "input: " << opt.input << '\n'
       << "n: " << sample.n() << '\n'
       << "m: " << opt.m << '\n'
       << "lambda: " << fmt(result.lambda) << '\n'
       << "iterations: " << result.iterations << '\n'
       << "residual_norm: " << fmt(result.residual_norm) << '\n'
       << "a_star:";
  for (Eigen::Index i = 0; i < result.a_star.size(); ++i) {
    rout << ' ' << fmt(result.a_star(i));
  }
  rout << '\n'
       << "first_order_residual_linear: "
       << fmt(first_order_residual(sample, result.spline, result.lambda, 1))
       << '\n'
       << "first_order_residual_quadratic: "
       << fmt(first_order_residual(sample, result.spline, result.lambda, 2))
       << '\n';

  std::cout << "wrote " << grid_path << " and " << report_path << '\n';
  return 0;
}

int run_simulate(const std::string& model, Eigen::Index steps, double dt,
                 double sigma0, double y0, std::uint64_t seed,
                 const std::string& out) {
  RawSeries series = [&] {
    if (model == "bm") return simulate_bm(steps, dt, sigma0, y0, seed);
    if (model == "logistic") return simulate_logistic(steps, dt, seed);
    throw InputError("unknown model '" + model + "' (expected bm or logistic)");
  }();
  std::ofstream os(out);
  if (!os) throw InputError("cannot write '" + out + "'");
  os << "t,value\n";
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    os << fmt(series.times()(i)) << ',' << fmt(series.values()(i)) << '\n';
  }
  std::cout << "wrote " << out << " (" << series.size() << " rows)\n";
  return 0;
}

int run_study(int base_q, int q_min, int q_max, int m, double kappa,
              std::uint64_t seed, const std::string& out) {
  const StudyReport report = convergence_study(base_q, q_min, q_max, m, kappa,
                                               seed);
  std::ofstream os(out);
  if (!os) throw InputError("cannot write '" + out + "'");
  os << "q,n,lambda,rmise,log2_rmise,converged\n";
  for (const StudyRow& row : report.rows) {
    os << row.q << ',' << row.n << ',' << fmt(row.lambda) << ','
       << (row.converged ? fmt(row.rmise) : "") << ','
       << (row.converged ? fmt(row.log2_rmise) : "") << ','
       << (row.converged ? 1 : 0) << '\n';
  }
  os << "# fit: log2_rmise = " << fmt(report.intercept) << " + "
     << fmt(report.slope) << " * q\n";
  std::cout << "m=" << report.m << " fit: intercept " << fmt(report.intercept)
            << ", slope " << fmt(report.slope) << '\n';
  if (report.any_failed) {
    std::cout << "warning: some q levels failed to converge and were "
                 "excluded from the fit\n";
  }
  std::cout << "wrote " << out << '\n';
  return 0;
}

// Split returns into long-gap and regular groups by the elapsed calendar
// time, then compare group variances.
int run_vrtest_csv(const std::string& input, double gap_days, double day_count) {
  const RawSeries series = read_csv(input, day_count);
  std::vector<double> regular, long_gap;
  for (Eigen::Index i = 0; i + 1 < series.size(); ++i) {
    const double dt = series.times()(i + 1) - series.times()(i);
    const double r = (series.values()(i + 1) - series.values()(i)) /
                     std::sqrt(dt);
    (dt * day_count > gap_days ? long_gap : regular).push_back(r);
  }
  if (regular.size() < 2 || long_gap.size() < 2) {
    throw InputError("vrtest: a return group is empty or too small "
                     "(adjust --gap-days)");
  }
  auto sample_std = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
  };
  const VarianceRatioResult res = variance_ratio_test(
      sample_std(regular), static_cast<long>(regular.size()),
      sample_std(long_gap), static_cast<long>(long_gap.size()));
  std::cout << "groups: regular n=" << regular.size()
            << " long-gap n=" << long_gap.size() << '\n'
            << "statistic: " << fmt(res.statistic) << '\n'
            << "reject_at_10pct: " << (res.reject_at_10pct ? "yes" : "no")
            << '\n'
            << "reject_at_5pct: " << (res.reject_at_5pct ? "yes" : "no")
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonparametric diffusion-function estimation from "
               "high-frequency observations"};
  app.require_subcommand(1);

  EstimateOptions eopt;
  CLI::App* est = app.add_subcommand("estimate",
                                     "Estimate sigma from a CSV time series");
  est->add_option("input", eopt.input, "Input CSV (date,value or t,value)")
      ->required();
  est->add_option("--m", eopt.m, "Penalization order (1 or 2)")
      ->check(CLI::Range(1, 2));
  auto* lam = est->add_option("--lambda", eopt.lambda, "Fixed lambda");
  est->add_option("--lambda-kappa", eopt.lambda_kappa,
                  "Lambda schedule coefficient kappa (default 20)")
      ->excludes(lam);
  est->add_option("--day-count", eopt.day_count, "Days per year denominator");
  est->add_flag("--log-transform", eopt.log_transform,
                "Estimate on log(value)");
  est->add_option("--tie-noise", eopt.tie_noise,
                  "Relative tie-breaking noise variance");
  est->add_option("--seed", eopt.seed, "Random seed");
  est->add_option("--grid-points", eopt.grid_points, "Output grid size");
  est->add_option("--thinning", eopt.thinning,
                  "Comma-separated thinning strides, ending in 1");
  est->add_option("--epsilon", eopt.epsilon, "Residual tolerance");
  est->add_option("--delta", eopt.delta, "Newton damping factor");
  est->add_option("--max-iter", eopt.max_iter, "Newton iteration cap");
  est->add_option("--extend", eopt.extend,
                  "Fractional grid extension past the data range");
  est->add_option("--out", eopt.out_prefix, "Output file prefix");

  std::string model;
  Eigen::Index steps = 1024;
  double dt = 1.0 / 1024.0, sigma0 = 1.0, y0 = 0.0;
  std::uint64_t sim_seed = 0;
  std::string sim_out = "simulated.csv";
  CLI::App* sim = app.add_subcommand("simulate", "Simulate a diffusion path");
  sim->add_option("--model", model, "bm or logistic")->required();
  sim->add_option("--steps", steps, "Number of increments");
  sim->add_option("--dt", dt, "Time step in years");
  sim->add_option("--sigma0", sigma0, "Constant volatility (bm only)");
  sim->add_option("--y0", y0, "Starting level (bm only)");
  sim->add_option("--seed", sim_seed, "Random seed");
  sim->add_option("--out", sim_out, "Output CSV path");

  int base_q = 16, q_min = 10, q_max = 16, study_m = 1;
  double kappa = 30.0;
  std::uint64_t study_seed = 0;
  std::string study_out = "study.csv";
  CLI::App* study = app.add_subcommand(
      "study", "Empirical rate-of-convergence study on a logistic path");
  study->add_option("--base-q", base_q, "Finest grid: step 2^-base_q");
  study->add_option("--q-min", q_min, "Coarsest estimated level");
  study->add_option("--q-max", q_max, "Finest estimated level");
  study->add_option("--m", study_m, "Penalization order")->check(CLI::Range(1, 2));
  study->add_option("--kappa", kappa, "Lambda schedule coefficient");
  study->add_option("--seed", study_seed, "Random seed");
  study->add_option("--out", study_out, "Output CSV path");

  std::optional<double> std_a, std_b;
  long n_a = 0, n_b = 0;
  std::string vr_input;
  double gap_days = 1.5, vr_day_count = 365.25;
  CLI::App* vr = app.add_subcommand("vrtest",
                                    "Variance-ratio test of return groups");
  vr->add_option("--std-a", std_a, "Std of group A");
  vr->add_option("--n-a", n_a, "Count of group A");
  vr->add_option("--std-b", std_b, "Std of group B");
  vr->add_option("--n-b", n_b, "Count of group B");
  vr->add_option("--input", vr_input, "CSV to split by gap length");
  vr->add_option("--gap-days", gap_days,
                 "Returns spanning more days than this are 'long-gap'");
  vr->add_option("--day-count", vr_day_count, "Days per year denominator");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed()) return run_estimate(eopt);
    if (sim->parsed()) {
      return run_simulate(model, steps, dt, sigma0, y0, sim_seed, sim_out);
    }
    if (study->parsed()) {
      return run_study(base_q, q_min, q_max, study_m, kappa, study_seed,
                       study_out);
    }
    if (vr->parsed()) {
      if (!vr_input.empty()) {
        return run_vrtest_csv(vr_input, gap_days, vr_day_count);
      }
      if (!std_a || !std_b) {
        throw InputError(
            "vrtest needs either --input or all of --std-a/--n-a/--std-b/--n-b");
      }
      const VarianceRatioResult res =
          variance_ratio_test(*std_a, n_a, *std_b, n_b);
      std::cout << "statistic: " << fmt(res.statistic) << '\n'
                << "reject_at_10pct: " << (res.reject_at_10pct ? "yes" : "no")
                << '\n'
                << "reject_at_5pct: " << (res.reject_at_5pct ? "yes" : "no")
                << '\n';
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what()
              << "\nhint: try coarser --thinning strides or a larger lambda\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
