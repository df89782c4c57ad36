#include "driftlab/experiments.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "driftlab/classify.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/simulate.hpp"
#include "driftlab/version.hpp"

namespace driftlab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// serialization

json coefficient_to_json(const CoefficientFn& f) {
  switch (f.kind()) {
    case CoefficientFn::Kind::kConstant:
      return {{"kind", "constant"}, {"c", f.constant_value()}};
    case CoefficientFn::Kind::kRationalBump:
      return {{"kind", "rational_bump"}};
    case CoefficientFn::Kind::kGaussianBump:
      return {{"kind", "gaussian_bump"}};
    case CoefficientFn::Kind::kCosineSigma:
      return {{"kind", "cosine_sigma"}};
    case CoefficientFn::Kind::kAffine:
      return {{"kind", "affine"}, {"slope", f.affine_slope()}, {"intercept", f.affine_intercept()}};
    case CoefficientFn::Kind::kBumpSum: {
      json bits = json::array();
      for (auto b : f.bump_bits()) bits.push_back(static_cast<int>(b));
      return {{"kind", "bump_sum"}, {"base", f.bump_base()},   {"h", f.bump_h()},
              {"beta", f.bump_beta()}, {"R", f.bump_radius()}, {"w", bits}};
    }
  }
  throw ConfigError("coefficient_to_json: unknown kind");
}

CoefficientFn coefficient_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("coefficient: expected an object with a \"kind\" field");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "constant") return CoefficientFn::constant(j.at("c").get<double>());
    if (kind == "rational_bump") return CoefficientFn::rational_bump();
    if (kind == "gaussian_bump") return CoefficientFn::gaussian_bump();
    if (kind == "cosine_sigma") return CoefficientFn::cosine_sigma();
    if (kind == "affine")
      return CoefficientFn::affine(j.at("slope").get<double>(), j.at("intercept").get<double>());
    if (kind == "bump_sum") {
      std::vector<std::uint8_t> bits;
      for (const auto& b : j.at("w")) bits.push_back(b.get<int>() ? 1 : 0);
      return CoefficientFn::bump_sum(j.at("base").get<double>(), j.at("h").get<double>(),
                                     j.at("beta").get<double>(), j.at("R").get<double>(),
                                     std::move(bits));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("coefficient: ") + e.what());
  }
  throw ConfigError("coefficient: unknown kind \"" + kind + "\"");
}

json model_to_json(const MixtureModel& model) {
  return {{"b0", coefficient_to_json(model.b0())},
          {"b1", coefficient_to_json(model.b1())},
          {"sigma", coefficient_to_json(model.sigma_fn())},
          {"p0", model.p0()},
          {"p1", model.p1()},
          {"x0", model.x0()}};
}

MixtureModel model_from_json(const json& j) {
  try {
    return MixtureModel::create(coefficient_from_json(j.at("b0")),
                                coefficient_from_json(j.at("b1")),
                                coefficient_from_json(j.at("sigma")), j.at("p0").get<double>(),
                                j.at("p1").get<double>(), j.value("x0", 0.0));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// config

int NRule::resolve(long sample_size) const {
  if (type == Type::kFixed) return fixed_n;
  if (sample_size > 100000000L) throw ConfigError("n_rule equal_N: N too large for n = N");
  return static_cast<int>(sample_size);
}

void ExperimentConfig::validate() const {
  if (sample_grid.empty()) throw ConfigError("config: N_grid must be nonempty");
  long prev = 0;
  for (long n_value : sample_grid) {
    if (n_value < 4) throw ConfigError("config: N_grid entries must be >= 4");
    if (n_value <= prev) throw ConfigError("config: N_grid must be strictly increasing");
    prev = n_value;
  }
  if (n_rule.type == NRule::Type::kFixed && n_rule.fixed_n < 1)
    throw ConfigError("config: fixed n must be >= 1");
  if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
  if (test_size < 1) throw ConfigError("config: test_size must be >= 1");
  if (!(beta >= 1.0)) throw ConfigError("config: beta must be >= 1");
  if (!(k_scale > 0.0) || !(k_scale_sigma > 0.0))
    throw ConfigError("config: K_scale knobs must be positive");
  if (degree < 1) throw ConfigError("config: M must be >= 1");
  if (substeps < 1) throw ConfigError("config: substeps must be >= 1");
  if (regime == Regime::kConstant && !model.all_constant())
    throw ConfigError("config: constant regime requires constant coefficient functions");
  if (family.count < 1) throw ConfigError("config: family count must be >= 1");
  if (!(family.holder_radius > 0.0) || !(family.c0 > 0.0))
    throw ConfigError("config: family R and c0 must be positive");
}

namespace {

Regime regime_from_string(const std::string& s) {
  if (s == "bounded") return Regime::kBounded;
  if (s == "unbounded_drift") return Regime::kUnboundedDrift;
  if (s == "constant") return Regime::kConstant;
  throw ConfigError("config: unknown regime \"" + s + "\"");
}

std::string regime_to_string(Regime regime) {
  switch (regime) {
    case Regime::kBounded:
      return "bounded";
    case Regime::kUnboundedDrift:
      return "unbounded_drift";
    case Regime::kConstant:
      return "constant";
  }
  return "?";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  try {
    ExperimentConfig config(model_from_json(j.at("model")));
    config.beta = j.value("beta", 1.0);
    config.regime = regime_from_string(j.value("regime", std::string("bounded")));
    for (const auto& n_value : j.at("N_grid")) config.sample_grid.push_back(n_value.get<long>());
    if (j.contains("n_rule")) {
      const auto& rule = j.at("n_rule");
      const std::string type = rule.value("type", std::string("equal_N"));
      if (type == "equal_N") {
        config.n_rule.type = NRule::Type::kEqualN;
      } else if (type == "fixed") {
        config.n_rule.type = NRule::Type::kFixed;
        config.n_rule.fixed_n = rule.at("n").get<int>();
      } else {
        throw ConfigError("config: unknown n_rule type \"" + type + "\"");
      }
    }
    config.replicates = j.value("replicates", 1);
    config.test_size = j.value("test_size", 1);
    config.seed = j.value("seed", static_cast<std::uint64_t>(1));
    config.k_scale = j.value("K_scale", 1.0);
    config.k_scale_sigma = j.value("K_scale_sigma", 1.0);
    config.degree = j.value("M", 3);
    config.output_path = j.value("output_path", std::string("experiment"));
    config.substeps = j.value("substeps", 1);
    if (j.contains("family")) {
      const auto& fam = j.at("family");
      config.family.holder_radius = fam.value("R", 1.0);
      config.family.c0 = fam.value("c0", 1.0);
      config.family.kappa = fam.value("kappa", 1.0);
      config.family.count = fam.value("count", 8);
      config.family.size_ref = fam.value("N", static_cast<long>(0));
    }
    config.gram_bound_c = j.value("gram_bound_c", 1.0);
    if (j.contains("simulate")) {
      config.simulate_size = j.at("simulate").value("N", static_cast<long>(0));
      config.simulate_steps = j.at("simulate").value("n", 0);
    }
    config.validate();
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json ExperimentConfig::to_json() const {
  json rule;
  if (n_rule.type == NRule::Type::kEqualN)
    rule = {{"type", "equal_N"}};
  else
    rule = {{"type", "fixed"}, {"n", n_rule.fixed_n}};
  return {{"model", model_to_json(model)},
          {"beta", beta},
          {"regime", regime_to_string(regime)},
          {"N_grid", sample_grid},
          {"n_rule", rule},
          {"replicates", replicates},
          {"test_size", test_size},
          {"seed", seed},
          {"K_scale", k_scale},
          {"K_scale_sigma", k_scale_sigma},
          {"M", degree},
          {"output_path", output_path},
          {"substeps", substeps},
          {"family",
           {{"R", family.holder_radius},
            {"c0", family.c0},
            {"kappa", family.kappa},
            {"count", family.count},
            {"N", family.size_ref}}},
          {"gram_bound_c", gram_bound_c}};
}

// ---------------------------------------------------------------------------
// slope fit

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw ConfigError("fit_loglog_slope: need at least 2 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [n_value, v] : points) {
    if (!(n_value > 0.0) || !(v > 0.0))
      throw ConfigError("fit_loglog_slope: points must be positive");
    sx += std::log(n_value);
    sy += std::log(v);
  }
  const double count = static_cast<double>(points.size());
  const double mx = sx / count;
  const double my = sy / count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [n_value, v] : points) {
    const double dx = std::log(n_value) - mx;
    const double dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw ConfigError("fit_loglog_slope: degenerate abscissae");
  SlopeFit fit;
  fit.fitted = true;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = syy - fit.slope * sxy;
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.points_used = static_cast<int>(points.size());
  return fit;
}

// ---------------------------------------------------------------------------
// shared runner machinery

std::uint64_t cell_stream(std::uint64_t seed, std::string_view tag, long sample_size,
                          int replicate) {
  return derive_stream(seed, {hash_tag(tag), static_cast<std::uint64_t>(sample_size),
                              static_cast<std::uint64_t>(replicate)});
}

namespace {

void run_cells(long count, int threads, const std::function<void(long)>& body) {
  if (threads <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawned = static_cast<int>(std::min<long>(threads, count));
  pool.reserve(spawned);
  for (int t = 0; t < spawned; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

struct RiskPair {
  double plugin = 0.0;
  double bayes = 0.0;
  double excess = 0.0;
};

RiskPair to_risk_pair(const RiskCounts& counts) {
  return {counts.plugin_risk(), counts.bayes_risk(), counts.excess()};
}

// Per-cell fitted estimators plus the schedule echo for the result rows.
struct CellFits {
  bool is_constant = false;
  ConstantModelEstimate constant;
  DriftEstimate b0;
  DriftEstimate b1;
  DiffusionEstimate sigma_sq;
  bool has_sigma_fit = false;
  std::pair<double, double> p_hat{0.0, 0.0};
  int k0 = 0, k1 = 0, k_sigma = 0;
  double a0 = 0.0, a1 = 0.0, a_sigma = 0.0;
};

DriftEstimate fit_class_drift(const Dataset& train, int label, const ExperimentConfig& config,
                              long sample_size, int* k_out, double* a_out) {
  const long class_size = train.count(label);
  if (class_size <= 1) {
    *k_out = 0;
    *a_out = 0.0;
    return DriftEstimate::make_degenerate(label, truncation_scale(sample_size));
  }
  const ScheduleParams params = schedule(class_size, config.beta, config.regime, config.k_scale);
  *k_out = params.interior;
  *a_out = params.half_width;
  return fit_drift(train, label, params, config.degree, sample_size);
}

CellFits fit_cell(const ExperimentConfig& config, const Dataset& train, long sample_size) {
  CellFits fits;
  if (config.regime == Regime::kConstant) {
    fits.is_constant = true;
    fits.constant = constant_estimators(train);
    fits.p_hat = fits.constant.p_hat;
    return fits;
  }
  fits.b0 = fit_class_drift(train, 0, config, sample_size, &fits.k0, &fits.a0);
  fits.b1 = fit_class_drift(train, 1, config, sample_size, &fits.k1, &fits.a1);
  fits.p_hat = estimate_p(train);
  if (config.regime == Regime::kBounded) {
    const DiffusionSchedule sched =
        diffusion_schedule(sample_size, config.beta, config.k_scale_sigma);
    fits.sigma_sq = fit_diffusion(train, sched.half_width, sched.interior, config.degree,
                                  sample_size);
    fits.has_sigma_fit = true;
    fits.k_sigma = sched.interior;
    fits.a_sigma = sched.half_width;
  }
  return fits;
}

PluginClassifier cell_classifier(const CellFits& fits, const ExperimentConfig& config) {
  if (fits.is_constant) return make_plugin(fits.constant);
  if (config.regime == Regime::kBounded)
    return make_plugin(fits.b0, fits.b1, fits.sigma_sq, fits.p_hat);
  // unbounded-drift regime: sigma is known
  return make_plugin_known_sigma(fits.b0, fits.b1, config.model.sigma_fn(), fits.p_hat);
}

json slope_to_json(const SlopeFit& fit) {
  return {{"fitted", fit.fitted},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"points_used", fit.points_used}};
}

double mean_of(const std::vector<double>& values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double stddev_of(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ssq = 0.0;
  for (double v : values) ssq += (v - mean) * (v - mean);
  return std::sqrt(ssq / static_cast<double>(values.size() - 1));
}

json fit_to_json(const SplineFit& fit) {
  json coeffs = json::array();
  for (long i = 0; i < fit.coeffs.size(); ++i) coeffs.push_back(fit.coeffs[i]);
  return {{"spec",
           {{"A", fit.spec.half_width}, {"K", fit.spec.interior}, {"M", fit.spec.degree}}},
          {"coeffs", coeffs},
          {"constraint_radius_sq", fit.constraint_radius_sq},
          {"lagrange_multiplier", fit.lagrange_multiplier}};
}

}  // namespace

// ---------------------------------------------------------------------------
// rate experiment

ExperimentResult run_rate_experiment(const ExperimentConfig& config, int threads) {
  config.validate();
  const long grid_count = static_cast<long>(config.sample_grid.size());
  const long cells = grid_count * config.replicates;

  struct Row {
    int k0 = 0, k1 = 0, k_sigma = 0;
    double a0 = 0.0, a1 = 0.0, a_sigma = 0.0;
    RiskPair risks;
  };
  std::vector<Row> rows(cells);

  run_cells(cells, threads, [&](long cell) {
    const long grid_index = cell / config.replicates;
    const int replicate = static_cast<int>(cell % config.replicates);
    const long sample_size = config.sample_grid[grid_index];
    try {
      const int steps = config.n_rule.resolve(sample_size);
      const std::uint64_t train_stream = cell_stream(config.seed, "train", sample_size, replicate);
      CellFits fits;
      if (config.regime == Regime::kConstant) {
        // only the per-path statistics are needed; keep one path in memory
        std::vector<int> labels;
        std::vector<double> stats;
        labels.reserve(sample_size);
        stats.reserve(sample_size);
        for_each_path(config.model, sample_size, steps, train_stream, config.substeps,
                      [&](long, const Path& p) {
                        labels.push_back(*p.label);
                        stats.push_back(p.values.back() - p.values.front());
                      });
        fits.is_constant = true;
        fits.constant = constant_estimators(labels, stats);
        fits.p_hat = fits.constant.p_hat;
      } else {
        const Dataset train =
            generate_dataset(config.model, sample_size, steps, train_stream, config.substeps);
        fits = fit_cell(config, train, sample_size);
      }
      const PluginClassifier plugin = cell_classifier(fits, config);
      const PluginClassifier bayes = make_bayes(config.model);
      Row row;
      row.k0 = fits.k0;
      row.k1 = fits.k1;
      row.k_sigma = fits.k_sigma;
      row.a0 = fits.a0;
      row.a1 = fits.a1;
      row.a_sigma = fits.a_sigma;
      row.risks = to_risk_pair(
          streamed_risks(plugin, bayes, config.model, config.test_size, steps,
                         cell_stream(config.seed, "test", sample_size, replicate),
                         config.substeps));
      rows[cell] = row;
    } catch (const std::exception& e) {
      throw NumericalError("rate experiment failed at N=" + std::to_string(sample_size) +
                           " replicate=" + std::to_string(replicate) + ": " + e.what());
    }
  });

  ExperimentResult result;
  std::string& csv = result.csv;
  csv = "seed,N,n,replicate,regime,K0,A0,K1,A1,K_sigma,A_sigma,K_scale,risk_plugin,risk_bayes,"
        "excess_risk\n";
  json aggregates = json::array();
  std::vector<std::pair<double, double>> slope_points;
  for (long g = 0; g < grid_count; ++g) {
    const long sample_size = config.sample_grid[g];
    const int steps = config.n_rule.resolve(sample_size);
    std::vector<double> excesses, risks_plugin, risks_bayes;
    for (int r = 0; r < config.replicates; ++r) {
      const Row& row = rows[g * config.replicates + r];
      csv += std::to_string(config.seed) + ',' + std::to_string(sample_size) + ',' +
             std::to_string(steps) + ',' + std::to_string(r) + ',' +
             regime_to_string(config.regime) + ',';
      csv += std::to_string(row.k0) + ',';
      append_double(csv, row.a0);
      csv += ',' + std::to_string(row.k1) + ',';
      append_double(csv, row.a1);
      csv += ',' + std::to_string(row.k_sigma) + ',';
      append_double(csv, row.a_sigma);
      csv += ',';
      append_double(csv, config.k_scale);
      csv += ',';
      append_double(csv, row.risks.plugin);
      csv += ',';
      append_double(csv, row.risks.bayes);
      csv += ',';
      append_double(csv, row.risks.excess);
      csv += '\n';
      excesses.push_back(row.risks.excess);
      risks_plugin.push_back(row.risks.plugin);
      risks_bayes.push_back(row.risks.bayes);
    }
    RatePoint point;
    point.sample_size = sample_size;
    point.steps = steps;
    point.mean = mean_of(excesses);
    point.stddev = stddev_of(excesses, point.mean);
    result.aggregates.push_back(point);
    aggregates.push_back({{"N", sample_size},
                          {"n", steps},
                          {"mean_excess", point.mean},
                          {"std_excess", point.stddev},
                          {"mean_risk_plugin", mean_of(risks_plugin)},
                          {"mean_risk_bayes", mean_of(risks_bayes)}});
    if (point.mean > 0.0)
      slope_points.emplace_back(static_cast<double>(sample_size), point.mean);
  }
  if (slope_points.size() >= 2) result.slope = fit_loglog_slope(slope_points);

  result.summary = {{"tool", std::string(kToolName) + " " + kToolVersion},
                    {"experiment", "rate"},
                    {"config", config.to_json()},
                    {"aggregates", aggregates},
                    {"slope", slope_to_json(result.slope)}};
  return result;
}

// ---------------------------------------------------------------------------
// estimation experiment

ExperimentResult run_estimation_experiment(const ExperimentConfig& config, int threads) {
  config.validate();
  if (config.regime == Regime::kConstant)
    throw ConfigError("estimation experiment: regime must be bounded or unbounded_drift");
  const long grid_count = static_cast<long>(config.sample_grid.size());
  const long cells = grid_count * config.replicates;

  struct Row {
    int k0 = 0, k1 = 0, k_sigma = 0;
    double a0 = 0.0, a1 = 0.0, a_sigma = 0.0;
    double norm_b0 = 0.0, norm_b1 = 0.0, norm_sigma = 0.0;
  };
  std::vector<Row> rows(cells);
  json example_fits;
  std::mutex example_mutex;
  const long example_cell = cells - 1;

  run_cells(cells, threads, [&](long cell) {
    const long grid_index = cell / config.replicates;
    const int replicate = static_cast<int>(cell % config.replicates);
    const long sample_size = config.sample_grid[grid_index];
    try {
      const int steps = config.n_rule.resolve(sample_size);
      const Dataset train =
          generate_dataset(config.model, sample_size, steps,
                           cell_stream(config.seed, "train", sample_size, replicate),
                           config.substeps);
      const CellFits fits = fit_cell(config, train, sample_size);
      const Dataset test =
          generate_dataset(config.model, config.test_size, steps,
                           cell_stream(config.seed, "test", sample_size, replicate),
                           config.substeps);
      Row row;
      row.k0 = fits.k0;
      row.k1 = fits.k1;
      row.k_sigma = fits.k_sigma;
      row.a0 = fits.a0;
      row.a1 = fits.a1;
      row.a_sigma = fits.a_sigma;
      const CoefficientFn true_b0 = config.model.b0();
      const CoefficientFn true_b1 = config.model.b1();
      const DriftEstimate est_b0 = fits.b0;
      const DriftEstimate est_b1 = fits.b1;
      row.norm_b0 = empirical_norm([est_b0](double x) { return est_b0(x); },
                                   [true_b0](double x) { return true_b0(x); }, test, 0);
      row.norm_b1 = empirical_norm([est_b1](double x) { return est_b1(x); },
                                   [true_b1](double x) { return true_b1(x); }, test, 1);
      if (fits.has_sigma_fit) {
        const DiffusionEstimate est_sigma = fits.sigma_sq;
        const CoefficientFn true_sigma = config.model.sigma_fn();
        row.norm_sigma = empirical_norm([est_sigma](double x) { return est_sigma(x); },
                                        [true_sigma](double x) {
                                          const double s = true_sigma(x);
                                          return s * s;
                                        },
                                        test, std::nullopt);
      }
      rows[cell] = row;
      if (cell == example_cell) {
        std::lock_guard<std::mutex> lock(example_mutex);
        example_fits = {{"N", sample_size},
                        {"replicate", replicate},
                        {"b0", fit_to_json(fits.b0.fit)},
                        {"b1", fit_to_json(fits.b1.fit)},
                        {"truncation_level", fits.b0.truncation_level}};
        if (fits.has_sigma_fit) {
          example_fits["sigma_sq"] = fit_to_json(fits.sigma_sq.fit);
          example_fits["sigma_clamps"] = {fits.sigma_sq.lower_clamp, fits.sigma_sq.upper_clamp};
        }
      }
    } catch (const std::exception& e) {
      throw NumericalError("estimation experiment failed at N=" + std::to_string(sample_size) +
                           " replicate=" + std::to_string(replicate) + ": " + e.what());
    }
  });

  ExperimentResult result;
  std::string& csv = result.csv;
  csv = "seed,N,n,replicate,regime,K0,A0,K1,A1,K_sigma,A_sigma,K_scale,norm_b0,norm_b1,"
        "norm_sigma_sq\n";
  json aggregates = json::array();
  std::vector<std::pair<double, double>> slope_points;
  for (long g = 0; g < grid_count; ++g) {
    const long sample_size = config.sample_grid[g];
    const int steps = config.n_rule.resolve(sample_size);
    std::vector<double> n0s, n1s, nsig, combined;
    for (int r = 0; r < config.replicates; ++r) {
      const Row& row = rows[g * config.replicates + r];
      csv += std::to_string(config.seed) + ',' + std::to_string(sample_size) + ',' +
             std::to_string(steps) + ',' + std::to_string(r) + ',' +
             regime_to_string(config.regime) + ',';
      csv += std::to_string(row.k0) + ',';
      append_double(csv, row.a0);
      csv += ',' + std::to_string(row.k1) + ',';
      append_double(csv, row.a1);
      csv += ',' + std::to_string(row.k_sigma) + ',';
      append_double(csv, row.a_sigma);
      csv += ',';
      append_double(csv, config.k_scale);
      csv += ',';
      append_double(csv, row.norm_b0);
      csv += ',';
      append_double(csv, row.norm_b1);
      csv += ',';
      append_double(csv, row.norm_sigma);
      csv += '\n';
      n0s.push_back(row.norm_b0);
      n1s.push_back(row.norm_b1);
      nsig.push_back(row.norm_sigma);
      combined.push_back(0.5 * (row.norm_b0 + row.norm_b1));
    }
    EstimationAggregate agg;
    agg.sample_size = sample_size;
    agg.steps = steps;
    agg.mean_norm_b0 = mean_of(n0s);
    agg.mean_norm_b1 = mean_of(n1s);
    agg.mean_norm_sigma = mean_of(nsig);
    agg.mean_combined = mean_of(combined);
    agg.std_combined = stddev_of(combined, agg.mean_combined);
    result.estimation_aggregates.push_back(agg);
    RatePoint point;
    point.sample_size = sample_size;
    point.steps = steps;
    point.mean = agg.mean_combined;
    point.stddev = agg.std_combined;
    result.aggregates.push_back(point);
    aggregates.push_back({{"N", sample_size},
                          {"n", steps},
                          {"mean_norm_b0", agg.mean_norm_b0},
                          {"mean_norm_b1", agg.mean_norm_b1},
                          {"mean_norm_sigma_sq", agg.mean_norm_sigma},
                          {"mean_combined", agg.mean_combined},
                          {"std_combined", agg.std_combined}});
    if (agg.mean_combined > 0.0)
      slope_points.emplace_back(static_cast<double>(sample_size), agg.mean_combined);
  }
  if (slope_points.size() >= 2) result.slope = fit_loglog_slope(slope_points);

  result.summary = {{"tool", std::string(kToolName) + " " + kToolVersion},
                    {"experiment", "estimation"},
                    {"config", config.to_json()},
                    {"aggregates", aggregates},
                    {"slope", slope_to_json(result.slope)},
                    {"example_fits", example_fits}};
  return result;
}

// ---------------------------------------------------------------------------
// gram diagnostic

ExperimentResult run_gram_diagnostic(const ExperimentConfig& config, long sample_size,
                                     int threads) {
  config.validate();
  if (config.regime != Regime::kBounded)
    throw ConfigError("gram diagnostic: bounded regime required");
  if (sample_size < 4) throw ConfigError("gram diagnostic: N must be >= 4");

  std::vector<std::array<GramRow, 2>> rows(config.replicates);
  run_cells(config.replicates, threads, [&](long cell) {
    const int replicate = static_cast<int>(cell);
    const int steps = config.n_rule.resolve(sample_size);
    const Dataset dataset =
        generate_dataset(config.model, sample_size, steps,
                         cell_stream(config.seed, "gram", sample_size, replicate),
                         config.substeps);
    for (int label = 0; label < 2; ++label) {
      GramRow row;
      row.sample_size = sample_size;
      row.replicate = replicate;
      row.class_label = label;
      row.class_size = dataset.count(label);
      if (row.class_size <= 1) {
        row.skipped = true;
      } else {
        const ScheduleParams params =
            schedule(row.class_size, config.beta, Regime::kBounded, config.k_scale);
        const SplineSpec spec =
            SplineSpec::make(params.half_width, params.interior, config.degree);
        const Eigen::MatrixXd gram = empirical_gram(spec, dataset, label);
        row.interior = params.interior;
        row.half_width = params.half_width;
        row.lambda_min = min_eigenvalue(gram);
        row.inv_op_norm = inverse_op_norm(gram);
        const double log_ni = std::log(static_cast<double>(row.class_size));
        row.bound_value =
            config.gram_bound_c * static_cast<double>(row.class_size) / (log_ni * log_ni);
        row.within_bound = row.inv_op_norm <= row.bound_value;
      }
      rows[cell][label] = row;
    }
  });

  ExperimentResult result;
  std::string& csv = result.csv;
  csv = "seed,N,replicate,class,N_class,K,A,M,lambda_min,inv_op_norm,bound_value,within_bound,"
        "status\n";
  json rows_json = json::array();
  for (int r = 0; r < config.replicates; ++r) {
    for (int label = 0; label < 2; ++label) {
      const GramRow& row = rows[r][label];
      result.gram_rows.push_back(row);
      csv += std::to_string(config.seed) + ',' + std::to_string(sample_size) + ',' +
             std::to_string(r) + ',' + std::to_string(label) + ',' +
             std::to_string(row.class_size) + ',' + std::to_string(row.interior) + ',';
      append_double(csv, row.half_width);
      csv += ',' + std::to_string(config.degree) + ',';
      append_double(csv, row.lambda_min);
      csv += ',';
      append_double(csv, row.inv_op_norm);
      csv += ',';
      append_double(csv, row.bound_value);
      csv += ',';
      csv += row.within_bound ? '1' : '0';
      csv += ',';
      csv += row.skipped ? "skipped" : "ok";
      csv += '\n';
      rows_json.push_back({{"N", row.sample_size},
                           {"replicate", row.replicate},
                           {"class", row.class_label},
                           {"N_class", row.class_size},
                           {"K", row.interior},
                           {"A", row.half_width},
                           {"lambda_min", row.lambda_min},
                           {"inv_op_norm", row.inv_op_norm},
                           {"bound_value", row.bound_value},
                           {"within_bound", row.within_bound},
                           {"skipped", row.skipped}});
    }
  }
  result.summary = {{"tool", std::string(kToolName) + " " + kToolVersion},
                    {"experiment", "gram"},
                    {"config", config.to_json()},
                    {"N", sample_size},
                    {"rows", rows_json}};
  return result;
}

// ---------------------------------------------------------------------------
// adversarial experiment

ExperimentResult run_adversarial_experiment(const HypothesisFamily& family,
                                            const ExperimentConfig& config, int threads) {
  config.validate();
  if (family.members.empty()) throw ConfigError("adversarial experiment: empty family");

  // Each member plays the true class-1 drift; sigma is known and equals 1.
  std::vector<MixtureModel> models;
  models.reserve(family.members.size());
  for (const CoefficientFn& member : family.members) {
    models.push_back(MixtureModel::create(CoefficientFn::constant(0.0), member,
                                          CoefficientFn::constant(1.0), 0.5, 0.5, 0.0));
  }

  const long member_count = static_cast<long>(family.members.size());
  const long grid_count = static_cast<long>(config.sample_grid.size());
  const long cells = member_count * grid_count * config.replicates;

  struct Row {
    int k0 = 0, k1 = 0;
    double a0 = 0.0, a1 = 0.0;
    RiskPair risks;
  };
  std::vector<Row> rows(cells);

  run_cells(cells, threads, [&](long cell) {
    const long member = cell / (grid_count * config.replicates);
    const long rest = cell % (grid_count * config.replicates);
    const long grid_index = rest / config.replicates;
    const int replicate = static_cast<int>(rest % config.replicates);
    const long sample_size = config.sample_grid[grid_index];
    const MixtureModel& model = models[member];
    try {
      const int steps = config.n_rule.resolve(sample_size);
      const std::uint64_t train_stream = derive_stream(
          cell_stream(config.seed, "train", sample_size, replicate),
          {static_cast<std::uint64_t>(member)});
      const std::uint64_t test_stream = derive_stream(
          cell_stream(config.seed, "test", sample_size, replicate),
          {static_cast<std::uint64_t>(member)});
      const Dataset train =
          generate_dataset(model, sample_size, steps, train_stream, config.substeps);

      Row row;
      DriftEstimate est_b0, est_b1;
      {
        const long n0 = train.count(0);
        const long n1 = train.count(1);
        est_b0 = n0 <= 1 ? DriftEstimate::make_degenerate(0, truncation_scale(sample_size))
                         : fit_drift(train, 0,
                                     schedule(n0, config.beta, Regime::kBounded, config.k_scale),
                                     config.degree, sample_size);
        est_b1 = n1 <= 1 ? DriftEstimate::make_degenerate(1, truncation_scale(sample_size))
                         : fit_drift(train, 1,
                                     schedule(n1, config.beta, Regime::kBounded, config.k_scale),
                                     config.degree, sample_size);
        row.k0 = est_b0.degenerate ? 0 : est_b0.fit.spec.interior;
        row.k1 = est_b1.degenerate ? 0 : est_b1.fit.spec.interior;
        row.a0 = est_b0.degenerate ? 0.0 : est_b0.fit.spec.half_width;
        row.a1 = est_b1.degenerate ? 0.0 : est_b1.fit.spec.half_width;
      }
      const PluginClassifier plugin = make_plugin_known_sigma(
          est_b0, est_b1, CoefficientFn::constant(1.0), estimate_p(train));
      const PluginClassifier bayes = make_bayes(model);
      row.risks = to_risk_pair(streamed_risks(plugin, bayes, model, config.test_size, steps,
                                              test_stream, config.substeps));
      rows[cell] = row;
    } catch (const std::exception& e) {
      throw NumericalError("adversarial experiment failed at member=" + std::to_string(member) +
                           " N=" + std::to_string(sample_size) +
                           " replicate=" + std::to_string(replicate) + ": " + e.what());
    }
  });

  ExperimentResult result;
  std::string& csv = result.csv;
  csv = "seed,N,n,replicate,member,K0,A0,K1,A1,K_scale,risk_plugin,risk_bayes,excess_risk\n";
  json per_member = json::array();
  std::vector<std::vector<double>> member_means(member_count,
                                                std::vector<double>(grid_count, 0.0));
  for (long member = 0; member < member_count; ++member) {
    json member_points = json::array();
    for (long g = 0; g < grid_count; ++g) {
      const long sample_size = config.sample_grid[g];
      const int steps = config.n_rule.resolve(sample_size);
      std::vector<double> excesses;
      for (int r = 0; r < config.replicates; ++r) {
        const Row& row =
            rows[member * grid_count * config.replicates + g * config.replicates + r];
        csv += std::to_string(config.seed) + ',' + std::to_string(sample_size) + ',' +
               std::to_string(steps) + ',' + std::to_string(r) + ',' + std::to_string(member) +
               ',' + std::to_string(row.k0) + ',';
        append_double(csv, row.a0);
        csv += ',' + std::to_string(row.k1) + ',';
        append_double(csv, row.a1);
        csv += ',';
        append_double(csv, config.k_scale);
        csv += ',';
        append_double(csv, row.risks.plugin);
        csv += ',';
        append_double(csv, row.risks.bayes);
        csv += ',';
        append_double(csv, row.risks.excess);
        csv += '\n';
        excesses.push_back(row.risks.excess);
      }
      const double mean = mean_of(excesses);
      member_means[member][g] = mean;
      member_points.push_back({{"N", sample_size}, {"mean_excess", mean}});
    }
    per_member.push_back({{"member", member}, {"points", member_points}});
  }

  json max_curve = json::array();
  std::vector<std::pair<double, double>> slope_points;
  for (long g = 0; g < grid_count; ++g) {
    double worst = member_means[0][g];
    for (long member = 1; member < member_count; ++member)
      worst = std::max(worst, member_means[member][g]);
    RatePoint point;
    point.sample_size = config.sample_grid[g];
    point.steps = config.n_rule.resolve(point.sample_size);
    point.mean = worst;
    result.aggregates.push_back(point);
    max_curve.push_back({{"N", point.sample_size}, {"max_mean_excess", worst}});
    if (worst > 0.0) slope_points.emplace_back(static_cast<double>(point.sample_size), worst);
  }
  if (slope_points.size() >= 2) result.slope = fit_loglog_slope(slope_points);

  result.summary = {{"tool", std::string(kToolName) + " " + kToolVersion},
                    {"experiment", "adversarial"},
                    {"config", config.to_json()},
                    {"family",
                     {{"beta", family.beta},
                      {"R", family.holder_radius},
                      {"c0", family.c0},
                      {"kappa", family.kappa},
                      {"N", family.size_ref},
                      {"m", family.m},
                      {"count", static_cast<long>(family.members.size())}}},
                    {"per_member", per_member},
                    {"max_curve", max_curve},
                    {"slope", slope_to_json(result.slope)}};
  return result;
}

void write_outputs(const ExperimentResult& result, const std::string& base_path) {
  const std::filesystem::path base(base_path);
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
  {
    std::ofstream csv(base_path + ".csv", std::ios::binary);
    if (!csv) throw ConfigError("cannot open output file " + base_path + ".csv");
    csv << result.csv;
  }
  {
    std::ofstream summary(base_path + ".json", std::ios::binary);
    if (!summary) throw ConfigError("cannot open output file " + base_path + ".json");
    summary << result.summary.dump(2) << '\n';
  }
}

}  // namespace driftlab
