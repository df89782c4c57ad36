#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "driftlab/estimators.hpp"
#include "driftlab/hypothesis.hpp"
#include "driftlab/mixture_model.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

nlohmann::json coefficient_to_json(const CoefficientFn& f);
CoefficientFn coefficient_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const MixtureModel& model);
MixtureModel model_from_json(const nlohmann::json& j);

// Test-set size rule: n = N (high-frequency coupling n ~ N) or a fixed n.
struct NRule {
  enum class Type { kEqualN, kFixed };
  Type type = Type::kEqualN;
  int fixed_n = 0;

  int resolve(long sample_size) const;
};

struct FamilySettings {
  double holder_radius = 1.0;  // R
  double c0 = 1.0;
  double kappa = 1.0;
  int count = 8;
  long size_ref = 0;  // N fixing m; 0 means "largest grid entry"
};

struct ExperimentConfig {
  MixtureModel model;
  double beta = 1.0;
  Regime regime = Regime::kBounded;
  std::vector<long> sample_grid;  // N values, strictly increasing, all >= 4
  NRule n_rule;
  int replicates = 1;
  int test_size = 1;
  std::uint64_t seed = 1;
  double k_scale = 1.0;
  double k_scale_sigma = 1.0;
  int degree = 3;  // M
  std::string output_path = "experiment";
  int substeps = 1;
  FamilySettings family;
  double gram_bound_c = 1.0;
  long simulate_size = 0;  // simulate subcommand; 0 falls back to the grid
  int simulate_steps = 0;

  explicit ExperimentConfig(MixtureModel m) : model(std::move(m)) {}

  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Least-squares line through (log N, log value); r_squared in [0,1].
struct SlopeFit {
  bool fitted = false;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};

// OLS on (ln N, ln value). Requires >= 2 points, all values positive.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

struct RatePoint {
  long sample_size = 0;
  int steps = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct EstimationAggregate {
  long sample_size = 0;
  int steps = 0;
  double mean_norm_b0 = 0.0;
  double mean_norm_b1 = 0.0;
  double mean_norm_sigma = 0.0;
  double mean_combined = 0.0;
  double std_combined = 0.0;
};

struct GramRow {
  long sample_size = 0;
  int replicate = 0;
  int class_label = 0;
  long class_size = 0;
  int interior = 0;
  double half_width = 0.0;
  double lambda_min = 0.0;
  double inv_op_norm = 0.0;
  double bound_value = 0.0;
  bool within_bound = false;
  bool skipped = false;
};

struct ExperimentResult {
  std::string csv;
  nlohmann::json summary;
  SlopeFit slope;
  std::vector<RatePoint> aggregates;
  std::vector<EstimationAggregate> estimation_aggregates;
  std::vector<GramRow> gram_rows;
};

// Stream id for the dataset of one experiment cell; exposed so tests can
// verify train/test stream disjointness.
std::uint64_t cell_stream(std::uint64_t seed, std::string_view tag, long sample_size,
                          int replicate);

// Excess-risk rate experiment over the N grid: per cell, simulate a training
// set, fit the regime's estimators, build the plug-in classifier and measure
// its excess risk against the exact Bayes classifier on a fresh test set.
ExperimentResult run_rate_experiment(const ExperimentConfig& config, int threads = 1);

// Drift (and, in the bounded regime, squared-diffusion) estimation-error
// experiment: empirical norms against the true coefficients on a fresh test
// set, slope fitted on the per-N means of the class-averaged drift norm.
ExperimentResult run_estimation_experiment(const ExperimentConfig& config, int threads = 1);

// Conditioning diagnostic: per replicate and class, the empirical Gram matrix
// of the scheduled spline basis, its smallest eigenvalue, and the comparison
// value c N_i / log^2(N_i).
ExperimentResult run_gram_diagnostic(const ExperimentConfig& config, long sample_size,
                                     int threads = 1);

// Worst-case probing over a hypothesis family: each member plays the true
// class-1 drift (b0 = 0, sigma = 1 known, p = (1/2, 1/2)); reports the
// per-member mean excess risks and the max over members per N.
ExperimentResult run_adversarial_experiment(const HypothesisFamily& family,
                                            const ExperimentConfig& config, int threads = 1);

// Writes base_path + ".csv" and base_path + ".json" (LF line endings).
void write_outputs(const ExperimentResult& result, const std::string& base_path);

}  // namespace driftlab
