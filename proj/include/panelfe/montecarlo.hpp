#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panelfe/links.hpp"
#include "panelfe/model.hpp"
#include "panelfe/panel.hpp"

namespace panelfe {

// Directed-pair population: entity i as importer (unit), j as exporter
// (period), no self pairs.
struct SimDesign {
  std::vector<std::string> covariate_names;
  Eigen::VectorXd beta_true;
  Eigen::VectorXd alpha;                 // P
  Eigen::VectorXd gamma;                 // P
  std::vector<Eigen::MatrixXd> covariates;  // K matrices of P x P
  Family family = Family::Logit;
};

inline const Eigen::Vector2d kCalibratedBeta{2.838, -0.839};

// alpha, gamma, ldist ~ N(0, 1); ltrade ~ Bernoulli(logistic(b2 ldist + alpha + gamma)).
SimDesign synthetic_design(std::uint64_t seed, int entities = 157, const Eigen::VectorXd& beta = kCalibratedBeta);

// Reads a file written by `fit --export-effects`.
SimDesign calibrated_design(const std::string& path);

int design_entities(const SimDesign& design);

// 1 when index > ln(1/u - 1), i.e. y = 1 with probability logistic(index).
int simulate_outcome(double index, double u);

// One replication's sample: entities drawn without replacement, outcomes drawn
// from the design. Unit and period labels are the 1-based entity numbers.
struct SimSample {
  PanelData panel;
  Eigen::VectorXd ape_true;  // average partial effects at the true parameters
  std::vector<int> entities;
};

SimSample draw_sample(const SimDesign& design, int n, std::mt19937_64& rng);

std::mt19937_64 replication_rng(std::uint64_t seed, int rep);

struct MetricRow {
  std::string estimator;
  int n = 0;
  std::string parameter;  // "coef <name>" or "ape <name>"
  double bias_pct = 0.0;
  double sd_pct = 0.0;
  double rmse_pct = 0.0;
  double se_sd_ratio = 0.0;
  double coverage95 = 0.0;
  int replications = 0;  // successful
  int failures = 0;
  bool absolute = false;  // true value is zero: errors in absolute units
};

struct StudyOptions {
  std::vector<int> sizes{25, 50, 75, 100, 157};
  int reps = 500;
  std::vector<std::string> estimators{"fe", "an0", "ss2", "double"};
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Translates an estimator name (fe, an<L>, ss1, ss2, js, sj, jj, double) into
// a spec. Throws InvalidOption.
ModelSpec estimator_spec(const std::string& name, Family family);

std::vector<MetricRow> run_study(const SimDesign& design, const StudyOptions& options);

std::string metrics_csv(const std::vector<MetricRow>& rows);
std::string metrics_table(const std::vector<MetricRow>& rows);

}  // namespace panelfe
