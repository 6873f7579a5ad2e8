#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "panelfe/model.hpp"
#include "panelfe/panel.hpp"

namespace panelfe {

// Starting values sized to the panel being fitted.
struct FitStart {
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;  // n_units
  Eigen::VectorXd gamma;  // n_periods
};

struct FitOptions {
  double tol = 1e-8;   // sup-norm of the score in beta and in every effect
  int max_iter = 200;  // outer beta iterations
  int max_sweeps = 10000;
  std::optional<FitStart> start;
};

struct FitResult {
  Eigen::VectorXd beta;
  // Always sized n_units / n_periods; an excluded block stays identically zero.
  Eigen::VectorXd alpha;
  Eigen::VectorXd gamma;
  double loglik = 0.0;
  double loglik_null = 0.0;
  int iterations = 0;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> loglik_trace;  // after each accepted outer step
};

// X beta + alpha_i + gamma_t for every row.
Eigen::VectorXd linear_index(const PanelData& panel, const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                             const Eigen::VectorXd& gamma);

double sample_loglik(const PanelData& panel, Family family, const Eigen::VectorXd& index);

// Joint maximum likelihood for (beta, alpha, gamma). The panel must already be
// free of perfectly classified groups for the included effects. With both
// effect blocks the first period's gamma is normalized to zero.
// Throws NotConverged, CollinearCovariates.
FitResult fit_mle(const PanelData& panel, const ModelSpec& spec, const FitOptions& options = {});

struct ProfiledEffects {
  Eigen::VectorXd alpha;
  Eigen::VectorXd gamma;
  double loglik = 0.0;
  int sweeps = 0;
};

// Effects maximizing the likelihood at a fixed beta, same normalization as
// fit_mle. Warm start values are optional. Throws NotConverged.
ProfiledEffects profile_effects(const Eigen::VectorXd& beta, const PanelData& panel, const ModelSpec& spec,
                                const FitOptions& options = {});

// n [ybar log ybar + (1 - ybar) log(1 - ybar)].
double loglik_null(const PanelData& panel, Family family);

// X~' diag(omega) X~ / (N T) at the given estimates: the curvature of the
// profiled likelihood used by the beta step.
Eigen::MatrixXd beta_step_curvature(const PanelData& panel, const ModelSpec& spec, const FitResult& fit);

}  // namespace panelfe
