#pragma once

#include <vector>

#include <Eigen/Dense>

#include "panelfe/ape.hpp"
#include "panelfe/estimator.hpp"
#include "panelfe/model.hpp"
#include "panelfe/panel.hpp"

namespace panelfe {

// Link values, residualized covariates and partial-effect projections at a
// fitted (beta, alpha, gamma). Shared by the bias corrections and the
// standard errors.
struct PlugIn {
  Eigen::VectorXd index;
  Eigen::VectorXd F, dF, d2F, H, omega;
  Eigen::VectorXd h_resid;  // H (y - F)
  Eigen::MatrixXd x_tilde;  // n x K
  PartialEffects effects;
  Eigen::MatrixXd psi;        // fitted value of -d_pi / omega on the effects
  Eigen::MatrixXd psi_tilde;  // residual of the same projection
};

PlugIn compute_plugin(const PanelData& panel, const ModelSpec& spec, const FitResult& fit,
                      const std::vector<bool>& binary);

struct BiasComponents {
  Eigen::MatrixXd W;        // K x K
  Eigen::VectorXd B;        // individual-effect bias, K
  Eigen::VectorXd D;        // time-effect bias, K
  Eigen::VectorXd B_delta;  // per covariate APE
  Eigen::VectorXd D_delta;
  int lags_used = 0;
};

// Plug-in bias terms. Throws CollinearCovariates (W not positive definite)
// and LTooLarge.
BiasComponents bias_components(const PanelData& panel, const ModelSpec& spec, const PlugIn& plugin);

// beta_hat - W^{-1} B / T - W^{-1} D / N. Throws SingularW.
Eigen::VectorXd correct_beta(const Eigen::VectorXd& beta_hat, const BiasComponents& components, int n_units,
                             int n_periods);

struct CorrectedApe {
  Eigen::VectorXd delta;              // bias corrected
  Eigen::VectorXd delta_reprofiled;   // APE at the corrected beta before subtracting the bias
  PartialEffects effects;
};

// Re-profiles the effects at beta_corrected, averages the partial effects and
// subtracts B_delta / T + D_delta / N.
CorrectedApe correct_ape(const Eigen::VectorXd& beta_corrected, const PanelData& panel, const ModelSpec& spec,
                         const BiasComponents& components, const std::vector<bool>& binary,
                         const FitOptions& options = {});

struct AnalyticalResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd delta;
  BiasComponents components;
};

AnalyticalResult analytical_correct(const PanelData& panel, const ModelSpec& spec, const FitResult& fit,
                                    const PlugIn& plugin, const std::vector<bool>& binary);

}  // namespace panelfe
