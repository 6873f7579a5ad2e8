#pragma once

#include <vector>

#include <Eigen/Dense>

#include "panelfe/estimator.hpp"
#include "panelfe/model.hpp"
#include "panelfe/panel.hpp"

namespace panelfe {

// Per-observation partial effects (n x K) and their index derivatives.
struct PartialEffects {
  Eigen::MatrixXd delta_it;  // Delta_it per covariate
  Eigen::VectorXd delta;     // column means over the retained rows
  Eigen::MatrixXd d_pi;      // dDelta_it / dindex
  Eigen::MatrixXd d2_pi;     // d2Delta_it / dindex2
  // Row k: sample mean over rows of the partial derivative of Delta_it,k in
  // beta, holding the effects fixed.
  Eigen::MatrixXd mean_d_beta;
};

// Binary treatment per covariate: the panel's binary mask with the spec's
// force_binary / force_continuous overrides applied. Throws InvalidOption for
// unknown names or forcing a non-0/1 covariate to binary.
std::vector<bool> resolve_binary(const PanelData& panel, const ModelSpec& spec);

PartialEffects partial_effects(const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                               const Eigen::VectorXd& gamma, const PanelData& panel, Family family,
                               const std::vector<bool>& binary);

// Re-profiles the effects at beta_tilde and evaluates the partial effects there.
PartialEffects ape_at(const Eigen::VectorXd& beta_tilde, const PanelData& panel, const ModelSpec& spec,
                      const std::vector<bool>& binary, const FitOptions& options = {});

}  // namespace panelfe
