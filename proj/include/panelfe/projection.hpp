#pragma once

#include <Eigen/Dense>

#include "panelfe/model.hpp"
#include "panelfe/panel.hpp"

namespace panelfe {

// Weighted least-squares fit of each column on unit and/or period dummies.
struct ProjectionResult {
  Eigen::MatrixXd fitted;       // n x m, a_i + b_t
  Eigen::MatrixXd residual;     // n x m, input - fitted
  Eigen::MatrixXd unit_coef;    // N x m, a_i (zero in time-only mode)
  Eigen::MatrixXd period_coef;  // T x m, b_t (zero in individual-only mode)
  int sweeps = 0;
  bool converged = false;
};

inline constexpr double kProjectionTol = 1e-10;
inline constexpr int kProjectionMaxIter = 10000;
// Weights below this are raised to it inside the projection only.
inline constexpr double kWeightFloor = 1e-12;

// Alternating weighted demeaning (Gauss-Seidel over the effect blocks) until
// the sup-norm of a sweep's adjustments drops below tol * (1 + max|values|).
// Throws NotConverged after max_iter sweeps.
ProjectionResult weighted_residualize(const PanelData& panel, const Eigen::MatrixXd& values,
                                      const Eigen::VectorXd& weights, EffectMode mode,
                                      double tol = kProjectionTol, int max_iter = kProjectionMaxIter);

}  // namespace panelfe
