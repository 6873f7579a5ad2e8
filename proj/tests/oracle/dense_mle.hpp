#pragma once

#include <optional>

#include <Eigen/Dense>

#include "panelfe/panel.hpp"

namespace oracle {

struct DenseFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;  // zeros when excluded
  Eigen::VectorXd gamma;  // gamma(0) = 0 when both blocks are present
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double min_curvature = 0.0;  // smallest eigenvalue of the negated Hessian
  double max_abs_param = 0.0;

  // A finite, well-separated interior maximum.
  bool interior(double bound = 10.0) const { return converged && max_abs_param < bound && min_curvature > 1e-6; }
};

// Newton-Raphson on the full parameter vector (beta, alpha, gamma) with one
// dummy column per effect, gamma of the first period dropped when both
// blocks are present. With fixed_beta set only the effects are optimized.
DenseFit dense_newton(const panelfe::PanelData& panel, bool probit, bool ieffects, bool teffects,
                      const std::optional<Eigen::VectorXd>& fixed_beta = std::nullopt);

}  // namespace oracle
