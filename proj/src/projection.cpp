#include "panelfe/projection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "panelfe/error.hpp"

namespace panelfe {

namespace {

// Removes the weighted mean of `r` within each group; accumulates the removed
// means into `coef` and returns the largest absolute adjustment.
double demean_groups(const std::vector<std::vector<int>>& groups, const Eigen::VectorXd& w,
                     const Eigen::VectorXd& group_weight, Eigen::MatrixXd& r, Eigen::MatrixXd& coef) {
  const Eigen::Index m = r.cols();
  double change = 0.0;
  Eigen::RowVectorXd acc(m);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& rows = groups[g];
    if (rows.empty()) continue;
    acc.setZero();
    for (int row : rows) acc.noalias() += w(row) * r.row(row);
    acc /= group_weight(static_cast<Eigen::Index>(g));
    for (int row : rows) r.row(row) -= acc;
    coef.row(static_cast<Eigen::Index>(g)) += acc;
    change = std::max(change, acc.cwiseAbs().maxCoeff());
  }
  return change;
}

Eigen::VectorXd group_weights(const std::vector<std::vector<int>>& groups, const Eigen::VectorXd& w) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(groups.size()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double s = 0.0;
    for (int row : groups[g]) s += w(row);
    out(static_cast<Eigen::Index>(g)) = s;
  }
  return out;
}

}  // namespace

ProjectionResult weighted_residualize(const PanelData& panel, const Eigen::MatrixXd& values,
                                      const Eigen::VectorXd& weights, EffectMode mode, double tol,
                                      int max_iter) {
  const Eigen::Index n = static_cast<Eigen::Index>(panel.n_obs());
  const Eigen::Index m = values.cols();
  Eigen::VectorXd w = weights.cwiseMax(kWeightFloor);

  ProjectionResult out;
  out.residual = values;
  out.unit_coef = Eigen::MatrixXd::Zero(panel.n_units(), m);
  out.period_coef = Eigen::MatrixXd::Zero(panel.n_periods(), m);
  if (n == 0 || m == 0) {
    out.fitted = Eigen::MatrixXd::Zero(n, m);
    out.converged = true;
    return out;
  }

  const bool use_i = mode != EffectMode::Time;
  const bool use_t = mode != EffectMode::Individual;
  const Eigen::VectorXd wi = use_i ? group_weights(panel.rows_of_unit(), w) : Eigen::VectorXd();
  const Eigen::VectorXd wt = use_t ? group_weights(panel.rows_of_period(), w) : Eigen::VectorXd();
  const double threshold = tol * (1.0 + values.cwiseAbs().maxCoeff());

  double previous = 0.0;
  for (int sweep = 1; sweep <= max_iter; ++sweep) {
    double change = 0.0;
    if (use_i) change = std::max(change, demean_groups(panel.rows_of_unit(), w, wi, out.residual, out.unit_coef));
    if (use_t) {
      change = std::max(change, demean_groups(panel.rows_of_period(), w, wt, out.residual, out.period_coef));
    }
    out.sweeps = sweep;
    // A single block is an exact projection after one pass.
    if (!(use_i && use_t)) {
      out.converged = true;
      break;
    }
    // Geometric tail bound on the remaining distance to the fixed point.
    const double rate = (sweep > 1 && previous > 0.0) ? std::min(change / previous, 0.999) : 0.5;
    if (change < threshold && change / (1.0 - rate) < 10.0 * threshold) {
      out.converged = true;
      break;
    }
    previous = change;
  }
  if (!out.converged) {
    throw Error(ErrorCode::NotConverged,
                "weighted projection did not converge in " + std::to_string(max_iter) + " sweeps");
  }
  out.fitted = values - out.residual;
  return out;
}

}  // namespace panelfe
