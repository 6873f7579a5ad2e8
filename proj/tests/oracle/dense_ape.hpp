#pragma once

#include <vector>

#include <Eigen/Dense>

#include "panelfe/panel.hpp"

namespace oracle {

struct DenseApeVariance {
  Eigen::VectorXd delta;
  Eigen::MatrixXd d_beta_delta;  // row c: total derivative of delta_c in beta
  Eigen::MatrixXd gamma_it;      // n x K influence values
  Eigen::MatrixXd sampling;      // unit and period covariance terms, divided by n^2
  Eigen::MatrixXd noise;         // sum of Gamma Gamma', divided by n^2
};

// APE variance pieces written out cell by cell on a dense dummy design.
DenseApeVariance dense_ape_variance(const panelfe::PanelData& panel, bool probit, bool ieffects, bool teffects,
                                    const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                                    const Eigen::VectorXd& gamma, const std::vector<bool>& binary);

}  // namespace oracle
