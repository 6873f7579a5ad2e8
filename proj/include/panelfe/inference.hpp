#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "panelfe/analytical.hpp"
#include "panelfe/panel.hpp"

namespace panelfe {

inline constexpr double kCriticalValue95 = 1.959964;

struct FitStats {
  double lr_chi2 = 0.0;
  double p_value = 1.0;
  double pseudo_r2 = 0.0;
};

// lr = 2 (ll - ll0) on K degrees of freedom, pseudo R2 = 1 - ll / ll0.
FitStats lr_and_fit_stats(double loglik, double loglik_null, int k);

// W^{-1} / (N T). Throws SingularW.
Eigen::MatrixXd vcov_beta(const BiasComponents& components, int n_units, int n_periods);
Eigen::VectorXd se_beta(const BiasComponents& components, int n_units, int n_periods);

// (M - m) / (M - 1); 1 for an infinite population. Throws InvalidOption when M < m.
double finite_population_correction(std::optional<long long> population, std::size_t sample_size);

struct ApeVariance {
  Eigen::MatrixXd vcov;              // with the given fpc
  Eigen::MatrixXd vcov_infinite;     // fpc = 1
  Eigen::MatrixXd vcov_noise;        // estimation-noise term alone
  Eigen::VectorXd se;
  Eigen::VectorXd se_infinite;
  Eigen::MatrixXd gamma_it;          // n x K influence values
  Eigen::MatrixXd d_beta_delta;      // row k: derivative of delta_k in beta
  double fpc = 1.0;
  int clamped = 0;                   // negative diagonals set to zero
};

// APE variance at the uncorrected fit:
//   (1/n^2) [ fpc (sum_i u_i u_i' + sum_t (v_t v_t' - sum_i D_it D_it')) + sum_it G_it G_it' ]
// with D_it = Delta_it - mean Delta, u_i, v_t its unit and period sums and
// G_it = (n/(NT)) D_beta' W^{-1} H (y - F) x~_it - Psi_it H (y - F).
ApeVariance ape_variance(const PanelData& panel, const PlugIn& plugin, const BiasComponents& components,
                         double fpc);

// Eigenvalues above rel_tol times the largest one in absolute value.
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

}  // namespace panelfe
