#include "panelfe/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "panelfe/error.hpp"

namespace panelfe {

FitStats lr_and_fit_stats(double loglik, double loglik_null, int k) {
  FitStats s;
  s.lr_chi2 = 2.0 * (loglik - loglik_null);
  if (k > 0 && s.lr_chi2 > 0.0) {
    s.p_value = boost::math::gamma_q(0.5 * k, 0.5 * s.lr_chi2);
  } else {
    s.p_value = 1.0;
  }
  s.pseudo_r2 = loglik_null != 0.0 ? 1.0 - loglik / loglik_null : 0.0;
  return s;
}

Eigen::MatrixXd vcov_beta(const BiasComponents& components, int n_units, int n_periods) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(components.W);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularW, "W is singular");
  Eigen::MatrixXd v = lu.inverse() / (static_cast<double>(n_units) * static_cast<double>(n_periods));
  return 0.5 * (v + v.transpose());
}

Eigen::VectorXd se_beta(const BiasComponents& components, int n_units, int n_periods) {
  return vcov_beta(components, n_units, n_periods).diagonal().cwiseMax(0.0).cwiseSqrt();
}

double finite_population_correction(std::optional<long long> population, std::size_t sample_size) {
  if (!population) return 1.0;
  const long long big_m = *population;
  const auto m = static_cast<long long>(sample_size);
  if (big_m < m) {
    throw Error(ErrorCode::InvalidOption, "population " + std::to_string(big_m) +
                                              " is smaller than the sample size " + std::to_string(m));
  }
  if (big_m <= 1) return 0.0;
  return static_cast<double>(big_m - m) / static_cast<double>(big_m - 1);
}

ApeVariance ape_variance(const PanelData& panel, const PlugIn& p, const BiasComponents& components,
                         double fpc) {
  const Eigen::Index n = static_cast<Eigen::Index>(panel.n_obs());
  const Eigen::Index k = panel.n_covariates();
  const double nd = static_cast<double>(n);
  const double nt = static_cast<double>(panel.n_units()) * static_cast<double>(panel.n_periods());

  ApeVariance out;
  out.fpc = fpc;

  // Effects move with beta by minus the fitted part of x.
  const Eigen::MatrixXd x_fitted = panel.x() - p.x_tilde;
  out.d_beta_delta = p.effects.mean_d_beta - p.effects.d_pi.transpose() * x_fitted / nd;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(components.W);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularW, "W is singular");
  // K x K: row k is D_beta_k' W^{-1}.
  const Eigen::MatrixXd a = lu.solve(out.d_beta_delta.transpose()).transpose();
  const Eigen::MatrixXd score_x = p.x_tilde.array().colwise() * p.h_resid.array();  // n x K
  out.gamma_it = (nd / nt) * score_x * a.transpose() - (p.psi.array().colwise() * p.h_resid.array()).matrix();

  const Eigen::MatrixXd centered = p.effects.delta_it.rowwise() - p.effects.delta.transpose();
  Eigen::MatrixXd sampling = Eigen::MatrixXd::Zero(k, k);
  for (const auto& rows : panel.rows_of_unit()) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(k);
    for (int r : rows) u += centered.row(r).transpose();
    sampling.noalias() += u * u.transpose();
  }
  for (const auto& rows : panel.rows_of_period()) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
    for (int r : rows) v += centered.row(r).transpose();
    sampling.noalias() += v * v.transpose();
  }
  sampling.noalias() -= centered.transpose() * centered;
  out.vcov_noise = out.gamma_it.transpose() * out.gamma_it / (nd * nd);
  sampling /= nd * nd;

  out.vcov = fpc * sampling + out.vcov_noise;
  out.vcov_infinite = sampling + out.vcov_noise;
  auto clamp = [&](Eigen::MatrixXd& v) {
    for (Eigen::Index c = 0; c < k; ++c) {
      if (v(c, c) < 0.0) {
        v(c, c) = 0.0;
        ++out.clamped;
      }
    }
  };
  clamp(out.vcov);
  clamp(out.vcov_infinite);
  out.se = out.vcov.diagonal().cwiseSqrt();
  out.se_infinite = out.vcov_infinite.diagonal().cwiseSqrt();
  return out;
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (top == 0.0) return 0;
  return static_cast<int>((ev.array() > rel_tol * top).count());
}

}  // namespace panelfe
