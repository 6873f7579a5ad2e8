#include "panelfe/analytical.hpp"

#include <algorithm>
#include <string>

#include "panelfe/error.hpp"
#include "panelfe/links.hpp"
#include "panelfe/projection.hpp"

namespace panelfe {

PlugIn compute_plugin(const PanelData& panel, const ModelSpec& spec, const FitResult& fit,
                      const std::vector<bool>& binary) {
  const Eigen::Index n = static_cast<Eigen::Index>(panel.n_obs());
  PlugIn p;
  p.index = linear_index(panel, fit.beta, fit.alpha, fit.gamma);
  p.F.resize(n);
  p.dF.resize(n);
  p.d2F.resize(n);
  p.H.resize(n);
  p.omega.resize(n);
  p.h_resid.resize(n);
  const auto& y = panel.y();
  for (Eigen::Index r = 0; r < n; ++r) {
    const LinkBundle b = link_eval(p.index(r), spec.family);
    p.F(r) = b.F;
    p.dF(r) = b.dF;
    p.d2F(r) = b.d2F;
    p.H(r) = b.H;
    p.omega(r) = b.omega;
    p.h_resid(r) = b.H * (y[static_cast<std::size_t>(r)] - b.F);
  }
  const EffectMode mode = spec.effect_mode();
  p.x_tilde = weighted_residualize(panel, panel.x(), p.omega, mode).residual;

  p.effects = partial_effects(fit.beta, fit.alpha, fit.gamma, panel, spec.family, binary);
  const Eigen::VectorXd safe_omega = p.omega.cwiseMax(kWeightFloor);
  const Eigen::MatrixXd target = -(p.effects.d_pi.array().colwise() / safe_omega.array()).matrix();
  const ProjectionResult proj = weighted_residualize(panel, target, p.omega, mode);
  p.psi = proj.fitted;
  p.psi_tilde = proj.residual;
  return p;
}

namespace {

// sum_{j=1..L} (T_i / count_i(j)) sum over gap-free pairs (a = t - j, b = t)
// of H_a (y_a - F_a) omega_b V_b, for one unit.
Eigen::RowVectorXd spectral_sum(const PanelData& panel, int unit, int lags, const PlugIn& p,
                                const Eigen::MatrixXd& values) {
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(values.cols());
  const double t_i = static_cast<double>(panel.rows_of_unit()[static_cast<std::size_t>(unit)].size());
  for (int j = 1; j <= lags; ++j) {
    const auto pairs = lag_row_pairs(panel, unit, j);
    if (pairs.empty()) continue;
    Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(values.cols());
    for (auto [a, b] : pairs) s.noalias() += p.h_resid(a) * p.omega(b) * values.row(b);
    acc += (t_i / static_cast<double>(pairs.size())) * s;
  }
  return acc;
}

}  // namespace

BiasComponents bias_components(const PanelData& panel, const ModelSpec& spec, const PlugIn& p) {
  const Eigen::Index k = panel.n_covariates();
  const int n_units = panel.n_units();
  const int n_periods = panel.n_periods();
  if (spec.lags < 0) throw Error(ErrorCode::InvalidOption, "lags must be nonnegative");
  if (spec.lags > n_periods - 1) {
    throw Error(ErrorCode::LTooLarge, "lags = " + std::to_string(spec.lags) + " exceeds T - 1 = " +
                                          std::to_string(n_periods - 1));
  }

  BiasComponents c;
  c.lags_used = spec.lags;
  const double nt = static_cast<double>(n_units) * static_cast<double>(n_periods);
  c.W = p.x_tilde.transpose() * p.omega.asDiagonal() * p.x_tilde / nt;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(c.W);
  const double scale = std::max(c.W.diagonal().maxCoeff(), 1e-300);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-12 * scale) {
    // Name the covariate with the smallest residual variation.
    Eigen::Index worst = 0;
    c.W.diagonal().minCoeff(&worst);
    throw Error(ErrorCode::CollinearCovariates,
                "weighted residual covariance is singular; check covariate '" +
                    panel.covariate_names()[static_cast<std::size_t>(worst)] + "'");
  }

  c.B = Eigen::VectorXd::Zero(k);
  c.D = Eigen::VectorXd::Zero(k);
  c.B_delta = Eigen::VectorXd::Zero(k);
  c.D_delta = Eigen::VectorXd::Zero(k);

  // Per-row APE bias kernel: d2_pi - Psi H d2F.
  const Eigen::MatrixXd ape_kernel =
      p.effects.d2_pi - (p.psi.array().colwise() * (p.H.array() * p.d2F.array())).matrix();
  const Eigen::VectorXd hd2f = p.H.cwiseProduct(p.d2F);

  if (spec.include_ieffects && spec.ibias) {
    for (int i = 0; i < n_units; ++i) {
      const auto& rows = panel.rows_of_unit()[static_cast<std::size_t>(i)];
      Eigen::VectorXd num_b = Eigen::VectorXd::Zero(k);
      Eigen::VectorXd num_d = Eigen::VectorXd::Zero(k);
      double denom = 0.0;
      for (int r : rows) {
        num_b += hd2f(r) * p.x_tilde.row(r).transpose();
        num_d += ape_kernel.row(r).transpose();
        denom += p.omega(r);
      }
      if (spec.lags > 0) {
        num_b += 2.0 * spectral_sum(panel, i, spec.lags, p, p.x_tilde).transpose();
        num_d += 2.0 * spectral_sum(panel, i, spec.lags, p, p.psi_tilde).transpose();
      }
      c.B += num_b / denom;
      c.B_delta += num_d / denom;
    }
    c.B *= -1.0 / (2.0 * n_units);
    c.B_delta *= 1.0 / (2.0 * n_units);
  }

  if (spec.include_teffects && spec.tbias) {
    for (int t = 0; t < n_periods; ++t) {
      const auto& rows = panel.rows_of_period()[static_cast<std::size_t>(t)];
      Eigen::VectorXd num_b = Eigen::VectorXd::Zero(k);
      Eigen::VectorXd num_d = Eigen::VectorXd::Zero(k);
      double denom = 0.0;
      for (int r : rows) {
        num_b += hd2f(r) * p.x_tilde.row(r).transpose();
        num_d += ape_kernel.row(r).transpose();
        denom += p.omega(r);
      }
      c.D += num_b / denom;
      c.D_delta += num_d / denom;
    }
    c.D *= -1.0 / (2.0 * n_periods);
    c.D_delta *= 1.0 / (2.0 * n_periods);
  }
  return c;
}

Eigen::VectorXd correct_beta(const Eigen::VectorXd& beta_hat, const BiasComponents& components, int n_units,
                             int n_periods) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(components.W);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularW, "W is singular");
  return beta_hat - lu.solve(components.B) / static_cast<double>(n_periods) -
         lu.solve(components.D) / static_cast<double>(n_units);
}

CorrectedApe correct_ape(const Eigen::VectorXd& beta_corrected, const PanelData& panel, const ModelSpec& spec,
                         const BiasComponents& components, const std::vector<bool>& binary,
                         const FitOptions& options) {
  CorrectedApe out;
  out.effects = ape_at(beta_corrected, panel, spec, binary, options);
  out.delta_reprofiled = out.effects.delta;
  out.delta = out.delta_reprofiled - components.B_delta / static_cast<double>(panel.n_periods()) -
              components.D_delta / static_cast<double>(panel.n_units());
  return out;
}

AnalyticalResult analytical_correct(const PanelData& panel, const ModelSpec& spec, const FitResult& fit,
                                    const PlugIn& plugin, const std::vector<bool>& binary) {
  AnalyticalResult res;
  res.components = bias_components(panel, spec, plugin);
  res.beta = correct_beta(fit.beta, res.components, panel.n_units(), panel.n_periods());
  FitOptions warm;
  warm.start = FitStart{res.beta, fit.alpha, fit.gamma};
  res.delta = correct_ape(res.beta, panel, spec, res.components, binary, warm).delta;
  return res;
}

}  // namespace panelfe
