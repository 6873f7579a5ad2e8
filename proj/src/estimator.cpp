#include "panelfe/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "panelfe/error.hpp"
#include "panelfe/links.hpp"
#include "panelfe/projection.hpp"

namespace panelfe {

namespace {

constexpr int kMaxHalvings = 30;
// Scalar Newton steps longer than this are checked against the objective.
constexpr double kCheckedStep = 0.5;

struct GroupSums {
  double loglik = 0.0;
  double score = 0.0;
  double curvature = 0.0;
};

GroupSums group_sums(const PanelData& panel, Family family, const std::vector<int>& rows,
                     const Eigen::VectorXd& index, double shift) {
  GroupSums s;
  const auto& y = panel.y();
  for (int r : rows) {
    const auto d = index_derivatives(y[static_cast<std::size_t>(r)], index(r) + shift, family);
    s.loglik += d.loglik;
    s.score += d.score;
    s.curvature += d.curvature;
  }
  return s;
}

double group_loglik(const PanelData& panel, Family family, const std::vector<int>& rows,
                    const Eigen::VectorXd& index, double shift) {
  double ll = 0.0;
  const auto& y = panel.y();
  for (int r : rows) ll += loglik_obs(y[static_cast<std::size_t>(r)], index(r) + shift, family);
  return ll;
}

// One safeguarded Newton update of a single effect; returns |score| before the update.
double update_effect(const PanelData& panel, Family family, const std::vector<int>& rows,
                     Eigen::VectorXd& index, double& effect) {
  if (rows.empty()) return 0.0;
  const GroupSums s = group_sums(panel, family, rows, index, 0.0);
  double step = s.score / s.curvature;
  if (!std::isfinite(step)) step = 0.0;
  if (std::abs(step) > kCheckedStep) {
    for (int h = 0; h < kMaxHalvings; ++h) {
      if (group_loglik(panel, family, rows, index, step) >= s.loglik) break;
      step *= 0.5;
    }
  }
  effect += step;
  for (int r : rows) index(r) += step;
  return std::abs(s.score);
}

// Gauss-Seidel sweeps over alpha then gamma until every effect score is below tol.
int profile_inplace(const PanelData& panel, Family family, EffectMode mode, Eigen::VectorXd& index,
                    Eigen::VectorXd& alpha, Eigen::VectorXd& gamma, double tol, int max_sweeps) {
  const bool use_i = mode != EffectMode::Time;
  const bool use_t = mode != EffectMode::Individual;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double worst = 0.0;
    if (use_i) {
      for (int i = 0; i < panel.n_units(); ++i) {
        worst = std::max(worst, update_effect(panel, family, panel.rows_of_unit()[static_cast<std::size_t>(i)],
                                              index, alpha(i)));
      }
    }
    if (use_t) {
      for (int t = 0; t < panel.n_periods(); ++t) {
        worst = std::max(worst, update_effect(panel, family, panel.rows_of_period()[static_cast<std::size_t>(t)],
                                              index, gamma(t)));
      }
    }
    if (worst < tol) return sweep;
  }
  throw Error(ErrorCode::NotConverged,
              "fixed-effect sweeps did not converge in " + std::to_string(max_sweeps) + " sweeps");
}

void normalize(EffectMode mode, Eigen::VectorXd& alpha, Eigen::VectorXd& gamma) {
  if (mode != EffectMode::Both || gamma.size() == 0) return;
  const double c = gamma(0);
  gamma.array() -= c;
  alpha.array() += c;
}

void starting_effects(const PanelData& panel, const ModelSpec& spec, Eigen::VectorXd& alpha,
                      Eigen::VectorXd& gamma) {
  alpha = Eigen::VectorXd::Zero(panel.n_units());
  gamma = Eigen::VectorXd::Zero(panel.n_periods());
  const auto& y = panel.y();
  auto start_value = [&](const std::vector<int>& rows) {
    double m = 0.0;
    for (int r : rows) m += y[static_cast<std::size_t>(r)];
    m /= static_cast<double>(std::max<std::size_t>(rows.size(), 1));
    return link_quantile(std::clamp(m, 0.01, 0.99), spec.family);
  };
  if (spec.include_ieffects) {
    for (int i = 0; i < panel.n_units(); ++i) alpha(i) = start_value(panel.rows_of_unit()[static_cast<std::size_t>(i)]);
  } else {
    for (int t = 0; t < panel.n_periods(); ++t) {
      gamma(t) = start_value(panel.rows_of_period()[static_cast<std::size_t>(t)]);
    }
  }
}

Eigen::VectorXd fisher_weights(const PanelData& panel, Family family, const Eigen::VectorXd& index) {
  Eigen::VectorXd w(index.size());
  for (Eigen::Index n = 0; n < index.size(); ++n) w(n) = link_eval(index(n), family).omega;
  (void)panel;
  return w;
}

Eigen::VectorXd scores(const PanelData& panel, Family family, const Eigen::VectorXd& index) {
  Eigen::VectorXd s(index.size());
  const auto& y = panel.y();
  for (Eigen::Index n = 0; n < index.size(); ++n) {
    s(n) = index_derivatives(y[static_cast<std::size_t>(n)], index(n), family).score;
  }
  return s;
}

void check_start_sizes(const PanelData& panel, const FitStart& start) {
  if (start.beta.size() != panel.n_covariates() || start.alpha.size() != panel.n_units() ||
      start.gamma.size() != panel.n_periods()) {
    throw Error(ErrorCode::InvalidOption, "starting values do not match the panel dimensions");
  }
}

}  // namespace

Eigen::VectorXd linear_index(const PanelData& panel, const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                             const Eigen::VectorXd& gamma) {
  Eigen::VectorXd z = panel.x() * beta;
  const auto& u = panel.unit();
  const auto& p = panel.period();
  for (Eigen::Index n = 0; n < z.size(); ++n) {
    z(n) += alpha(u[static_cast<std::size_t>(n)]) + gamma(p[static_cast<std::size_t>(n)]);
  }
  return z;
}

double sample_loglik(const PanelData& panel, Family family, const Eigen::VectorXd& index) {
  double ll = 0.0;
  const auto& y = panel.y();
  for (Eigen::Index n = 0; n < index.size(); ++n) ll += loglik_obs(y[static_cast<std::size_t>(n)], index(n), family);
  return ll;
}

double loglik_null(const PanelData& panel, Family /*family*/) {
  const double n = static_cast<double>(panel.n_obs());
  double ones = 0.0;
  for (double v : panel.y()) ones += v;
  const double ybar = ones / n;
  double ll = 0.0;
  if (ybar > 0.0) ll += ybar * std::log(ybar);
  if (ybar < 1.0) ll += (1.0 - ybar) * std::log1p(-ybar);
  return n * ll;
}

ProfiledEffects profile_effects(const Eigen::VectorXd& beta, const PanelData& panel, const ModelSpec& spec,
                                const FitOptions& options) {
  ProfiledEffects out;
  if (options.start) {
    check_start_sizes(panel, *options.start);
    out.alpha = options.start->alpha;
    out.gamma = options.start->gamma;
  } else {
    starting_effects(panel, spec, out.alpha, out.gamma);
  }
  Eigen::VectorXd index = linear_index(panel, beta, out.alpha, out.gamma);
  out.sweeps = profile_inplace(panel, spec.family, spec.effect_mode(), index, out.alpha, out.gamma, options.tol,
                               options.max_sweeps);
  normalize(spec.effect_mode(), out.alpha, out.gamma);
  out.loglik = sample_loglik(panel, spec.family, index);
  return out;
}

FitResult fit_mle(const PanelData& panel, const ModelSpec& spec, const FitOptions& options) {
  const EffectMode mode = spec.effect_mode();
  const Eigen::Index k = panel.n_covariates();
  FitResult fit;
  if (options.start) {
    check_start_sizes(panel, *options.start);
    fit.beta = options.start->beta;
    fit.alpha = options.start->alpha;
    fit.gamma = options.start->gamma;
  } else {
    fit.beta = Eigen::VectorXd::Zero(k);
    starting_effects(panel, spec, fit.alpha, fit.gamma);
  }
  if (!spec.include_ieffects) fit.alpha.setZero();
  if (!spec.include_teffects) fit.gamma.setZero();

  Eigen::VectorXd index = linear_index(panel, fit.beta, fit.alpha, fit.gamma);
  fit.sweeps += profile_inplace(panel, spec.family, mode, index, fit.alpha, fit.gamma, options.tol,
                                options.max_sweeps);
  fit.loglik = sample_loglik(panel, spec.family, index);
  fit.loglik_trace.push_back(fit.loglik);

  for (int iter = 0; iter <= options.max_iter; ++iter) {
    const Eigen::VectorXd s = scores(panel, spec.family, index);
    const Eigen::VectorXd grad = panel.x().transpose() * s;
    if (grad.cwiseAbs().maxCoeff() < options.tol) {
      fit.converged = true;
      fit.iterations = iter;
      break;
    }
    if (iter == options.max_iter) break;

    const Eigen::VectorXd w = fisher_weights(panel, spec.family, index);
    const ProjectionResult proj = weighted_residualize(panel, panel.x(), w, mode);
    const Eigen::MatrixXd curvature = proj.residual.transpose() * w.asDiagonal() * proj.residual;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(curvature);
    const double scale = std::max(curvature.diagonal().maxCoeff(), 1e-300);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * scale) {
      throw Error(ErrorCode::CollinearCovariates,
                  "covariates are collinear with the fixed effects (singular profile Hessian)");
    }
    const Eigen::VectorXd step = ldlt.solve(grad);

    bool accepted = false;
    double lambda = 1.0;
    for (int h = 0; h <= kMaxHalvings; ++h, lambda *= 0.5) {
      Eigen::VectorXd beta = fit.beta + lambda * step;
      // Joint Newton prediction for the effects as the warm start.
      Eigen::VectorXd alpha = fit.alpha - lambda * proj.unit_coef * step;
      Eigen::VectorXd gamma = fit.gamma - lambda * proj.period_coef * step;
      Eigen::VectorXd trial = linear_index(panel, beta, alpha, gamma);
      const int sweeps = profile_inplace(panel, spec.family, mode, trial, alpha, gamma, options.tol,
                                         options.max_sweeps);
      const double ll = sample_loglik(panel, spec.family, trial);
      fit.sweeps += sweeps;
      if (ll >= fit.loglik - 1e-12 * std::abs(fit.loglik)) {
        fit.beta = std::move(beta);
        fit.alpha = std::move(alpha);
        fit.gamma = std::move(gamma);
        index = std::move(trial);
        fit.loglik = ll;
        fit.loglik_trace.push_back(ll);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(ErrorCode::NotConverged, "step halving failed to increase the log-likelihood");
    }
  }
  if (!fit.converged) {
    throw Error(ErrorCode::NotConverged,
                "maximum likelihood did not converge in " + std::to_string(options.max_iter) + " iterations");
  }
  normalize(mode, fit.alpha, fit.gamma);
  fit.loglik_null = loglik_null(panel, spec.family);
  return fit;
}

Eigen::MatrixXd beta_step_curvature(const PanelData& panel, const ModelSpec& spec, const FitResult& fit) {
  const Eigen::VectorXd index = linear_index(panel, fit.beta, fit.alpha, fit.gamma);
  const Eigen::VectorXd w = fisher_weights(panel, spec.family, index);
  const ProjectionResult proj = weighted_residualize(panel, panel.x(), w, spec.effect_mode());
  const double nt = static_cast<double>(panel.n_units()) * static_cast<double>(panel.n_periods());
  return proj.residual.transpose() * w.asDiagonal() * proj.residual / nt;
}

}  // namespace panelfe
