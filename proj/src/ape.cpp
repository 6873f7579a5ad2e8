#include "panelfe/ape.hpp"

#include <algorithm>

#include "panelfe/error.hpp"
#include "panelfe/links.hpp"

namespace panelfe {

std::vector<bool> resolve_binary(const PanelData& panel, const ModelSpec& spec) {
  std::vector<bool> binary = panel.binary_mask();
  const auto& names = panel.covariate_names();
  auto column = [&](const std::string& name) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorCode::InvalidOption, "unknown covariate '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  };
  for (const auto& name : spec.force_continuous) binary[column(name)] = false;
  for (const auto& name : spec.force_binary) {
    const auto c = column(name);
    const auto col = panel.x().col(static_cast<Eigen::Index>(c));
    if (!(col.array() == 0.0 || col.array() == 1.0).all()) {
      throw Error(ErrorCode::InvalidOption, "covariate '" + name + "' takes values other than 0 and 1");
    }
    binary[c] = true;
  }
  return binary;
}

PartialEffects partial_effects(const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                               const Eigen::VectorXd& gamma, const PanelData& panel, Family family,
                               const std::vector<bool>& binary) {
  const Eigen::Index n = static_cast<Eigen::Index>(panel.n_obs());
  const Eigen::Index k = panel.n_covariates();
  const Eigen::MatrixXd& x = panel.x();
  const Eigen::VectorXd z = linear_index(panel, beta, alpha, gamma);

  PartialEffects pe;
  pe.delta_it.resize(n, k);
  pe.d_pi.resize(n, k);
  pe.d2_pi.resize(n, k);
  pe.mean_d_beta = Eigen::MatrixXd::Zero(k, k);

  for (Eigen::Index r = 0; r < n; ++r) {
    const LinkBundle at = link_eval(z(r), family);
    for (Eigen::Index c = 0; c < k; ++c) {
      double direct = 0.0;  // d Delta / d beta_c
      if (binary[static_cast<std::size_t>(c)]) {
        const double z0 = z(r) - x(r, c) * beta(c);
        const LinkBundle lo = link_eval(z0, family);
        const LinkBundle hi = link_eval(z0 + beta(c), family);
        pe.delta_it(r, c) = hi.F - lo.F;
        pe.d_pi(r, c) = hi.dF - lo.dF;
        pe.d2_pi(r, c) = hi.d2F - lo.d2F;
        direct = hi.dF;
        for (Eigen::Index j = 0; j < k; ++j) {
          if (j != c) pe.mean_d_beta(c, j) += pe.d_pi(r, c) * x(r, j);
        }
      } else {
        pe.delta_it(r, c) = beta(c) * at.dF;
        pe.d_pi(r, c) = beta(c) * at.d2F;
        pe.d2_pi(r, c) = beta(c) * at.d3F;
        direct = at.dF;
        for (Eigen::Index j = 0; j < k; ++j) pe.mean_d_beta(c, j) += pe.d_pi(r, c) * x(r, j);
      }
      pe.mean_d_beta(c, c) += direct;
    }
  }
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  pe.delta = pe.delta_it.colwise().sum().transpose() * inv_n;
  pe.mean_d_beta *= inv_n;
  return pe;
}

PartialEffects ape_at(const Eigen::VectorXd& beta_tilde, const PanelData& panel, const ModelSpec& spec,
                      const std::vector<bool>& binary, const FitOptions& options) {
  const ProfiledEffects eff = profile_effects(beta_tilde, panel, spec, options);
  return partial_effects(beta_tilde, eff.alpha, eff.gamma, panel, spec.family, binary);
}

}  // namespace panelfe
