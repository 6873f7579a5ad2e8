#include "dense_bias.hpp"

#include <stdexcept>

#include "dense_links.hpp"

namespace oracle {

DenseBias dense_bias(const panelfe::PanelData& panel, const BiasSetup& s, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& alpha, const Eigen::VectorXd& gamma, const std::vector<bool>& binary) {
  const Link link{s.probit};
  const int n = static_cast<int>(panel.n_obs());
  const int k = panel.n_covariates();
  const int N = panel.n_units();
  const int T = panel.n_periods();
  const auto& unit = panel.unit();
  const auto& period = panel.period();
  const auto& y = panel.y();
  const Eigen::MatrixXd& X = panel.x();

  // Cell grid (-1 when unobserved).
  Eigen::MatrixXi cell = Eigen::MatrixXi::Constant(N, T, -1);
  for (int r = 0; r < n; ++r) cell(unit[static_cast<std::size_t>(r)], period[static_cast<std::size_t>(r)]) = r;
  if (s.lags > 0 && ((cell.array() < 0).any() || panel.t_span() != T)) {
    throw std::invalid_argument("lags > 0 needs a balanced panel with consecutive period labels");
  }

  Eigen::VectorXd z(n), F(n), dF(n), d2F(n), H(n), omega(n);
  for (int r = 0; r < n; ++r) {
    z(r) = X.row(r).dot(beta) + alpha(unit[static_cast<std::size_t>(r)]) + gamma(period[static_cast<std::size_t>(r)]);
    F(r) = link.cdf(z(r));
    dF(r) = link.pdf(z(r));
    d2F(r) = link.d2(z(r));
    H(r) = dF(r) / (F(r) * link.cdf(-z(r)));
    omega(r) = H(r) * dF(r);
  }

  // Dummy design, first period dropped when both blocks enter.
  const int skip = (s.ieffects && s.teffects) ? 1 : 0;
  const int na = s.ieffects ? N : 0;
  const int ng = s.teffects ? T - skip : 0;
  Eigen::MatrixXd Dm = Eigen::MatrixXd::Zero(n, na + ng);
  for (int r = 0; r < n; ++r) {
    if (s.ieffects) Dm(r, unit[static_cast<std::size_t>(r)]) = 1.0;
    const int t = period[static_cast<std::size_t>(r)];
    if (s.teffects && t >= skip) Dm(r, na + t - skip) = 1.0;
  }
  const Eigen::VectorXd sw = omega.cwiseSqrt();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sw.asDiagonal() * Dm);
  auto fitted = [&](const Eigen::MatrixXd& V) -> Eigen::MatrixXd {
    const Eigen::MatrixXd coef = qr.solve(sw.asDiagonal() * V);
    return Dm * coef;
  };

  DenseBias out;
  out.x_tilde = X - fitted(X);
  const Eigen::MatrixXd& Xt = out.x_tilde;

  // Partial effects and their first two derivatives in the index.
  Eigen::MatrixXd dpi(n, k), d2pi(n, k);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < k; ++c) {
      if (binary[static_cast<std::size_t>(c)]) {
        const double z1 = z(r) + (1.0 - X(r, c)) * beta(c);
        const double z0 = z(r) - X(r, c) * beta(c);
        dpi(r, c) = link.pdf(z1) - link.pdf(z0);
        d2pi(r, c) = link.d2(z1) - link.d2(z0);
      } else {
        dpi(r, c) = beta(c) * link.d2(z(r));
        d2pi(r, c) = beta(c) * link.d3(z(r));
      }
    }
  }
  Eigen::MatrixXd target(n, k);
  for (int r = 0; r < n; ++r) target.row(r) = -dpi.row(r) / omega(r);
  const Eigen::MatrixXd Psi = fitted(target);
  const Eigen::MatrixXd Psit = target - Psi;

  out.W = Eigen::MatrixXd::Zero(k, k);
  for (int r = 0; r < n; ++r) out.W += omega(r) * Xt.row(r).transpose() * Xt.row(r);
  out.W /= static_cast<double>(N) * T;

  out.B = Eigen::VectorXd::Zero(k);
  out.B_delta = Eigen::VectorXd::Zero(k);
  if (s.ieffects && s.ibias) {
    for (int i = 0; i < N; ++i) {
      Eigen::VectorXd nb = Eigen::VectorXd::Zero(k), nd = Eigen::VectorXd::Zero(k);
      double den = 0.0;
      for (int t = 0; t < T; ++t) {
        const int r = cell(i, t);
        if (r < 0) continue;
        nb += H(r) * d2F(r) * Xt.row(r).transpose();
        nd += (d2pi.row(r) - Psi.row(r) * H(r) * d2F(r)).transpose();
        den += omega(r);
      }
      for (int j = 1; j <= s.lags; ++j) {
        const double dof = static_cast<double>(T) / (T - j);
        for (int t = j; t < T; ++t) {
          const int a = cell(i, t - j), b = cell(i, t);
          const double lead = H(a) * (y[static_cast<std::size_t>(a)] - F(a)) * omega(b);
          nb += 2.0 * dof * lead * Xt.row(b).transpose();
          nd += 2.0 * dof * lead * Psit.row(b).transpose();
        }
      }
      out.B += nb / den;
      out.B_delta += nd / den;
    }
    out.B *= -1.0 / (2.0 * N);
    out.B_delta *= 1.0 / (2.0 * N);
  }

  out.D = Eigen::VectorXd::Zero(k);
  out.D_delta = Eigen::VectorXd::Zero(k);
  if (s.teffects && s.tbias) {
    for (int t = 0; t < T; ++t) {
      Eigen::VectorXd nb = Eigen::VectorXd::Zero(k), nd = Eigen::VectorXd::Zero(k);
      double den = 0.0;
      for (int i = 0; i < N; ++i) {
        const int r = cell(i, t);
        if (r < 0) continue;
        nb += H(r) * d2F(r) * Xt.row(r).transpose();
        nd += (d2pi.row(r) - Psi.row(r) * H(r) * d2F(r)).transpose();
        den += omega(r);
      }
      out.D += nb / den;
      out.D_delta += nd / den;
    }
    out.D *= -1.0 / (2.0 * T);
    out.D_delta *= 1.0 / (2.0 * T);
  }
  return out;
}

}  // namespace oracle
