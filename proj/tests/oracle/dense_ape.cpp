#include "dense_ape.hpp"

#include "dense_links.hpp"

namespace oracle {

DenseApeVariance dense_ape_variance(const panelfe::PanelData& panel, bool probit, bool ieffects, bool teffects,
                                    const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                                    const Eigen::VectorXd& gamma, const std::vector<bool>& binary) {
  const Link link{probit};
  const int n = static_cast<int>(panel.n_obs());
  const int k = panel.n_covariates();
  const int N = panel.n_units();
  const int T = panel.n_periods();
  const auto& unit = panel.unit();
  const auto& period = panel.period();
  const auto& y = panel.y();
  const Eigen::MatrixXd& X = panel.x();

  Eigen::VectorXd z(n), F(n), H(n), omega(n);
  for (int r = 0; r < n; ++r) {
    const auto s = static_cast<std::size_t>(r);
    z(r) = X.row(r).dot(beta) + alpha(unit[s]) + gamma(period[s]);
    F(r) = link.cdf(z(r));
    H(r) = link.pdf(z(r)) / (F(r) * link.cdf(-z(r)));
    omega(r) = H(r) * link.pdf(z(r));
  }

  const int skip = (ieffects && teffects) ? 1 : 0;
  const int na = ieffects ? N : 0;
  const int ng = teffects ? T - skip : 0;
  Eigen::MatrixXd Dm = Eigen::MatrixXd::Zero(n, na + ng);
  for (int r = 0; r < n; ++r) {
    const auto s = static_cast<std::size_t>(r);
    if (ieffects) Dm(r, unit[s]) = 1.0;
    if (teffects && period[s] >= skip) Dm(r, na + period[s] - skip) = 1.0;
  }
  const Eigen::VectorXd sw = omega.cwiseSqrt();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sw.asDiagonal() * Dm);
  auto fitted = [&](const Eigen::MatrixXd& V) -> Eigen::MatrixXd { return Dm * qr.solve(sw.asDiagonal() * V); };

  // Per-cell effects, their index derivative and their direct beta derivative.
  Eigen::MatrixXd delta_it(n, k), dpi(n, k);
  Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(k, k);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < k; ++c) {
      if (binary[static_cast<std::size_t>(c)]) {
        const double z1 = z(r) + (1.0 - X(r, c)) * beta(c);
        const double z0 = z(r) - X(r, c) * beta(c);
        delta_it(r, c) = link.cdf(z1) - link.cdf(z0);
        dpi(r, c) = link.pdf(z1) - link.pdf(z0);
        for (int j = 0; j < k; ++j) direct(c, j) += j == c ? link.pdf(z1) : dpi(r, c) * X(r, j);
      } else {
        delta_it(r, c) = beta(c) * link.pdf(z(r));
        dpi(r, c) = beta(c) * link.d2(z(r));
        for (int j = 0; j < k; ++j) direct(c, j) += (j == c ? link.pdf(z(r)) : 0.0) + dpi(r, c) * X(r, j);
      }
    }
  }

  DenseApeVariance out;
  out.delta = delta_it.colwise().mean().transpose();
  // The effects respond to beta by minus the weighted projection of X.
  const Eigen::MatrixXd dpi_dbeta = -fitted(X);
  out.d_beta_delta = (direct + dpi.transpose() * dpi_dbeta) / n;

  const Eigen::MatrixXd Xt = X + dpi_dbeta;
  Eigen::MatrixXd Wn = Eigen::MatrixXd::Zero(k, k);
  for (int r = 0; r < n; ++r) Wn += omega(r) * Xt.row(r).transpose() * Xt.row(r);
  Wn /= n;
  Eigen::MatrixXd target(n, k);
  for (int r = 0; r < n; ++r) target.row(r) = -dpi.row(r) / omega(r);
  const Eigen::MatrixXd Psi = fitted(target);
  const Eigen::MatrixXd lead = Wn.inverse() * out.d_beta_delta.transpose();  // K x K

  out.gamma_it.resize(n, k);
  for (int r = 0; r < n; ++r) {
    const double hr = H(r) * (y[static_cast<std::size_t>(r)] - F(r));
    out.gamma_it.row(r) = hr * Xt.row(r) * lead - hr * Psi.row(r);
  }

  Eigen::MatrixXd dt(n, k);
  for (int r = 0; r < n; ++r) dt.row(r) = delta_it.row(r) - out.delta.transpose();
  out.sampling = Eigen::MatrixXd::Zero(k, k);
  out.noise = Eigen::MatrixXd::Zero(k, k);
  for (int a = 0; a < n; ++a) {
    out.noise += out.gamma_it.row(a).transpose() * out.gamma_it.row(a);
    for (int b = 0; b < n; ++b) {
      const bool same_unit = unit[static_cast<std::size_t>(a)] == unit[static_cast<std::size_t>(b)];
      const bool same_period = period[static_cast<std::size_t>(a)] == period[static_cast<std::size_t>(b)];
      // Pairs within a unit, and pairs of distinct units within a period.
      if (same_unit || same_period) out.sampling += dt.row(a).transpose() * dt.row(b);
    }
  }
  const double n2 = static_cast<double>(n) * n;
  out.sampling /= n2;
  out.noise /= n2;
  return out;
}

}  // namespace oracle
