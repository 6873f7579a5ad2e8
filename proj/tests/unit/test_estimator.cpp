#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dense_mle.hpp"
#include "panelfe/error.hpp"
#include "panelfe/estimator.hpp"
#include "panelfe/links.hpp"
#include "random_panel.hpp"

using namespace panelfe;

namespace {

ModelSpec spec_for(Family fam, bool ieff, bool teff) {
  ModelSpec s;
  s.family = fam;
  s.include_ieffects = ieff;
  s.include_teffects = teff;
  return s;
}

}  // namespace

TEST_CASE("two by two logit with individual effects matches the dense oracle") {
  // x = ((0,1),(1,0)), y = ((0,1),(1,0)).
  const auto p = testing_support::make_panel(
      {{"1", 1, 0, {0.0}}, {"1", 2, 1, {1.0}}, {"2", 1, 1, {1.0}}, {"2", 2, 0, {0.0}}}, {"x"});
  // y equals x within each unit, so the likelihood keeps rising in beta and
  // no finite maximizer exists. Both solvers must run off together toward the
  // supremum 0 of the log likelihood.
  const auto o = oracle::dense_newton(p, false, true, false);
  CHECK(!o.interior());
  CHECK(o.beta(0) > 10.0);
  try {
    const auto f = fit_mle(p, spec_for(Family::Logit, true, false));
    CHECK(f.beta(0) > 10.0);
    CHECK(std::abs(f.loglik - o.loglik) < 1e-6);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotConverged);
  }
}

TEST_CASE("matches the dense Newton oracle on random panels") {
  std::mt19937_64 rng(2024);
  int compared = 0;
  for (int rep = 0; compared < 12 && rep < 200; ++rep) {
    testing_support::PanelDraw d;
    d.n_units = 4 + rep % 4;
    d.n_periods = 4 + (rep / 2) % 4;
    d.k = 1 + rep % 2;
    d.probit = rep % 3 == 0;
    d.miss_prob = rep % 5 == 0 ? 0.1 : 0.0;
    const bool teff = rep % 4 != 1;
    const bool ieff = rep % 4 != 2;
    PanelData p;
    try {
      p = drop_perfect_classification(testing_support::random_panel(rng, d), ieff, teff);
    } catch (const Error&) {
      continue;
    }
    const auto o = oracle::dense_newton(p, d.probit, ieff, teff);
    if (!o.interior()) continue;
    const auto f = fit_mle(p, spec_for(d.probit ? Family::Probit : Family::Logit, ieff, teff));
    CHECK(f.converged);
    CHECK((f.beta - o.beta).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(f.loglik - o.loglik) < 1e-8);
    CHECK((f.alpha - o.alpha).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((f.gamma - o.gamma).cwiseAbs().maxCoeff() < 1e-5);
    ++compared;
  }
  CHECK(compared == 12);
}

TEST_CASE("log likelihood never decreases across outer steps") {
  std::mt19937_64 rng(9);
  testing_support::PanelDraw d;
  d.n_units = 30;
  d.n_periods = 12;
  d.k = 2;
  d.beta_scale = 2.0;
  const auto p = drop_perfect_classification(testing_support::random_panel(rng, d), true, true);
  const auto f = fit_mle(p, ModelSpec{});
  REQUIRE(f.loglik_trace.size() >= 2);
  for (std::size_t i = 1; i < f.loglik_trace.size(); ++i) CHECK(f.loglik_trace[i] >= f.loglik_trace[i - 1] - 1e-12);
  CHECK(f.gamma(0) == 0.0);
}

TEST_CASE("score matches finite differences") {
  std::mt19937_64 rng(10);
  testing_support::PanelDraw d;
  d.n_units = 5;
  d.n_periods = 5;
  d.k = 2;
  for (Family fam : {Family::Logit, Family::Probit}) {
    const auto p = testing_support::random_panel(rng, d);
    Eigen::VectorXd beta = Eigen::VectorXd::Random(2), alpha = Eigen::VectorXd::Random(5), gamma = Eigen::VectorXd::Random(5);
    const Eigen::VectorXd z = linear_index(p, beta, alpha, gamma);
    Eigen::VectorXd s_beta = Eigen::VectorXd::Zero(2), s_alpha = Eigen::VectorXd::Zero(5);
    for (Eigen::Index r = 0; r < z.size(); ++r) {
      const double s = index_derivatives(p.y()[static_cast<std::size_t>(r)], z(r), fam).score;
      s_beta += s * p.x().row(r).transpose();
      s_alpha(p.unit()[static_cast<std::size_t>(r)]) += s;
    }
    const double h = 1e-6;
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXd bp = beta, bm = beta;
      bp(c) += h;
      bm(c) -= h;
      const double fd = (sample_loglik(p, fam, linear_index(p, bp, alpha, gamma)) -
                         sample_loglik(p, fam, linear_index(p, bm, alpha, gamma))) / (2 * h);
      CHECK(fd == doctest::Approx(s_beta(c)).epsilon(1e-6));
    }
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd ap = alpha, am = alpha;
      ap(i) += h;
      am(i) -= h;
      const double fd = (sample_loglik(p, fam, linear_index(p, beta, ap, gamma)) -
                         sample_loglik(p, fam, linear_index(p, beta, am, gamma))) / (2 * h);
      CHECK(fd == doctest::Approx(s_alpha(i)).epsilon(1e-6));
    }
  }
}

TEST_CASE("normalization shift leaves the fit unchanged") {
  std::mt19937_64 rng(12);
  testing_support::PanelDraw d;
  d.n_units = 10;
  d.n_periods = 8;
  const auto p = drop_perfect_classification(testing_support::random_panel(rng, d), true, true);
  const auto f = fit_mle(p, ModelSpec{});
  const Eigen::VectorXd a = f.alpha.array() + 0.7;
  const Eigen::VectorXd g = f.gamma.array() - 0.7;
  const Eigen::VectorXd z0 = linear_index(p, f.beta, f.alpha, f.gamma);
  const Eigen::VectorXd z1 = linear_index(p, f.beta, a, g);
  CHECK((z0 - z1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sample_loglik(p, Family::Logit, z1) == doctest::Approx(f.loglik).epsilon(1e-12));

  // Starting from the shifted point converges to the same normalized representative.
  FitOptions opt;
  opt.start = FitStart{f.beta, a, g};
  const auto f2 = fit_mle(p, ModelSpec{}, opt);
  CHECK(f2.gamma(0) == 0.0);
  CHECK((f2.alpha - f.alpha).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((f2.beta - f.beta).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("profile_effects") {
  std::mt19937_64 rng(13);
  testing_support::PanelDraw d;
  d.n_units = 12;
  d.n_periods = 9;
  d.k = 2;
  const auto p = drop_perfect_classification(testing_support::random_panel(rng, d), true, true);
  const auto f = fit_mle(p, ModelSpec{});
  SUBCASE("fixed point at the joint maximizer") {
    const auto e = profile_effects(f.beta, p, ModelSpec{});
    CHECK((e.alpha - f.alpha).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((e.gamma - f.gamma).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("far from the optimum") {
    const Eigen::VectorXd far = f.beta.array() + 10.0;
    const auto e = profile_effects(far, p, ModelSpec{});
    const auto o = oracle::dense_newton(p, false, true, true, far);
    REQUIRE(o.converged);
    CHECK(e.loglik == doctest::Approx(o.loglik).epsilon(1e-9));
    CHECK((e.alpha - o.alpha).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("null log likelihood") {
  std::vector<std::tuple<std::string, long long, double, std::vector<double>>> rows;
  for (int i = 0; i < 100; ++i) rows.emplace_back(std::to_string(i / 10), i % 10, i % 2, std::vector<double>{double(i % 7)});
  const auto half = testing_support::make_panel(rows, {"x"});
  CHECK(loglik_null(half, Family::Logit) == doctest::Approx(-69.31471805599453).epsilon(1e-13));
  const auto quarter = testing_support::make_panel(
      {{"a", 1, 1, {0.0}}, {"a", 2, 0, {1.0}}, {"b", 1, 0, {2.0}}, {"b", 2, 0, {3.0}}}, {"x"});
  CHECK(loglik_null(quarter, Family::Probit) == doctest::Approx(-2.249340578475233).epsilon(1e-13));
}

TEST_CASE("zero slope data gives a small slope") {
  std::mt19937_64 rng(14);
  testing_support::PanelDraw d;
  d.n_units = 150;
  d.n_periods = 40;
  d.beta_scale = 0.0;
  d.effect_sd = 0.0;
  const auto p = drop_perfect_classification(testing_support::random_panel(rng, d), true, true);
  const auto f = fit_mle(p, ModelSpec{});
  CHECK(std::abs(f.beta(0)) < 0.1);
}

TEST_CASE("collinear covariates are rejected") {
  std::vector<std::tuple<std::string, long long, double, std::vector<double>>> rows;
  std::mt19937_64 rng(15);
  std::normal_distribution<double> nrm;
  for (int i = 0; i < 6; ++i) {
    for (int t = 0; t < 6; ++t) {
      const double x = nrm(rng);
      rows.emplace_back(std::to_string(i), t, (i + t) % 2, std::vector<double>{x, 2.0 * x});
    }
  }
  const auto p = testing_support::make_panel(rows, {"a", "b"});
  try {
    fit_mle(p, ModelSpec{});
    FAIL("expected CollinearCovariates");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CollinearCovariates);
  }
}
