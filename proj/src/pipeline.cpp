#include "panelfe/pipeline.hpp"

#include "panelfe/ape.hpp"

namespace panelfe {

BaseFit fit_base(const PanelData& raw, const ModelSpec& spec, const FitOptions& options) {
  spec.validate();
  BaseFit b;
  b.panel = drop_perfect_classification(raw, spec.include_ieffects, spec.include_teffects);
  b.binary = resolve_binary(b.panel, spec);
  b.fit = fit_mle(b.panel, spec, options);
  b.plugin = compute_plugin(b.panel, spec, b.fit, b.binary);
  ModelSpec no_lags = spec;
  no_lags.lags = 0;
  b.components = bias_components(b.panel, no_lags, b.plugin);
  b.vcov_beta = vcov_beta(b.components, b.panel.n_units(), b.panel.n_periods());
  const double fpc = finite_population_correction(spec.population, b.panel.n_obs());
  b.ape = ape_variance(b.panel, b.plugin, b.components, fpc);
  b.stats = lr_and_fit_stats(b.fit.loglik, b.fit.loglik_null, b.panel.n_covariates());
  return b;
}

Corrected apply_correction(const BaseFit& base, const ModelSpec& spec, int jobs) {
  Corrected c;
  switch (spec.correction) {
    case Correction::None:
      c.beta = base.fit.beta;
      c.delta = base.plugin.effects.delta;
      break;
    case Correction::Analytical: {
      const AnalyticalResult a = analytical_correct(base.panel, spec, base.fit, base.plugin, base.binary);
      c.beta = a.beta;
      c.delta = a.delta;
      c.components = a.components;
      break;
    }
    case Correction::Jackknife: {
      const JackknifeResult j =
          jackknife_correct(base.panel, spec, base.fit, base.plugin.effects.delta, base.binary, jobs);
      c.beta = j.beta;
      c.delta = j.delta;
      c.jackknife = j.diagnostics;
      break;
    }
  }
  return c;
}

}  // namespace panelfe
