#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "panelfe/analytical.hpp"
#include "panelfe/estimator.hpp"
#include "panelfe/inference.hpp"
#include "panelfe/jackknife.hpp"
#include "panelfe/model.hpp"
#include "panelfe/panel.hpp"

namespace panelfe {

// Uncorrected fit with everything the corrections and standard errors share.
struct BaseFit {
  PanelData panel;  // after perfect-classification drops
  std::vector<bool> binary;
  FitResult fit;
  PlugIn plugin;
  BiasComponents components;  // lags = 0
  Eigen::MatrixXd vcov_beta;
  ApeVariance ape;
  FitStats stats;
};

BaseFit fit_base(const PanelData& raw, const ModelSpec& spec, const FitOptions& options = {});

struct Corrected {
  Eigen::VectorXd beta;
  Eigen::VectorXd delta;
  std::optional<BiasComponents> components;  // analytical only
  std::optional<JackknifeDiagnostics> jackknife;
};

// The estimate requested by spec.correction.
Corrected apply_correction(const BaseFit& base, const ModelSpec& spec, int jobs = 1);

}  // namespace panelfe
