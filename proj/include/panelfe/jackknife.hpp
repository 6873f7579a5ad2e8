#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panelfe/estimator.hpp"
#include "panelfe/model.hpp"
#include "panelfe/panel.hpp"

namespace panelfe {

// Averages of subpanel estimates entering the combinations.
enum class SubAverage {
  Full,         // the full-panel estimate
  HalfBoth,     // quarters: unit half x period half
  HalfUnits,    // unit halves, all periods
  HalfPeriods,  // all units, period halves
  LooUnits,     // delete one unit
  LooPeriods,   // delete one period
  LooEntities,  // delete one label as unit and as period
};

std::string_view to_string(SubAverage a);

// Which incidental-parameter bias the combination removes. Individual effects
// produce bias of order 1/T, time effects of order 1/N.
enum class BiasTarget { Both, Individual, Time, None };

BiasTarget bias_target(const ModelSpec& spec);

struct CombinationTerm {
  double coef = 0.0;
  SubAverage average = SubAverage::Full;
};

// Linear combination of the full estimate and sub-averages defining each
// variant. Coefficients sum to one.
std::vector<CombinationTerm> combination_terms(JackknifeVariant variant, int n_units, int n_periods,
                                               BiasTarget target = BiasTarget::Both);

using SubAverages = std::map<SubAverage, Eigen::VectorXd>;

// Applies combination_terms to `full` and `subs`. Throws VariantInputMissing.
Eigen::VectorXd combine(JackknifeVariant variant, const Eigen::VectorXd& full, const SubAverages& subs,
                        int n_units, int n_periods, BiasTarget target = BiasTarget::Both);

struct Subset {
  std::vector<bool> units;    // dense unit indices of the parent panel
  std::vector<bool> periods;  // dense period indices of the parent panel
  SubAverage group = SubAverage::Full;
  std::string label;
};

// Orderings used for the half splits. An empty vector means the natural order:
// units by label (numeric when every label is an integer), periods by the
// label range.
struct SplitOrders {
  std::vector<int> units;
  std::vector<int> periods;
};

struct SubpanelPlan {
  JackknifeVariant variant = JackknifeVariant::SS2;
  BiasTarget target = BiasTarget::Both;
  std::vector<Subset> subsets;
};

// Units in natural order (dense indices).
std::vector<int> natural_unit_order(const PanelData& panel);

// Throws DoubleRequiresSquarePanel.
SubpanelPlan build_plan(const PanelData& panel, JackknifeVariant variant, BiasTarget target,
                        const SplitOrders& orders = {});

struct SubpanelEstimate {
  Eigen::VectorXd beta;
  Eigen::VectorXd delta;
  DropLog drops;
  std::size_t n_obs = 0;
};

// Restricts to the observed cells of units x periods, re-runs the
// perfect-classification drops, fits and averages the partial effects.
// Errors carry the subset label. `warm` (a fit of `panel`) seeds the effects.
SubpanelEstimate subpanel_fit(const PanelData& panel, const ModelSpec& spec, const std::vector<bool>& binary,
                              const Subset& subset, const FitResult* warm = nullptr);

struct JackknifeDiagnostics {
  int partitions = 0;
  std::size_t subpanels = 0;
  DropLog drops;  // summed over subpanels
};

struct JackknifeResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd delta;
  JackknifeDiagnostics diagnostics;
};

// Permutation of 0..n-1 from a seeded shuffle; stream derived from (seed, repetition).
std::vector<int> seeded_permutation(int n, std::uint64_t seed, int repetition);

// Full jackknife correction of a fitted panel. For ss1/ss2 with
// spec.multiple > 0 the corrected estimates are averaged over that many
// random orderings of spec.multiple_dim.
JackknifeResult jackknife_correct(const PanelData& panel, const ModelSpec& spec, const FitResult& fit,
                                  const Eigen::VectorXd& delta_hat, const std::vector<bool>& binary, int jobs = 1);

// Same with explicit orderings, one correction per entry, averaged.
JackknifeResult jackknife_correct_with_orders(const PanelData& panel, const ModelSpec& spec, const FitResult& fit,
                                              const Eigen::VectorXd& delta_hat, const std::vector<bool>& binary,
                                              const std::vector<SplitOrders>& orders, int jobs = 1);

}  // namespace panelfe
