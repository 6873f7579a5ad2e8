#include "panelfe/jackknife.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "panelfe/ape.hpp"
#include "panelfe/error.hpp"
#include "panelfe/parallel.hpp"

namespace panelfe {

std::string_view to_string(SubAverage a) {
  switch (a) {
    case SubAverage::Full: return "full";
    case SubAverage::HalfBoth: return "half-both";
    case SubAverage::HalfUnits: return "half-units";
    case SubAverage::HalfPeriods: return "half-periods";
    case SubAverage::LooUnits: return "loo-units";
    case SubAverage::LooPeriods: return "loo-periods";
    case SubAverage::LooEntities: return "loo-entities";
  }
  return "?";
}

BiasTarget bias_target(const ModelSpec& spec) {
  const bool b = spec.include_ieffects && spec.ibias;
  const bool d = spec.include_teffects && spec.tbias;
  if (b && d) return BiasTarget::Both;
  if (b) return BiasTarget::Individual;
  if (d) return BiasTarget::Time;
  return BiasTarget::None;
}

std::vector<CombinationTerm> combination_terms(JackknifeVariant variant, int n_units, int n_periods,
                                               BiasTarget target) {
  using V = JackknifeVariant;
  using S = SubAverage;
  const double n = n_units;
  const double t = n_periods;
  // One-way cases: the split variants are ss1, ss2 plus sj (individual bias)
  // or js (time bias). The others delete one period (individual bias, order
  // 1/T) or one unit (time bias, order 1/N).
  const bool split = variant == V::SS1 || variant == V::SS2;
  switch (target) {
    case BiasTarget::None:
      return {{1.0, S::Full}};
    case BiasTarget::Individual:
      if (split || variant == V::SJ) return {{2.0, S::Full}, {-1.0, S::HalfPeriods}};
      return {{t, S::Full}, {-(t - 1.0), S::LooPeriods}};
    case BiasTarget::Time:
      if (split || variant == V::JS) return {{2.0, S::Full}, {-1.0, S::HalfUnits}};
      return {{n, S::Full}, {-(n - 1.0), S::LooUnits}};
    case BiasTarget::Both:
      break;
  }
  switch (variant) {
    case V::SS1: return {{2.0, S::Full}, {-1.0, S::HalfBoth}};
    case V::SS2: return {{3.0, S::Full}, {-1.0, S::HalfPeriods}, {-1.0, S::HalfUnits}};
    case V::JS: return {{n + 1.0, S::Full}, {-(n - 1.0), S::LooUnits}, {-1.0, S::HalfPeriods}};
    case V::SJ: return {{t + 1.0, S::Full}, {-1.0, S::HalfUnits}, {-(t - 1.0), S::LooPeriods}};
    case V::JJ: return {{n + t - 1.0, S::Full}, {-(n - 1.0), S::LooUnits}, {-(t - 1.0), S::LooPeriods}};
    case V::Double: return {{n, S::Full}, {-(n - 1.0), S::LooEntities}};
  }
  return {{1.0, S::Full}};
}

Eigen::VectorXd combine(JackknifeVariant variant, const Eigen::VectorXd& full, const SubAverages& subs,
                        int n_units, int n_periods, BiasTarget target) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(full.size());
  for (const auto& term : combination_terms(variant, n_units, n_periods, target)) {
    if (term.average == SubAverage::Full) {
      out += term.coef * full;
      continue;
    }
    auto it = subs.find(term.average);
    if (it == subs.end() || it->second.size() != full.size()) {
      throw Error(ErrorCode::VariantInputMissing, std::string(to_string(variant)) + " needs the " +
                                                      std::string(to_string(term.average)) + " average");
    }
    out += term.coef * it->second;
  }
  return out;
}

namespace {

std::optional<long long> as_integer(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_identity(const std::vector<int>& order) {
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] != static_cast<int>(i)) return false;
  }
  return true;
}

// First and second halves of positions 0..n-1: [0, ceil(n/2)) and [floor(n/2), n).
std::pair<std::vector<bool>, std::vector<bool>> halves_by_order(const std::vector<int>& order, int n) {
  std::vector<bool> first(static_cast<std::size_t>(n), false), second(static_cast<std::size_t>(n), false);
  const int lo_end = (n + 1) / 2;
  const int hi_begin = n / 2;
  for (int pos = 0; pos < n; ++pos) {
    const auto idx = static_cast<std::size_t>(order[static_cast<std::size_t>(pos)]);
    if (pos < lo_end) first[idx] = true;
    if (pos >= hi_begin) second[idx] = true;
  }
  return {first, second};
}

// Halves of the period-label range; each unit keeps its observed periods within the half.
std::pair<std::vector<bool>, std::vector<bool>> period_halves_by_range(const PanelData& panel) {
  const auto& labels = panel.period_labels();
  const long long lo = labels.front();
  const long long span = panel.t_span();
  const long long lo_end = (span + 1) / 2;
  const long long hi_begin = span / 2;
  std::vector<bool> first(labels.size(), false), second(labels.size(), false);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const long long off = labels[t] - lo;
    first[t] = off < lo_end;
    second[t] = off >= hi_begin;
  }
  return {first, second};
}

std::vector<bool> all_but(int n, int skip) {
  std::vector<bool> v(static_cast<std::size_t>(n), true);
  if (skip >= 0) v[static_cast<std::size_t>(skip)] = false;
  return v;
}

}  // namespace

std::vector<int> natural_unit_order(const PanelData& panel) {
  const int n = panel.n_units();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::optional<long long>> numeric(static_cast<std::size_t>(n));
  bool all_numeric = true;
  for (int i = 0; i < n; ++i) {
    numeric[static_cast<std::size_t>(i)] = as_integer(panel.unit_label(i));
    all_numeric = all_numeric && numeric[static_cast<std::size_t>(i)].has_value();
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (all_numeric) return *numeric[static_cast<std::size_t>(a)] < *numeric[static_cast<std::size_t>(b)];
    return panel.unit_label(a) < panel.unit_label(b);
  });
  return order;
}

SubpanelPlan build_plan(const PanelData& panel, JackknifeVariant variant, BiasTarget target,
                        const SplitOrders& orders) {
  SubpanelPlan plan;
  plan.variant = variant;
  plan.target = target;
  const int n = panel.n_units();
  const int t = panel.n_periods();

  std::set<SubAverage> needed;
  for (const auto& term : combination_terms(variant, n, t, target)) {
    if (term.average != SubAverage::Full) needed.insert(term.average);
  }

  const std::vector<int> unit_order = orders.units.empty() ? natural_unit_order(panel) : orders.units;
  if (static_cast<int>(unit_order.size()) != n) {
    throw Error(ErrorCode::InvalidOption, "unit ordering does not match the panel");
  }
  const auto unit_halves = halves_by_order(unit_order, n);
  std::pair<std::vector<bool>, std::vector<bool>> period_halves;
  if (orders.periods.empty() || is_identity(orders.periods)) {
    period_halves = period_halves_by_range(panel);
  } else {
    if (static_cast<int>(orders.periods.size()) != t) {
      throw Error(ErrorCode::InvalidOption, "period ordering does not match the panel");
    }
    period_halves = halves_by_order(orders.periods, t);
  }
  const std::vector<bool> all_units(static_cast<std::size_t>(n), true);
  const std::vector<bool> all_periods(static_cast<std::size_t>(t), true);
  const std::vector<bool>* uh[2] = {&unit_halves.first, &unit_halves.second};
  const std::vector<bool>* ph[2] = {&period_halves.first, &period_halves.second};

  for (SubAverage group : needed) {
    switch (group) {
      case SubAverage::HalfBoth:
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            plan.subsets.push_back({*uh[a], *ph[b], group,
                                    "unit half " + std::to_string(a + 1) + " x period half " + std::to_string(b + 1)});
          }
        }
        break;
      case SubAverage::HalfUnits:
        for (int a = 0; a < 2; ++a) {
          plan.subsets.push_back({*uh[a], all_periods, group, "unit half " + std::to_string(a + 1)});
        }
        break;
      case SubAverage::HalfPeriods:
        for (int b = 0; b < 2; ++b) {
          plan.subsets.push_back({all_units, *ph[b], group, "period half " + std::to_string(b + 1)});
        }
        break;
      case SubAverage::LooUnits:
        for (int i = 0; i < n; ++i) {
          plan.subsets.push_back({all_but(n, i), all_periods, group, "without unit '" + panel.unit_label(i) + "'"});
        }
        break;
      case SubAverage::LooPeriods:
        for (int p = 0; p < t; ++p) {
          plan.subsets.push_back(
              {all_units, all_but(t, p), group, "without period " + std::to_string(panel.period_label(p))});
        }
        break;
      case SubAverage::LooEntities: {
        std::set<std::string> units(panel.unit_labels().begin(), panel.unit_labels().end());
        std::set<std::string> periods;
        std::unordered_map<std::string, int> period_of;
        for (int p = 0; p < t; ++p) {
          const std::string label = std::to_string(panel.period_label(p));
          periods.insert(label);
          period_of[label] = p;
        }
        if (units != periods) {
          throw Error(ErrorCode::DoubleRequiresSquarePanel,
                      "double needs the same labels for units and periods after drops");
        }
        for (int i = 0; i < n; ++i) {
          const std::string& label = panel.unit_label(i);
          plan.subsets.push_back(
              {all_but(n, i), all_but(t, period_of.at(label)), group, "without entity '" + label + "'"});
        }
        break;
      }
      case SubAverage::Full:
        break;
    }
  }
  return plan;
}

SubpanelEstimate subpanel_fit(const PanelData& panel, const ModelSpec& spec, const std::vector<bool>& binary,
                              const Subset& subset, const FitResult* warm) {
  const bool any_unit = std::find(subset.units.begin(), subset.units.end(), true) != subset.units.end();
  const bool any_period = std::find(subset.periods.begin(), subset.periods.end(), true) != subset.periods.end();
  if (!any_unit || !any_period) {
    throw Error(ErrorCode::InvalidOption, "subpanel " + subset.label + " selects no units or periods");
  }
  try {
    std::vector<bool> keep(panel.n_obs());
    bool any = false;
    for (std::size_t r = 0; r < panel.n_obs(); ++r) {
      keep[r] = subset.units[static_cast<std::size_t>(panel.unit()[r])] &&
                subset.periods[static_cast<std::size_t>(panel.period()[r])];
      any = any || keep[r];
    }
    if (!any) throw Error(ErrorCode::EmptyAfterDrop, "no observed cells");
    const PanelData restricted = panel.select_rows(keep).with_drop_log({});
    const PanelData sub = drop_perfect_classification(restricted, spec.include_ieffects, spec.include_teffects);

    FitOptions options;
    if (warm) {
      std::unordered_map<std::string, int> unit_index;
      for (int i = 0; i < panel.n_units(); ++i) unit_index.emplace(panel.unit_label(i), i);
      std::unordered_map<long long, int> period_index;
      for (int p = 0; p < panel.n_periods(); ++p) period_index.emplace(panel.period_label(p), p);
      FitStart start{warm->beta, Eigen::VectorXd(sub.n_units()), Eigen::VectorXd(sub.n_periods())};
      for (int i = 0; i < sub.n_units(); ++i) start.alpha(i) = warm->alpha(unit_index.at(sub.unit_label(i)));
      for (int p = 0; p < sub.n_periods(); ++p) start.gamma(p) = warm->gamma(period_index.at(sub.period_label(p)));
      options.start = std::move(start);
    }
    const FitResult fit = fit_mle(sub, spec, options);
    SubpanelEstimate est;
    est.beta = fit.beta;
    est.delta = partial_effects(fit.beta, fit.alpha, fit.gamma, sub, spec.family, binary).delta;
    est.drops = sub.drop_log();
    est.n_obs = sub.n_obs();
    return est;
  } catch (const Error& e) {
    throw Error(e.code(), "subpanel " + subset.label + ": " + e.what());
  }
}

std::vector<int> seeded_permutation(int n, std::uint64_t seed, int repetition) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(repetition)};
  std::mt19937_64 rng(seq);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates, drawing with a fixed algorithm so orders are reproducible.
  for (int i = n - 1; i > 0; --i) {
    const std::uint64_t bound = static_cast<std::uint64_t>(i) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(draw % bound)]);
  }
  return order;
}

JackknifeResult jackknife_correct_with_orders(const PanelData& panel, const ModelSpec& spec, const FitResult& fit,
                                              const Eigen::VectorXd& delta_hat, const std::vector<bool>& binary,
                                              const std::vector<SplitOrders>& orders, int jobs) {
  const BiasTarget target = bias_target(spec);
  std::vector<SubpanelPlan> plans;
  plans.reserve(orders.size());
  for (const auto& o : orders) plans.push_back(build_plan(panel, spec.jk_variant, target, o));

  // Flatten every subset of every partition into one job list.
  std::vector<std::pair<std::size_t, std::size_t>> jobs_list;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    for (std::size_t s = 0; s < plans[p].subsets.size(); ++s) jobs_list.emplace_back(p, s);
  }
  std::vector<SubpanelEstimate> estimates(jobs_list.size());
  parallel_for(jobs_list.size(), jobs, [&](std::size_t j) {
    const auto [p, s] = jobs_list[j];
    estimates[j] = subpanel_fit(panel, spec, binary, plans[p].subsets[s], &fit);
  });

  JackknifeResult res;
  const Eigen::Index k = fit.beta.size();
  res.beta = Eigen::VectorXd::Zero(k);
  res.delta = Eigen::VectorXd::Zero(k);
  res.diagnostics.partitions = static_cast<int>(plans.size());
  res.diagnostics.subpanels = estimates.size();
  std::size_t j = 0;
  for (const auto& plan : plans) {
    SubAverages beta_avg, delta_avg;
    std::map<SubAverage, int> counts;
    for (const auto& subset : plan.subsets) {
      const auto& est = estimates[j++];
      auto& b = beta_avg[subset.group];
      auto& d = delta_avg[subset.group];
      if (b.size() == 0) {
        b = Eigen::VectorXd::Zero(k);
        d = Eigen::VectorXd::Zero(k);
      }
      b += est.beta;
      d += est.delta;
      ++counts[subset.group];
      res.diagnostics.drops += est.drops;
    }
    for (auto& [group, c] : counts) {
      beta_avg[group] /= c;
      delta_avg[group] /= c;
    }
    res.beta += combine(plan.variant, fit.beta, beta_avg, panel.n_units(), panel.n_periods(), target);
    res.delta += combine(plan.variant, delta_hat, delta_avg, panel.n_units(), panel.n_periods(), target);
  }
  res.beta /= static_cast<double>(plans.size());
  res.delta /= static_cast<double>(plans.size());
  return res;
}

JackknifeResult jackknife_correct(const PanelData& panel, const ModelSpec& spec, const FitResult& fit,
                                  const Eigen::VectorXd& delta_hat, const std::vector<bool>& binary, int jobs) {
  std::vector<SplitOrders> orders;
  const bool split_variant = spec.jk_variant == JackknifeVariant::SS1 || spec.jk_variant == JackknifeVariant::SS2;
  if (spec.multiple > 0 && split_variant) {
    const bool perm_units = spec.multiple_dim != PartitionDim::Time;
    const bool perm_periods = spec.multiple_dim != PartitionDim::Individuals;
    for (int r = 0; r < spec.multiple; ++r) {
      SplitOrders o;
      // Separate streams for the two dimensions of the same repetition.
      if (perm_units) o.units = seeded_permutation(panel.n_units(), spec.seed, 2 * r);
      if (perm_periods) o.periods = seeded_permutation(panel.n_periods(), spec.seed, 2 * r + 1);
      orders.push_back(std::move(o));
    }
  } else {
    orders.emplace_back();
  }
  return jackknife_correct_with_orders(panel, spec, fit, delta_hat, binary, orders, jobs);
}

}  // namespace panelfe
