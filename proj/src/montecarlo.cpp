#include "panelfe/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "panelfe/ape.hpp"
#include "panelfe/error.hpp"
#include "panelfe/estimator.hpp"
#include "panelfe/inference.hpp"
#include "panelfe/parallel.hpp"
#include "panelfe/pipeline.hpp"

namespace panelfe {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double open_uniform(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v = u(rng);
  while (v <= 0.0) v = u(rng);
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedInput, "cannot parse '" + s + "' as " + what);
  }
}

}  // namespace

SimDesign synthetic_design(std::uint64_t seed, int entities, const Eigen::VectorXd& beta) {
  if (beta.size() != 2) throw Error(ErrorCode::InvalidOption, "synthetic design has two covariates");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  SimDesign d;
  d.covariate_names = {"ltrade", "ldist"};
  d.beta_true = beta;
  d.alpha.resize(entities);
  d.gamma.resize(entities);
  for (int i = 0; i < entities; ++i) d.alpha(i) = normal(rng);
  for (int j = 0; j < entities; ++j) d.gamma(j) = normal(rng);
  Eigen::MatrixXd ltrade = Eigen::MatrixXd::Zero(entities, entities);
  Eigen::MatrixXd ldist = Eigen::MatrixXd::Zero(entities, entities);
  for (int i = 0; i < entities; ++i) {
    for (int j = 0; j < entities; ++j) {
      if (i == j) continue;
      ldist(i, j) = normal(rng);
      const double p = logistic(beta(1) * ldist(i, j) + d.alpha(i) + d.gamma(j));
      ltrade(i, j) = open_uniform(rng) < p ? 1.0 : 0.0;
    }
  }
  d.covariates = {ltrade, ldist};
  return d;
}

SimDesign calibrated_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot open '" + path + "'");
  std::string line;
  Eigen::VectorXd beta;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# beta", 0) == 0) {
      auto cells = split(line.substr(7), ',');
      beta.resize(static_cast<Eigen::Index>(cells.size()));
      for (std::size_t c = 0; c < cells.size(); ++c) beta(static_cast<Eigen::Index>(c)) = parse_double(cells[c], "beta");
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    header = split(line, ',');
    break;
  }
  if (beta.size() == 0 || header.size() < 4) {
    throw Error(ErrorCode::MalformedInput, "'" + path + "' is not an exported effects file");
  }
  // id, time, covariates..., alpha, gamma
  const std::size_t k = header.size() - 4;
  if (static_cast<Eigen::Index>(k) != beta.size() || header[header.size() - 2] != "alpha" || header.back() != "gamma") {
    throw Error(ErrorCode::MalformedInput, "unexpected columns in '" + path + "'");
  }
  struct Row {
    std::string unit, period;
    std::vector<double> x;
    double alpha, gamma;
  };
  std::vector<Row> rows;
  std::map<std::string, int> index;
  auto entity = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, static_cast<int>(index.size()));
    return it->second;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != header.size()) throw Error(ErrorCode::MalformedInput, "ragged row in '" + path + "'");
    Row r{cells[0], cells[1], {}, 0.0, 0.0};
    for (std::size_t c = 0; c < k; ++c) r.x.push_back(parse_double(cells[2 + c], header[2 + c]));
    r.alpha = parse_double(cells[2 + k], "alpha");
    r.gamma = parse_double(cells[3 + k], "gamma");
    entity(r.unit);
    entity(r.period);
    rows.push_back(std::move(r));
  }
  const int p = static_cast<int>(index.size());
  SimDesign d;
  d.covariate_names.assign(header.begin() + 2, header.begin() + 2 + static_cast<std::ptrdiff_t>(k));
  d.beta_true = beta;
  d.alpha = Eigen::VectorXd::Zero(p);
  d.gamma = Eigen::VectorXd::Zero(p);
  d.covariates.assign(k, Eigen::MatrixXd::Zero(p, p));
  for (const auto& r : rows) {
    const int i = index.at(r.unit);
    const int j = index.at(r.period);
    d.alpha(i) = r.alpha;
    d.gamma(j) = r.gamma;
    for (std::size_t c = 0; c < k; ++c) d.covariates[c](i, j) = r.x[c];
  }
  return d;
}

int design_entities(const SimDesign& design) { return static_cast<int>(design.alpha.size()); }

int simulate_outcome(double index, double u) { return index > std::log(1.0 / u - 1.0) ? 1 : 0; }

std::mt19937_64 replication_rng(std::uint64_t seed, int rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), 0x9e37u};
  return std::mt19937_64(seq);
}

SimSample draw_sample(const SimDesign& design, int n, std::mt19937_64& rng) {
  const int p = design_entities(design);
  if (n < 2 || n > p) {
    throw Error(ErrorCode::InvalidOption, "sample size " + std::to_string(n) + " outside [2, " + std::to_string(p) + "]");
  }
  std::vector<int> pool(static_cast<std::size_t>(p));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> pick(i, p - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  SimSample s;
  s.entities.assign(pool.begin(), pool.begin() + n);
  std::sort(s.entities.begin(), s.entities.end());

  const std::size_t k = design.covariates.size();
  std::vector<Observation> rows;
  rows.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1));
  for (int i : s.entities) {
    for (int j : s.entities) {
      if (i == j) continue;
      Observation o;
      o.unit = std::to_string(i + 1);
      o.period = j + 1;
      o.x.resize(k);
      double index = design.alpha(i) + design.gamma(j);
      for (std::size_t c = 0; c < k; ++c) {
        o.x[c] = design.covariates[c](i, j);
        index += design.beta_true(static_cast<Eigen::Index>(c)) * o.x[c];
      }
      o.y = simulate_outcome(index, open_uniform(rng));
      rows.push_back(std::move(o));
    }
  }
  s.panel = PanelData(rows, design.covariate_names);

  // Partial effects at the truth, on every sampled pair.
  ModelSpec spec;
  spec.family = design.family;
  const std::vector<bool> binary = resolve_binary(s.panel, spec);
  Eigen::VectorXd alpha(s.panel.n_units()), gamma(s.panel.n_periods());
  for (int u = 0; u < s.panel.n_units(); ++u) alpha(u) = design.alpha(std::stoi(s.panel.unit_label(u)) - 1);
  for (int t = 0; t < s.panel.n_periods(); ++t) gamma(t) = design.gamma(s.panel.period_label(t) - 1);
  s.ape_true = partial_effects(design.beta_true, alpha, gamma, s.panel, design.family, binary).delta;
  return s;
}

ModelSpec estimator_spec(const std::string& name, Family family) {
  ModelSpec spec;
  spec.family = family;
  if (name == "fe") {
    spec.correction = Correction::None;
  } else if (name.rfind("an", 0) == 0 && name.size() > 2 &&
             std::all_of(name.begin() + 2, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    spec.correction = Correction::Analytical;
    spec.lags = std::stoi(name.substr(2));
  } else if (auto v = parse_jackknife_variant(name)) {
    spec.correction = Correction::Jackknife;
    spec.jk_variant = *v;
  } else {
    throw Error(ErrorCode::InvalidOption, "unknown estimator '" + name + "'");
  }
  return spec;
}

namespace {

struct Draw {
  bool ok = false;
  Eigen::VectorXd beta, delta, se_beta, se_delta, delta_true;
};

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<MetricRow> run_study(const SimDesign& design, const StudyOptions& options) {
  if (options.reps < 1) throw Error(ErrorCode::InvalidOption, "replications must be at least 1");
  const int p = design_entities(design);
  const long long population = static_cast<long long>(p) * (p - 1);
  const std::size_t k = design.covariates.size();
  std::vector<ModelSpec> specs;
  for (const auto& name : options.estimators) {
    ModelSpec s = estimator_spec(name, design.family);
    s.population = population;
    specs.push_back(s);
  }
  for (int n : options.sizes) {
    if (n < 2 || n > p) throw Error(ErrorCode::InvalidOption, "sample size " + std::to_string(n) + " outside design");
  }

  std::vector<MetricRow> out;
  for (int n : options.sizes) {
    // draws[rep][estimator]
    std::vector<std::vector<Draw>> draws(static_cast<std::size_t>(options.reps),
                                         std::vector<Draw>(specs.size()));
    parallel_for(static_cast<std::size_t>(options.reps), options.jobs, [&](std::size_t r) {
      std::mt19937_64 rng = replication_rng(options.seed ^ (static_cast<std::uint64_t>(n) << 40), static_cast<int>(r));
      const SimSample sample = draw_sample(design, n, rng);
      std::optional<BaseFit> base;
      try {
        base = fit_base(sample.panel, specs.front());
      } catch (const Error&) {
        return;
      }
      const Eigen::VectorXd se_beta = base->vcov_beta.diagonal().cwiseMax(0.0).cwiseSqrt();
      for (std::size_t e = 0; e < specs.size(); ++e) {
        try {
          const Corrected c = apply_correction(*base, specs[e], 1);
          Draw& d = draws[r][e];
          d.beta = c.beta;
          d.delta = c.delta;
          d.se_beta = se_beta;
          d.se_delta = base->ape.se;
          d.delta_true = sample.ape_true;
          d.ok = c.beta.allFinite() && c.delta.allFinite();
        } catch (const Error&) {
        }
      }
    });

    for (std::size_t e = 0; e < specs.size(); ++e) {
      for (int kind = 0; kind < 2; ++kind) {
        for (std::size_t c = 0; c < k; ++c) {
          const auto ci = static_cast<Eigen::Index>(c);
          MetricRow row;
          row.estimator = options.estimators[e];
          row.n = n;
          row.parameter = std::string(kind == 0 ? "coef " : "ape ") + design.covariate_names[c];
          std::vector<double> err, est, se;
          int hits = 0;
          for (const auto& rep : draws) {
            const Draw& d = rep[e];
            if (!d.ok) {
              ++row.failures;
              continue;
            }
            const double truth = kind == 0 ? design.beta_true(ci) : d.delta_true(ci);
            const double value = kind == 0 ? d.beta(ci) : d.delta(ci);
            const double s = kind == 0 ? d.se_beta(ci) : d.se_delta(ci);
            row.absolute = row.absolute || truth == 0.0;
            err.push_back(truth == 0.0 ? value : 100.0 * (value - truth) / truth);
            est.push_back(value);
            se.push_back(s);
            if (std::abs(value - truth) <= kCriticalValue95 * s) ++hits;
          }
          row.replications = static_cast<int>(err.size());
          if (!err.empty()) {
            if (row.absolute) {
              // Mixed zero and nonzero truths cannot be normalized; report absolute errors throughout.
              err.clear();
              for (std::size_t r = 0, j = 0; r < draws.size(); ++r) {
                const Draw& d = draws[r][e];
                if (!d.ok) continue;
                const double truth = kind == 0 ? design.beta_true(ci) : d.delta_true(ci);
                err.push_back(est[j++] - truth);
              }
            }
            row.bias_pct = mean(err);
            row.sd_pct = sd(err);
            double ms = 0.0;
            for (double x : err) ms += x * x;
            row.rmse_pct = std::sqrt(ms / static_cast<double>(err.size()));
            const double sd_est = sd(est);
            row.se_sd_ratio = sd_est > 0.0 ? mean(se) / sd_est : 0.0;
            row.coverage95 = static_cast<double>(hits) / static_cast<double>(err.size());
          }
          out.push_back(row);
        }
      }
    }
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream os;
  os << "estimator,N,parameter,bias_pct,sd_pct,rmse_pct,se_sd_ratio,coverage95,replications,failures,absolute\n";
  os << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.estimator << ',' << r.n << ',' << r.parameter << ',' << r.bias_pct << ',' << r.sd_pct << ','
       << r.rmse_pct << ',' << r.se_sd_ratio << ',' << r.coverage95 << ',' << r.replications << ','
       << r.failures << ',' << (r.absolute ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string metrics_table(const std::vector<MetricRow>& rows) {
  std::ostringstream os;
  // One panel per estimator and parameter kind, one line per N.
  std::vector<std::string> estimators;
  for (const auto& r : rows) {
    if (std::find(estimators.begin(), estimators.end(), r.estimator) == estimators.end()) {
      estimators.push_back(r.estimator);
    }
  }
  std::string upper;
  int failures_total = 0;
  for (const auto& est : estimators) {
    for (const char* kind : {"coef ", "ape "}) {
      std::vector<std::string> params;
      std::vector<int> sizes;
      for (const auto& r : rows) {
        if (r.estimator != est || r.parameter.rfind(kind, 0) != 0) continue;
        if (std::find(params.begin(), params.end(), r.parameter) == params.end()) params.push_back(r.parameter);
        if (std::find(sizes.begin(), sizes.end(), r.n) == sizes.end()) sizes.push_back(r.n);
      }
      if (params.empty()) continue;
      upper = est;
      std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
      os << "Panel " << upper << (std::string(kind) == "coef " ? ": coefficients" : ": average partial effects")
         << '\n';
      os << std::setw(6) << "N";
      for (const auto& p : params) os << " | " << std::left << std::setw(44) << p << std::right;
      os << '\n' << std::setw(6) << "";
      for (std::size_t i = 0; i < params.size(); ++i) {
        os << " | " << std::setw(8) << "Bias" << std::setw(9) << "Std.Dev" << std::setw(9) << "RMSE"
           << std::setw(9) << "SE/SD" << std::setw(9) << "p;.95";
      }
      os << '\n';
      for (int n : sizes) {
        os << std::setw(6) << n;
        for (const auto& p : params) {
          for (const auto& r : rows) {
            if (r.estimator != est || r.parameter != p || r.n != n) continue;
            os << " | " << std::fixed << std::setprecision(2) << std::setw(8) << r.bias_pct << std::setw(9)
               << r.sd_pct << std::setw(9) << r.rmse_pct << std::setprecision(3) << std::setw(9) << r.se_sd_ratio
               << std::setw(9) << r.coverage95 << std::defaultfloat;
          }
        }
        os << '\n';
      }
      os << '\n';
    }
  }
  os << "Bias, Std.Dev and RMSE in percent of the true value";
  bool any_abs = std::any_of(rows.begin(), rows.end(), [](const MetricRow& r) { return r.absolute; });
  if (any_abs) os << " (absolute units where the truth is zero)";
  // Failures are per replication and estimator, identical across the parameter rows.
  std::map<std::pair<std::string, int>, int> failures;
  for (const auto& r : rows) failures[{r.estimator, r.n}] = r.failures;
  for (const auto& [key, f] : failures) failures_total += f;
  os << ".\nFailed estimator runs: " << failures_total << '\n';
  return os.str();
}

}  // namespace panelfe
