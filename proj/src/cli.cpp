#include "panelfe/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "panelfe/error.hpp"
#include "panelfe/inference.hpp"
#include "panelfe/montecarlo.hpp"

namespace panelfe {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(s);
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t"));
    cell.erase(cell.find_last_not_of(" \t") + 1);
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

bool yes_no(const std::string& flag, const std::string& value) {
  if (value == "yes") return true;
  if (value == "no") return false;
  throw Error(ErrorCode::InvalidOption, flag + " takes yes or no, got '" + value + "'");
}

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorCode::InvalidOption, msg); }

// Thrown for --help with the formatted option list.
struct HelpRequested {
  std::string text;
};

// CLI11 parses vectors in reverse order.
void parse_app(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  }
}

std::string quote_arg(const std::string& a) {
  if (!a.empty() && a.find_first_of(" \t\"'") == std::string::npos) return a;
  std::string q = "\"";
  for (char c : a) {
    if (c == '"' || c == '\\') q += '\\';
    q += c;
  }
  return q + '"';
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("PANELFE_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (s[used] != '\0') usage("PANELFE_SEED is not an integer");
    return v;
  } catch (const std::logic_error&) {
    usage("PANELFE_SEED is not an integer");
  }
}

std::string cmd_name(Family f) { return f == Family::Probit ? "probitfe" : "logitfe"; }

std::string effects_title(const ModelSpec& spec) {
  switch (spec.effect_mode()) {
    case EffectMode::Both: return "Individual and time effects";
    case EffectMode::Individual: return "Individual effects";
    case EffectMode::Time: return "Time effects";
  }
  return "";
}

std::string correction_title(const ModelSpec& spec) {
  std::string t;
  switch (spec.correction) {
    case Correction::None: return "No correction";
    case Correction::Analytical: t = "Analytical correction"; break;
    case Correction::Jackknife: t = "Jackknife correction (" + std::string(to_string(spec.jk_variant)) + ")"; break;
  }
  if (spec.include_ieffects && spec.include_teffects && !(spec.ibias && spec.tbias)) {
    t += spec.ibias ? ", individual-effect bias only" : ", time-effect bias only";
  }
  return t;
}

std::string parameter_title(const ModelSpec& spec) {
  if (spec.correction == Correction::Analytical) return "Trimming parameter L = " + std::to_string(spec.lags);
  if (spec.correction == Correction::Jackknife &&
      (spec.jk_variant == JackknifeVariant::SS1 || spec.jk_variant == JackknifeVariant::SS2)) {
    return "Multiple partitions = " + std::to_string(spec.multiple) + " (" + std::string(to_string(spec.multiple_dim)) +
           ")";
  }
  return "";
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string pad_name(std::string s, std::size_t w) {
  if (s.size() > w) s = s.substr(0, w - 1) + "~";
  return std::string(w - s.size(), ' ') + s;
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

void print_report(std::ostream& os, const FitRequest& req, const BaseFit& base, const Corrected& c,
                  const SavedResults& saved) {
  const ModelSpec& spec = req.spec;
  const auto& names = base.panel.covariate_names();
  const std::string title = *saved.macro("title");
  os << '\n' << title << '\n';
  os << *saved.macro("title1") << '\n' << *saved.macro("title2") << '\n';
  if (!saved.macro("title3")->empty()) os << *saved.macro("title3") << '\n';
  os << '\n';
  auto line = [&](const std::string& k, const std::string& v) {
    os << "  " << k << std::string(k.size() < 30 ? 30 - k.size() : 1, ' ') << "= " << v << '\n';
  };
  line("Number of obs", std::to_string(base.panel.n_obs()));
  line("Number of groups", std::to_string(base.panel.n_units()));
  line("Number of periods", std::to_string(base.panel.n_periods()));
  line("Obs per group: min", std::to_string(base.panel.min_group_size()));
  line("               avg", fmt("%.1f", base.panel.avg_group_size()));
  line("               max", std::to_string(base.panel.max_group_size()));
  const DropLog& d = base.panel.drop_log();
  if (d.n_obs_dropped > 0) {
    line("Obs dropped (all 0 or all 1)", std::to_string(d.n_obs_dropped));
    line("  groups dropped", std::to_string(d.n_units_dropped));
    line("  periods dropped", std::to_string(d.n_periods_dropped));
  }
  line("LR chi2(" + std::to_string(names.size()) + ")", fmt("%.2f", base.stats.lr_chi2));
  line("Prob > chi2", fmt("%.4f", base.stats.p_value));
  line("Log likelihood", fmt("%.4f", base.fit.loglik));
  line("Pseudo R2", fmt("%.4f", base.stats.pseudo_r2));
  if (c.jackknife) {
    line("Jackknife subpanel fits", std::to_string(c.jackknife->subpanels));
    if (c.jackknife->drops.n_obs_dropped > 0) {
      line("Subpanel obs dropped (total)", std::to_string(c.jackknife->drops.n_obs_dropped));
    }
  }
  os << '\n';

  const std::string rule(78, '-');
  os << rule << '\n'
     << pad_name(req.depvar, 13) << " |      Coef.   Std. Err.      z    P>|z|     [95% Conf. Interval]\n"
     << std::string(14, '-') << '+' << std::string(63, '-') << '\n';
  const Eigen::VectorXd se = base.vcov_beta.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double z = c.beta(i) / se(i);
    os << pad_name(names[k], 13) << " | " << fmt("%10.6g", c.beta(i)) << "  " << fmt("%10.6g", se(i)) << ' '
       << fmt("%7.2f", z) << "   " << fmt("%6.3f", normal_two_sided_p(z)) << "    "
       << fmt("%10.6g", c.beta(i) - kCriticalValue95 * se(i)) << "  "
       << fmt("%10.6g", c.beta(i) + kCriticalValue95 * se(i)) << '\n';
  }
  os << rule << "\n\n";

  os << "Average partial effects\n" << rule << '\n'
     << pad_name("", 13) << " |      dy/dx   Std. Err.      z    P>|z|   Std. Err. (fpc=1)\n"
     << std::string(14, '-') << '+' << std::string(63, '-') << '\n';
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double s = base.ape.se(i);
    const double z = s > 0.0 ? c.delta(i) / s : NAN;
    os << pad_name(names[k], 13) << " | " << fmt("%10.6g", c.delta(i)) << "  " << fmt("%10.6g", s) << ' '
       << fmt("%7.2f", z) << "   " << fmt("%6.3f", s > 0.0 ? normal_two_sided_p(z) : NAN) << "   "
       << fmt("%10.6g", base.ape.se_infinite(i)) << (base.binary[k] ? "   (discrete change)" : "") << '\n';
  }
  os << rule << '\n';
  os << "fpc = " << fmt("%.6g", base.ape.fpc) << (spec.population ? "" : " (infinite population)") << '\n';
  if (base.ape.clamped > 0) {
    os << "warning: " << base.ape.clamped << " negative APE variance entries clamped at zero\n";
  }
}

void print_lags_range(std::ostream& os, const FitRequest& req, const BaseFit& base) {
  const auto& names = base.panel.covariate_names();
  os << "\nAnalytical correction by trimming parameter\n";
  os << std::setw(4) << "L";
  for (const auto& n : names) os << ' ' << pad_name("b:" + n, 13);
  for (const auto& n : names) os << ' ' << pad_name("ape:" + n, 13);
  os << '\n';
  for (int l = 0; l <= *req.lags_range; ++l) {
    ModelSpec s = req.spec;
    s.correction = Correction::Analytical;
    s.lags = l;
    const Corrected c = apply_correction(base, s, req.jobs);
    os << std::setw(4) << l;
    for (Eigen::Index k = 0; k < c.beta.size(); ++k) os << ' ' << fmt("%13.6g", c.beta(k));
    for (Eigen::Index k = 0; k < c.delta.size(); ++k) os << ' ' << fmt("%13.6g", c.delta(k));
    os << '\n';
  }
}

void export_effects(const std::string& path, const FitRequest& req, const BaseFit& base) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::MalformedInput, "cannot write '" + path + "'");
  const PanelData& p = base.panel;
  f << "# beta ";
  for (Eigen::Index k = 0; k < base.fit.beta.size(); ++k) f << (k ? "," : "") << format_double(base.fit.beta(k));
  f << '\n' << req.id << ',' << req.time;
  for (const auto& n : p.covariate_names()) f << ',' << n;
  f << ",alpha,gamma\n";
  for (std::size_t r = 0; r < p.n_obs(); ++r) {
    const int u = p.unit()[r];
    const int t = p.period()[r];
    f << p.unit_label(u) << ',' << p.period_label(t);
    for (Eigen::Index k = 0; k < p.x().cols(); ++k) f << ',' << format_double(p.x()(static_cast<Eigen::Index>(r), k));
    f << ',' << format_double(base.fit.alpha(u)) << ',' << format_double(base.fit.gamma(t)) << '\n';
  }
}

int run_fit(const std::vector<std::string>& args, const std::string& cmdline, std::ostream& out) {
  const FitRequest req = parse_fit_args(args);
  const PanelData raw = load_csv(req.data, req.id, req.time, req.depvar, req.indepvars);
  const BaseFit base = fit_base(raw, req.spec);
  const Corrected corrected = apply_correction(base, req.spec, req.jobs);
  const SavedResults saved = build_saved_results(req, base, corrected, cmdline);
  print_report(out, req, base, corrected, saved);
  if (req.lags_range) print_lags_range(out, req, base);
  if (req.out) {
    std::ofstream f(*req.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::MalformedInput, "cannot write '" + *req.out + "'");
    f << write_saved_results(saved);
  }
  if (req.export_effects) export_effects(*req.export_effects, req, base);
  return 0;
}

int run_simulate(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Monte Carlo study of the fixed effects estimators", "panelfe simulate"};
  std::string design = "synthetic";
  std::string sizes = "25,50,75,100,157";
  std::string estimators = "fe,an0,ss2,double";
  int reps = 500;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_path;
  app.add_option("--design", design, "synthetic or calibrated:<path>");
  app.add_option("--sizes", sizes, "comma separated sample sizes");
  app.add_option("--reps", reps, "replications per size");
  app.add_option("--estimators", estimators, "fe, anL, ss1, ss2, js, sj, jj, double");
  auto* seed_opt = app.add_option("--seed", seed, "base seed");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "CSV output path");
  parse_app(app, args);

  if (seed_opt->count() == 0) {
    if (auto s = env_seed()) seed = *s;
  }
  StudyOptions opts;
  opts.sizes.clear();
  for (const auto& s : split_list(sizes)) {
    try {
      opts.sizes.push_back(std::stoi(s));
    } catch (const std::logic_error&) {
      usage("--sizes: '" + s + "' is not an integer");
    }
  }
  opts.estimators = split_list(estimators);
  if (opts.estimators.empty()) usage("--estimators is empty");
  for (const auto& e : opts.estimators) estimator_spec(e, Family::Logit);
  opts.reps = reps;
  opts.seed = seed;
  opts.jobs = jobs;

  SimDesign d;
  if (design == "synthetic") {
    d = synthetic_design(seed);
  } else if (design.rfind("calibrated:", 0) == 0) {
    d = calibrated_design(design.substr(11));
  } else {
    usage("--design must be synthetic or calibrated:<path>");
  }
  const auto rows = run_study(d, opts);
  out << metrics_table(rows);
  const std::string csv = metrics_csv(rows);
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw Error(ErrorCode::MalformedInput, "cannot write '" + out_path + "'");
    f << csv;
  } else {
    out << '\n' << csv;
  }
  return 0;
}

}  // namespace

FitRequest parse_fit_args(const std::vector<std::string>& args) {
  CLI::App app{"Probit and logit with fixed effects and bias corrections", "panelfe fit"};
  FitRequest req;
  std::string family, emulate, jk_variant, multiple_dim, indepvars, force_binary, force_continuous;
  std::string ieffects = "yes", teffects = "yes", ibias = "yes", tbias = "yes";
  bool noc = false, an = false, jack = false;
  int lags = 0, lags_range = -1, multiple = 0;
  long long population = 0;
  std::uint64_t seed = 0;

  auto* o_family = app.add_option("--family", family, "probit or logit");
  auto* o_emulate = app.add_option("--emulate", emulate, "probitfe or logitfe");
  app.add_flag("--nocorrection", noc, "uncorrected estimator");
  app.add_flag("--analytical", an, "analytical bias correction (default)");
  app.add_flag("--jackknife", jack, "jackknife bias correction");
  auto* o_variant = app.add_option("--jk-variant", jk_variant, "ss1, ss2 (default), js, sj, jj, double");
  auto* o_lags = app.add_option("--lags", lags, "trimming parameter L");
  auto* o_lags_range = app.add_option("--lags-range", lags_range, "also report L = 0..Lmax");
  auto* o_multiple = app.add_option("--multiple", multiple, "random partitions for ss1/ss2");
  auto* o_mdim = app.add_option("--multiple-dim", multiple_dim, "individuals, time or both");
  app.add_option("--ieffects", ieffects, "yes or no");
  app.add_option("--teffects", teffects, "yes or no");
  auto* o_ibias = app.add_option("--ibias", ibias, "yes or no");
  auto* o_tbias = app.add_option("--tbias", tbias, "yes or no");
  app.add_option("--data", req.data, "CSV file")->required();
  app.add_option("--id", req.id, "cross-section column")->required();
  app.add_option("--time", req.time, "time column")->required();
  app.add_option("--depvar", req.depvar, "binary outcome column")->required();
  app.add_option("--indepvars", indepvars, "comma separated covariates")->required();
  auto* o_pop = app.add_option("--population", population, "population size M for the APE fpc");
  app.add_option("--force-binary", force_binary, "covariates treated as binary");
  app.add_option("--force-continuous", force_continuous, "covariates treated as continuous");
  auto* o_seed = app.add_option("--seed", seed, "seed for random partitions");
  app.add_option("--jobs", req.jobs, "worker threads")->check(CLI::PositiveNumber);
  auto* o_out = app.add_option("--out", "structured results path");
  auto* o_export = app.add_option("--export-effects", "per-observation covariates and effects CSV");
  parse_app(app, args);

  ModelSpec& spec = req.spec;
  if (o_emulate->count()) {
    if (emulate == "probitfe") {
      spec.family = Family::Probit;
    } else if (emulate == "logitfe") {
      spec.family = Family::Logit;
    } else {
      usage("--emulate takes probitfe or logitfe");
    }
    req.emulate = emulate;
  }
  if (o_family->count()) {
    Family f;
    if (family == "probit") {
      f = Family::Probit;
    } else if (family == "logit") {
      f = Family::Logit;
    } else {
      usage("--family takes probit or logit");
    }
    if (req.emulate && f != spec.family) usage("--family conflicts with --emulate");
    spec.family = f;
  }

  if (static_cast<int>(noc) + static_cast<int>(an) + static_cast<int>(jack) > 1) {
    usage("--nocorrection, --analytical and --jackknife are mutually exclusive");
  }
  spec.correction = noc ? Correction::None : jack ? Correction::Jackknife : Correction::Analytical;

  if (o_variant->count()) {
    if (spec.correction != Correction::Jackknife) usage("--jk-variant requires --jackknife");
    auto v = parse_jackknife_variant(jk_variant);
    if (!v) usage("--jk-variant: unknown variant '" + jk_variant + "'");
    spec.jk_variant = *v;
  }
  const bool split = spec.jk_variant == JackknifeVariant::SS1 || spec.jk_variant == JackknifeVariant::SS2;
  if (o_multiple->count()) {
    if (spec.correction != Correction::Jackknife || !split) usage("--multiple requires --jackknife with ss1 or ss2");
    if (multiple < 0) usage("--multiple must be nonnegative");
    spec.multiple = multiple;
  }
  if (o_mdim->count()) {
    if (!o_multiple->count()) usage("--multiple-dim requires --multiple");
    auto dim = parse_partition_dim(multiple_dim);
    if (!dim) usage("--multiple-dim takes individuals, time or both");
    spec.multiple_dim = *dim;
  }
  if (o_lags->count()) {
    if (spec.correction != Correction::Analytical) usage("--lags requires the analytical correction");
    if (lags < 0) usage("--lags must be nonnegative");
    spec.lags = lags;
  }
  if (o_lags_range->count()) {
    if (spec.correction != Correction::Analytical) usage("--lags-range requires the analytical correction");
    if (lags_range < 0) usage("--lags-range must be nonnegative");
    req.lags_range = lags_range;
  }

  spec.include_ieffects = yes_no("--ieffects", ieffects);
  spec.include_teffects = yes_no("--teffects", teffects);
  if (!spec.include_ieffects && !spec.include_teffects) usage("--ieffects no together with --teffects no is invalid");
  if ((o_ibias->count() || o_tbias->count()) && spec.correction == Correction::None) {
    usage("--ibias/--tbias require a bias correction");
  }
  spec.ibias = yes_no("--ibias", ibias);
  spec.tbias = yes_no("--tbias", tbias);
  if (!spec.ibias && !spec.tbias) usage("--ibias no together with --tbias no is invalid");
  if (o_ibias->count() && !spec.include_ieffects) usage("--ibias requires individual effects");
  if (o_tbias->count() && !spec.include_teffects) usage("--tbias requires time effects");

  if (o_pop->count()) {
    if (population < 1) usage("--population must be positive");
    spec.population = population;
  }
  spec.force_binary = split_list(force_binary);
  spec.force_continuous = split_list(force_continuous);
  if (o_seed->count()) {
    spec.seed = seed;
  } else if (auto s = env_seed()) {
    spec.seed = *s;
  }
  req.indepvars = split_list(indepvars);
  if (req.indepvars.empty()) usage("--indepvars is empty");
  if (o_out->count()) req.out = o_out->as<std::string>();
  if (o_export->count()) req.export_effects = o_export->as<std::string>();
  spec.validate();
  return req;
}

std::vector<std::string> spec_to_flags(const ModelSpec& spec) {
  std::vector<std::string> f{"--family", spec.family == Family::Probit ? "probit" : "logit"};
  switch (spec.correction) {
    case Correction::None: f.emplace_back("--nocorrection"); break;
    case Correction::Analytical:
      f.insert(f.end(), {"--analytical", "--lags", std::to_string(spec.lags)});
      break;
    case Correction::Jackknife: {
      f.insert(f.end(), {"--jackknife", "--jk-variant", std::string(to_string(spec.jk_variant))});
      if (spec.jk_variant == JackknifeVariant::SS1 || spec.jk_variant == JackknifeVariant::SS2) {
        f.insert(f.end(), {"--multiple", std::to_string(spec.multiple), "--multiple-dim",
                           std::string(to_string(spec.multiple_dim))});
      }
      break;
    }
  }
  f.insert(f.end(), {"--ieffects", spec.include_ieffects ? "yes" : "no", "--teffects",
                     spec.include_teffects ? "yes" : "no"});
  if (spec.correction != Correction::None) {
    if (spec.include_ieffects) f.insert(f.end(), {"--ibias", spec.ibias ? "yes" : "no"});
    if (spec.include_teffects) f.insert(f.end(), {"--tbias", spec.tbias ? "yes" : "no"});
  }
  if (spec.population) f.insert(f.end(), {"--population", std::to_string(*spec.population)});
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
  };
  if (!spec.force_binary.empty()) f.insert(f.end(), {"--force-binary", join(spec.force_binary)});
  if (!spec.force_continuous.empty()) f.insert(f.end(), {"--force-continuous", join(spec.force_continuous)});
  f.insert(f.end(), {"--seed", std::to_string(spec.seed)});
  return f;
}

SavedResults build_saved_results(const FitRequest& req, const BaseFit& base, const Corrected& c,
                                 const std::string& cmdline) {
  const PanelData& p = base.panel;
  const ModelSpec& spec = req.spec;
  const auto& names = p.covariate_names();
  const double k = static_cast<double>(names.size());
  SavedResults s;
  s.scalars = {
      {"N", static_cast<double>(p.n_obs())},
      {"N_drop", static_cast<double>(p.drop_log().n_obs_dropped)},
      {"N_group_drop", static_cast<double>(p.drop_log().n_units_dropped)},
      {"N_time_drop", static_cast<double>(p.drop_log().n_periods_dropped)},
      {"N_group", static_cast<double>(p.n_units())},
      {"T_min", static_cast<double>(p.min_group_size())},
      {"T_avg", p.avg_group_size()},
      {"T_max", static_cast<double>(p.max_group_size())},
      {"k", k},
      {"df_m", k},
      {"r2_p", base.stats.pseudo_r2},
      {"chi2", base.stats.lr_chi2},
      {"p", base.stats.p_value},
      {"ll", base.fit.loglik},
      {"ll_0", base.fit.loglik_null},
      {"fpc", base.ape.fpc},
      {"rankV", static_cast<double>(numerical_rank(base.vcov_beta))},
      {"rankV2", static_cast<double>(numerical_rank(base.ape.vcov))},
  };
  std::string title;
  if (req.emulate) {
    title = spec.family == Family::Probit ? "Probit regression" : "Logit regression";
  } else {
    title = spec.family == Family::Probit ? "Fixed effects probit" : "Fixed effects logit";
  }
  s.macros = {
      {"cmd", cmd_name(spec.family)},
      {"cmdline", cmdline},
      {"depvar", req.depvar},
      {"title", title},
      {"title1", effects_title(spec)},
      {"title2", correction_title(spec)},
      {"title3", parameter_title(spec)},
      {"chi2type", "LR"},
      {"properties", "b V"},
      {"id", req.id},
      {"time", req.time},
  };
  const std::vector<std::string> row{req.depvar};
  s.matrices.push_back({"b", row, names, c.beta.transpose()});
  s.matrices.push_back({"V", names, names, base.vcov_beta});
  s.matrices.push_back({"b2", row, names, c.delta.transpose()});
  s.matrices.push_back({"V2", names, names, base.ape.vcov});
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::string help =
      "usage: panelfe <fit|simulate> [options]\n"
      "  fit       estimate a probit or logit model with fixed effects\n"
      "  simulate  Monte Carlo study\n"
      "Run 'panelfe <command> --help' for the options of a command.\n";
  if (args.size() < 2) {
    err << help;
    return 2;
  }
  const std::string& cmd = args[1];
  if (cmd == "--help" || cmd == "-h") {
    out << help;
    return 0;
  }
  const std::vector<std::string> rest(args.begin() + 2, args.end());
  // --jobs changes nothing in the results, so it is left out of the record.
  std::string cmdline = "panelfe";
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--jobs") {
      ++i;
      continue;
    }
    if (args[i].rfind("--jobs=", 0) == 0) continue;
    cmdline += ' ' + quote_arg(args[i]);
  }
  try {
    if (cmd == "fit") return run_fit(rest, cmdline, out);
    if (cmd == "simulate") return run_simulate(rest, out);
    err << "panelfe: unknown command '" << cmd << "'\n" << help;
    return 2;
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "panelfe " << cmd << ": " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "panelfe " << cmd << ": " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidOption ? 2 : 1;
  } catch (const std::exception& e) {
    err << "panelfe " << cmd << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace panelfe
