#include "panelfe/panel.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "panelfe/error.hpp"

namespace panelfe {

PanelData::PanelData(const std::vector<Observation>& rows, std::vector<std::string> covariate_names)
    : covariate_names_(std::move(covariate_names)) {
  if (rows.empty()) throw Error(ErrorCode::EmptyPanel, "no observations");
  const std::size_t k = covariate_names_.size();

  std::unordered_map<std::string, int> unit_index;
  std::vector<long long> periods;
  periods.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.x.size() != k) throw Error(ErrorCode::MalformedInput, "covariate count mismatch");
    if (r.y != 0.0 && r.y != 1.0) {
      throw Error(ErrorCode::NonBinaryOutcome,
                  "outcome must be 0 or 1 (unit " + r.unit + ", period " + std::to_string(r.period) + ")");
    }
    if (unit_index.emplace(r.unit, static_cast<int>(unit_labels_.size())).second) {
      unit_labels_.push_back(r.unit);
    }
    periods.push_back(r.period);
  }
  std::sort(periods.begin(), periods.end());
  periods.erase(std::unique(periods.begin(), periods.end()), periods.end());
  period_labels_ = periods;

  std::vector<std::pair<std::pair<int, int>, std::size_t>> order;
  order.reserve(rows.size());
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const int i = unit_index.at(rows[n].unit);
    const int t = static_cast<int>(std::lower_bound(periods.begin(), periods.end(), rows[n].period) -
                                   periods.begin());
    order.push_back({{i, t}, n});
  }
  std::sort(order.begin(), order.end());
  for (std::size_t n = 1; n < order.size(); ++n) {
    if (order[n].first == order[n - 1].first) {
      const auto& r = rows[order[n].second];
      throw Error(ErrorCode::DuplicateIndex,
                  "duplicate (unit, period) = (" + r.unit + ", " + std::to_string(r.period) + ")");
    }
  }

  unit_.resize(order.size());
  period_.resize(order.size());
  y_.resize(order.size());
  x_.resize(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(k));
  for (std::size_t n = 0; n < order.size(); ++n) {
    const auto& r = rows[order[n].second];
    unit_[n] = order[n].first.first;
    period_[n] = order[n].first.second;
    y_[n] = r.y;
    for (std::size_t c = 0; c < k; ++c) x_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)) = r.x[c];
  }
  build_indices();
}

void PanelData::build_indices() {
  rows_of_unit_.assign(unit_labels_.size(), {});
  rows_of_period_.assign(period_labels_.size(), {});
  for (std::size_t n = 0; n < y_.size(); ++n) {
    rows_of_unit_[static_cast<std::size_t>(unit_[n])].push_back(static_cast<int>(n));
    rows_of_period_[static_cast<std::size_t>(period_[n])].push_back(static_cast<int>(n));
  }
  binary_mask_.assign(static_cast<std::size_t>(x_.cols()), false);
  for (Eigen::Index c = 0; c < x_.cols(); ++c) {
    bool only01 = true, has0 = false, has1 = false;
    for (Eigen::Index n = 0; n < x_.rows(); ++n) {
      const double v = x_(n, c);
      if (v == 0.0) has0 = true;
      else if (v == 1.0) has1 = true;
      else { only01 = false; break; }
    }
    binary_mask_[static_cast<std::size_t>(c)] = only01 && has0 && has1;
  }
}

long long PanelData::t_span() const {
  if (period_labels_.empty()) return 0;
  return period_labels_.back() - period_labels_.front() + 1;
}

int PanelData::min_group_size() const {
  int m = rows_of_unit_.empty() ? 0 : static_cast<int>(rows_of_unit_.front().size());
  for (const auto& r : rows_of_unit_) m = std::min(m, static_cast<int>(r.size()));
  return m;
}

int PanelData::max_group_size() const {
  int m = 0;
  for (const auto& r : rows_of_unit_) m = std::max(m, static_cast<int>(r.size()));
  return m;
}

double PanelData::avg_group_size() const {
  return unit_labels_.empty() ? 0.0 : static_cast<double>(n_obs()) / static_cast<double>(n_units());
}

PanelData PanelData::select_rows(const std::vector<bool>& keep) const {
  PanelData out;
  out.covariate_names_ = covariate_names_;
  out.drop_log_ = drop_log_;

  std::vector<int> unit_map(unit_labels_.size(), -1), period_map(period_labels_.size(), -1);
  for (std::size_t n = 0; n < y_.size(); ++n) {
    if (!keep[n]) continue;
    unit_map[static_cast<std::size_t>(unit_[n])] = 0;
    period_map[static_cast<std::size_t>(period_[n])] = 0;
  }
  for (std::size_t i = 0; i < unit_map.size(); ++i) {
    if (unit_map[i] == 0) {
      unit_map[i] = static_cast<int>(out.unit_labels_.size());
      out.unit_labels_.push_back(unit_labels_[i]);
    }
  }
  for (std::size_t t = 0; t < period_map.size(); ++t) {
    if (period_map[t] == 0) {
      period_map[t] = static_cast<int>(out.period_labels_.size());
      out.period_labels_.push_back(period_labels_[t]);
    }
  }
  const auto kept = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  out.unit_.reserve(kept);
  out.period_.reserve(kept);
  out.y_.reserve(kept);
  out.x_.resize(static_cast<Eigen::Index>(kept), x_.cols());
  Eigen::Index row = 0;
  for (std::size_t n = 0; n < y_.size(); ++n) {
    if (!keep[n]) continue;
    out.unit_.push_back(unit_map[static_cast<std::size_t>(unit_[n])]);
    out.period_.push_back(period_map[static_cast<std::size_t>(period_[n])]);
    out.y_.push_back(y_[n]);
    out.x_.row(row++) = x_.row(static_cast<Eigen::Index>(n));
  }
  out.build_indices();
  return out;
}

PanelData PanelData::restrict_to(const std::vector<bool>& units, const std::vector<bool>& periods) const {
  std::vector<bool> keep(y_.size());
  for (std::size_t n = 0; n < y_.size(); ++n) {
    keep[n] = units[static_cast<std::size_t>(unit_[n])] && periods[static_cast<std::size_t>(period_[n])];
  }
  return select_rows(keep);
}

PanelData PanelData::with_drop_log(DropLog log) const {
  PanelData out = *this;
  out.drop_log_ = log;
  return out;
}

int PanelData::find_row(int unit, int period) const {
  const auto& rows = rows_of_unit_[static_cast<std::size_t>(unit)];
  auto it = std::lower_bound(rows.begin(), rows.end(), period,
                             [this](int row, int p) { return period_[static_cast<std::size_t>(row)] < p; });
  if (it != rows.end() && period_[static_cast<std::size_t>(*it)] == period) return *it;
  return -1;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = (b == std::string::npos) ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::MalformedInput,
                "line " + std::to_string(line_no) + ": column '" + column + "' is not numeric: '" + s + "'");
  }
  return v;
}

long long parse_period(const std::string& s, std::size_t line_no, const std::string& column) {
  const double v = parse_double(s, line_no, column);
  const auto p = static_cast<long long>(v);
  if (static_cast<double>(p) != v) {
    throw Error(ErrorCode::MalformedInput,
                "line " + std::to_string(line_no) + ": time column '" + column + "' must be integer-valued");
  }
  return p;
}

}  // namespace

PanelData parse_csv(const std::string& text, const std::string& id_col, const std::string& time_col,
                    const std::string& depvar, const std::vector<std::string>& indepvars) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyPanel, "missing header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // BOM
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_c = column(id_col), time_c = column(time_col), y_c = column(depvar);
  std::vector<std::size_t> x_c;
  for (const auto& v : indepvars) x_c.push_back(column(v));
  if (indepvars.empty()) throw Error(ErrorCode::MalformedInput, "at least one covariate is required");

  std::vector<Observation> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line_no) + ": expected " +
                                                 std::to_string(header.size()) + " fields, got " +
                                                 std::to_string(f.size()));
    }
    Observation obs;
    obs.unit = f[id_c];
    if (obs.unit.empty()) throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line_no) + ": empty id");
    obs.period = parse_period(f[time_c], line_no, time_col);
    if (f[y_c].empty()) throw Error(ErrorCode::MalformedInput, "line " + std::to_string(line_no) + ": missing outcome");
    obs.y = parse_double(f[y_c], line_no, depvar);
    if (obs.y != 0.0 && obs.y != 1.0) {
      throw Error(ErrorCode::NonBinaryOutcome, "line " + std::to_string(line_no) + ": outcome '" + f[y_c] +
                                                   "' is not 0 or 1");
    }
    obs.x.reserve(x_c.size());
    for (std::size_t c = 0; c < x_c.size(); ++c) {
      if (f[x_c[c]].empty()) {
        throw Error(ErrorCode::MalformedInput,
                    "line " + std::to_string(line_no) + ": missing value for '" + indepvars[c] + "'");
      }
      obs.x.push_back(parse_double(f[x_c[c]], line_no, indepvars[c]));
    }
    rows.push_back(std::move(obs));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyPanel, "no data rows");

  PanelData panel(rows, indepvars);
  for (int c = 0; c < panel.n_covariates(); ++c) {
    const auto col = panel.x().col(c);
    if (col.maxCoeff() == col.minCoeff()) {
      throw Error(ErrorCode::ConstantCovariate,
                  "covariate '" + indepvars[static_cast<std::size_t>(c)] +
                      "' is constant; fixed effects already absorb the intercept");
    }
  }
  return panel;
}

PanelData load_csv(const std::string& path, const std::string& id_col, const std::string& time_col,
                   const std::string& depvar, const std::vector<std::string>& indepvars) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), id_col, time_col, depvar, indepvars);
}

PanelData drop_perfect_classification(const PanelData& panel, bool include_i, bool include_t) {
  std::vector<bool> keep(panel.n_obs(), true);
  std::vector<bool> unit_gone(static_cast<std::size_t>(panel.n_units()), false);
  std::vector<bool> period_gone(static_cast<std::size_t>(panel.n_periods()), false);
  const auto& y = panel.y();

  // Returns true when the live rows of the group are all 0 or all 1.
  auto degenerate = [&](const std::vector<int>& rows) {
    bool any = false, has0 = false, has1 = false;
    for (int r : rows) {
      if (!keep[static_cast<std::size_t>(r)]) continue;
      any = true;
      (y[static_cast<std::size_t>(r)] == 1.0 ? has1 : has0) = true;
    }
    return any && !(has0 && has1);
  };
  auto remove = [&](const std::vector<int>& rows) {
    for (int r : rows) keep[static_cast<std::size_t>(r)] = false;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    if (include_i) {
      for (int i = 0; i < panel.n_units(); ++i) {
        const auto si = static_cast<std::size_t>(i);
        if (unit_gone[si]) continue;
        if (degenerate(panel.rows_of_unit()[si])) {
          remove(panel.rows_of_unit()[si]);
          unit_gone[si] = true;
          changed = true;
        }
      }
    }
    if (include_t) {
      for (int t = 0; t < panel.n_periods(); ++t) {
        const auto st = static_cast<std::size_t>(t);
        if (period_gone[st]) continue;
        if (degenerate(panel.rows_of_period()[st])) {
          remove(panel.rows_of_period()[st]);
          period_gone[st] = true;
          changed = true;
        }
      }
    }
  }

  const auto kept = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  if (kept == 0) throw Error(ErrorCode::EmptyAfterDrop, "all observations are perfectly classified");
  PanelData out = panel.select_rows(keep);
  DropLog log = panel.drop_log();
  log.n_obs_dropped += panel.n_obs() - kept;
  log.n_units_dropped += static_cast<std::size_t>(panel.n_units() - out.n_units());
  log.n_periods_dropped += static_cast<std::size_t>(panel.n_periods() - out.n_periods());
  return out.with_drop_log(log);
}

std::vector<std::pair<int, int>> lag_row_pairs(const PanelData& panel, int unit, int j) {
  std::vector<std::pair<int, int>> pairs;
  if (j < 1) return pairs;
  const auto& rows = panel.rows_of_unit()[static_cast<std::size_t>(unit)];
  // rows are ascending in period; two-pointer walk over labels.
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < rows.size(); ++hi) {
    const long long target = panel.period_label(panel.period()[static_cast<std::size_t>(rows[hi])]) - j;
    while (lo < hi && panel.period_label(panel.period()[static_cast<std::size_t>(rows[lo])]) < target) ++lo;
    if (lo < hi && panel.period_label(panel.period()[static_cast<std::size_t>(rows[lo])]) == target) {
      pairs.emplace_back(rows[lo], rows[hi]);
    }
  }
  return pairs;
}

std::vector<std::pair<long long, long long>> lag_pairs(const PanelData& panel, int unit, int j) {
  std::vector<std::pair<long long, long long>> out;
  for (auto [a, b] : lag_row_pairs(panel, unit, j)) {
    out.emplace_back(panel.period_label(panel.period()[static_cast<std::size_t>(a)]),
                     panel.period_label(panel.period()[static_cast<std::size_t>(b)]));
  }
  return out;
}

}  // namespace panelfe
