#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace panelfe {

struct DropLog {
  std::size_t n_obs_dropped = 0;
  std::size_t n_units_dropped = 0;
  std::size_t n_periods_dropped = 0;

  DropLog& operator+=(const DropLog& other) {
    n_obs_dropped += other.n_obs_dropped;
    n_units_dropped += other.n_units_dropped;
    n_periods_dropped += other.n_periods_dropped;
    return *this;
  }
};

// One raw row before indexing.
struct Observation {
  std::string unit;
  long long period = 0;
  double y = 0.0;
  std::vector<double> x;
};

// Long-format binary panel.
//
// Units are densely indexed 0..N-1 in order of first appearance; periods are
// densely indexed 0..T-1 in ascending order of their integer label. Rows are
// stored sorted by (unit, period). Instances are immutable after construction.
class PanelData {
 public:
  PanelData() = default;

  // Throws DuplicateIndex, NonBinaryOutcome, EmptyPanel, MalformedInput.
  PanelData(const std::vector<Observation>& rows, std::vector<std::string> covariate_names);

  std::size_t n_obs() const { return y_.size(); }
  int n_units() const { return static_cast<int>(unit_labels_.size()); }
  int n_periods() const { return static_cast<int>(period_labels_.size()); }
  int n_covariates() const { return static_cast<int>(x_.cols()); }
  // max period label - min period label + 1
  long long t_span() const;

  const std::vector<int>& unit() const { return unit_; }
  const std::vector<int>& period() const { return period_; }
  const std::vector<double>& y() const { return y_; }
  const Eigen::MatrixXd& x() const { return x_; }

  // Row indices of each unit, ascending in period.
  const std::vector<std::vector<int>>& rows_of_unit() const { return rows_of_unit_; }
  // Row indices of each period, ascending in unit.
  const std::vector<std::vector<int>>& rows_of_period() const { return rows_of_period_; }

  const std::string& unit_label(int i) const { return unit_labels_[static_cast<std::size_t>(i)]; }
  long long period_label(int t) const { return period_labels_[static_cast<std::size_t>(t)]; }
  const std::vector<std::string>& unit_labels() const { return unit_labels_; }
  const std::vector<long long>& period_labels() const { return period_labels_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }

  // Per covariate: observed values are a subset of {0,1} and both occur.
  const std::vector<bool>& binary_mask() const { return binary_mask_; }

  const DropLog& drop_log() const { return drop_log_; }

  // Observations per unit (group sizes).
  int min_group_size() const;
  int max_group_size() const;
  double avg_group_size() const;

  // New panel holding the rows with keep[row] == true. Units and periods with no
  // remaining rows disappear; relative order is preserved. The drop log is
  // inherited unchanged.
  PanelData select_rows(const std::vector<bool>& keep) const;

  // Rows whose unit is in `units` and period is in `periods` (dense indices).
  PanelData restrict_to(const std::vector<bool>& units, const std::vector<bool>& periods) const;

  PanelData with_drop_log(DropLog log) const;

  // Row index for (unit, period) or -1 when the cell is not observed.
  int find_row(int unit, int period) const;

 private:
  void build_indices();

  std::vector<std::string> unit_labels_;
  std::vector<long long> period_labels_;
  std::vector<std::string> covariate_names_;
  std::vector<int> unit_;
  std::vector<int> period_;
  std::vector<double> y_;
  Eigen::MatrixXd x_;
  std::vector<std::vector<int>> rows_of_unit_;
  std::vector<std::vector<int>> rows_of_period_;
  std::vector<bool> binary_mask_;
  DropLog drop_log_;
};

// Reads a comma-separated file with a header row. Constant covariate columns
// are rejected. Throws MissingColumn, NonBinaryOutcome, DuplicateIndex,
// EmptyPanel, MalformedInput, ConstantCovariate.
PanelData load_csv(const std::string& path, const std::string& id_col,
                   const std::string& time_col, const std::string& depvar,
                   const std::vector<std::string>& indepvars);

// Same as load_csv but reading from an in-memory document.
PanelData parse_csv(const std::string& text, const std::string& id_col,
                    const std::string& time_col, const std::string& depvar,
                    const std::vector<std::string>& indepvars);

// Removes units (when include_i) and periods (when include_t) whose outcomes
// are all 0 or all 1, iterating to a fixed point. Throws EmptyAfterDrop.
PanelData drop_perfect_classification(const PanelData& panel, bool include_i, bool include_t);

// (t-j, t) period-label pairs for which both periods are observed for `unit`.
std::vector<std::pair<long long, long long>> lag_pairs(const PanelData& panel, int unit, int j);

// Same pairs expressed as row indices (earlier row, later row).
std::vector<std::pair<int, int>> lag_row_pairs(const PanelData& panel, int unit, int j);

}  // namespace panelfe
