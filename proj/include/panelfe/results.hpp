#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace panelfe {

struct NamedMatrix {
  std::string name;
  std::vector<std::string> rownames;
  std::vector<std::string> colnames;
  Eigen::MatrixXd values;
};

// Scalars, macros and matrices of a fit, kept in insertion order.
struct SavedResults {
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::pair<std::string, std::string>> macros;
  std::vector<NamedMatrix> matrices;

  const double* scalar(const std::string& name) const;
  const std::string* macro(const std::string& name) const;
  const NamedMatrix* matrix(const std::string& name) const;
};

// Shortest decimal that reads back to the same double.
std::string format_double(double v);

// Line-oriented text:
//   scalar <name> <value>
//   macro <name> <text to end of line>
//   matrix <name> <rows> <cols>
//   rownames ... / colnames ... / one line of values per row
std::string write_saved_results(const SavedResults& results);

// Throws MalformedInput.
SavedResults parse_saved_results(const std::string& text);

}  // namespace panelfe
