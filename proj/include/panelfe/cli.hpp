#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "panelfe/model.hpp"
#include "panelfe/pipeline.hpp"
#include "panelfe/results.hpp"

namespace panelfe {

// Parsed `fit` invocation.
struct FitRequest {
  ModelSpec spec;
  std::string data;
  std::string id;
  std::string time;
  std::string depvar;
  std::vector<std::string> indepvars;
  std::optional<std::string> emulate;  // probitfe | logitfe
  std::optional<int> lags_range;
  int jobs = 1;
  std::optional<std::string> out;
  std::optional<std::string> export_effects;
};

// Parses the arguments after `fit`. Throws Error(InvalidOption) on usage errors.
FitRequest parse_fit_args(const std::vector<std::string>& args);

// Flags that parse back to `spec` (data flags excluded).
std::vector<std::string> spec_to_flags(const ModelSpec& spec);

SavedResults build_saved_results(const FitRequest& request, const BaseFit& base, const Corrected& corrected,
                                 const std::string& cmdline);

// Entry point: args[0] is the program name. Returns 0 on success, 1 on
// estimation errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace panelfe
