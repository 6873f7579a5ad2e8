#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panelfe/links.hpp"

namespace panelfe {

enum class Correction { None, Analytical, Jackknife };
enum class JackknifeVariant { SS1, SS2, JS, SJ, JJ, Double };
enum class PartitionDim { Individuals, Time, Both };

std::string_view to_string(Correction c);
std::string_view to_string(JackknifeVariant v);
std::string_view to_string(PartitionDim d);
std::optional<JackknifeVariant> parse_jackknife_variant(std::string_view s);
std::optional<PartitionDim> parse_partition_dim(std::string_view s);

// Which incidental-parameter blocks enter the index.
enum class EffectMode { Individual, Time, Both };

struct ModelSpec {
  Family family = Family::Logit;
  bool include_ieffects = true;
  bool include_teffects = true;
  Correction correction = Correction::None;
  int lags = 0;
  JackknifeVariant jk_variant = JackknifeVariant::SS2;
  int multiple = 0;
  PartitionDim multiple_dim = PartitionDim::Both;
  bool ibias = true;
  bool tbias = true;
  std::optional<long long> population;  // nullopt: infinite population
  std::uint64_t seed = 0;
  std::vector<std::string> force_binary;
  std::vector<std::string> force_continuous;

  EffectMode effect_mode() const;
  // Throws InvalidOption.
  void validate() const;

  bool operator==(const ModelSpec&) const = default;
};

}  // namespace panelfe
