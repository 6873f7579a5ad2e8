#include "panelfe/model.hpp"

#include "panelfe/error.hpp"

namespace panelfe {

std::string_view to_string(Correction c) {
  switch (c) {
    case Correction::None: return "none";
    case Correction::Analytical: return "analytical";
    case Correction::Jackknife: return "jackknife";
  }
  return "none";
}

std::string_view to_string(JackknifeVariant v) {
  switch (v) {
    case JackknifeVariant::SS1: return "ss1";
    case JackknifeVariant::SS2: return "ss2";
    case JackknifeVariant::JS: return "js";
    case JackknifeVariant::SJ: return "sj";
    case JackknifeVariant::JJ: return "jj";
    case JackknifeVariant::Double: return "double";
  }
  return "ss2";
}

std::string_view to_string(PartitionDim d) {
  switch (d) {
    case PartitionDim::Individuals: return "individuals";
    case PartitionDim::Time: return "time";
    case PartitionDim::Both: return "both";
  }
  return "both";
}

std::optional<JackknifeVariant> parse_jackknife_variant(std::string_view s) {
  for (auto v : {JackknifeVariant::SS1, JackknifeVariant::SS2, JackknifeVariant::JS, JackknifeVariant::SJ,
                 JackknifeVariant::JJ, JackknifeVariant::Double}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

std::optional<PartitionDim> parse_partition_dim(std::string_view s) {
  for (auto d : {PartitionDim::Individuals, PartitionDim::Time, PartitionDim::Both}) {
    if (s == to_string(d)) return d;
  }
  return std::nullopt;
}

EffectMode ModelSpec::effect_mode() const {
  if (include_ieffects && include_teffects) return EffectMode::Both;
  return include_ieffects ? EffectMode::Individual : EffectMode::Time;
}

void ModelSpec::validate() const {
  if (!include_ieffects && !include_teffects) {
    throw Error(ErrorCode::InvalidOption, "ieffects(no) together with teffects(no) is not allowed");
  }
  if (!ibias && !tbias) {
    throw Error(ErrorCode::InvalidOption, "ibias(no) together with tbias(no) is not allowed");
  }
  if (lags < 0) throw Error(ErrorCode::InvalidOption, "lags must be nonnegative");
  if (multiple < 0) throw Error(ErrorCode::InvalidOption, "multiple must be nonnegative");
  if (population && *population < 1) throw Error(ErrorCode::InvalidOption, "population must be positive");
  for (const auto& b : force_binary) {
    for (const auto& c : force_continuous) {
      if (b == c) throw Error(ErrorCode::InvalidOption, "'" + b + "' forced both binary and continuous");
    }
  }
}

}  // namespace panelfe
