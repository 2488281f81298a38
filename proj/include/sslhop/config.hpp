#pragma once

#include "sslhop/hoptree.hpp"

#include <string>

namespace sslhop {

// Training-time configuration: the hop-tree layout plus the decision head's
// ridge. head_ridge < 0 means "auto" (resolved by fit_llsr at fit time).
struct TrainConfig {
  HopConfig hop;
  double head_ridge = -1.0;
};

// Parses line-oriented key=value text. Blank lines and '#' comments are
// skipped; keys are exactly the HopConfig field names plus "aggregation" and
// "head.ridge" ("auto" or a non-negative number). Unknown keys are an error,
// not a warning.
TrainConfig parse_config(const std::string& text);

TrainConfig load_config(const std::string& path);

// key=value lines in a fixed order, reals in %.9g; head.ridge prints "auto"
// when negative. parse_config(dump_config(c)) reproduces c.
std::string dump_config(const TrainConfig& config);

}  // namespace sslhop
