#ifndef COURTQG_RUNCONFIG_HPP
#define COURTQG_RUNCONFIG_HPP

#include <string>

#include "courtqg/train.hpp"

namespace courtqg {

// Flat key=value configuration with dotted namespaces, e.g.
//
//   train.mu = 0.1
//   train.epochs = 30
//   model.d_h = 32
//
// '#' starts a comment; blank lines are ignored. Command-line flags override
// file values. Unknown keys are rejected by name.
struct RunConfig {
  TrainConfig train;
  ModelConfig model;

  void apply(const std::string& key, const std::string& value);
  void apply_file(const std::string& path);

  // Resolved configuration as JSON ({"train": {...}, "model": {...}});
  // embedded into every artifact the CLI writes.
  std::string to_json() const;
};

}  // namespace courtqg

#endif  // COURTQG_RUNCONFIG_HPP
