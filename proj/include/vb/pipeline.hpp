#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vb/analysis.hpp"
#include "vb/compiler.hpp"
#include "vb/ensembles.hpp"
#include "vb/metrics.hpp"
#include "vb/simulator.hpp"

namespace vb {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A module error re-thrown with its (shape, circuit index) location.
struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One-file benchmark description with module-namespaced sections; see
// BenchmarkConfig::from_json for the schema.
struct BenchmarkConfig {
  // ensemble section
  std::string family = "qv";
  int k = 10;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> family_params;
  std::optional<std::string> policy_override;

  // lattice section: explicit shapes win over the generated lattice.
  std::vector<Shape> shapes;
  int max_w = 4;
  int max_d = 16;
  int depth_base = 2;
  double width_base = 1.2;
  bool include_zero_depth = false;

  // simulator section
  NoiseModel noise;
  std::uint64_t shots = 1000;

  // compiler section
  std::optional<NativeGateSet> native;

  // metrics section
  CircuitCriterion criterion;
  EnsembleCriterion ensemble_rule;
  bool pooled = false;

  // output section
  std::string output_dir;
  int threads = 0;  // 0 = library default

  std::string to_json() const;
  static BenchmarkConfig from_json(const std::string& text);

  std::vector<Shape> lattice() const;
};

// Dispatches the named family at one shape.  Throws ConfigError for unknown
// families, propagates ShapeUnsupportedError.
EnsembleSpec generate_family(const BenchmarkConfig& config, Shape shape);

// Full pipeline: generate, compile, simulate, score, and assemble the grid.
// Ensemble manifests, outcome records, the grid JSON, and a default plot are
// written under config.output_dir when it is non-empty.  Deterministic for a
// fixed (config, seed) regardless of thread count.
VolumetricGrid run_benchmark(const BenchmarkConfig& config);

}  // namespace vb
