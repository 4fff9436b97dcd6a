#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vb/circuit.hpp"

namespace vb {

struct AnalysisArgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LatticeMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridEntry {
  bool tested = false;
  bool pass = false;
  std::optional<double> score;
  int n_circuits = 0;
  std::map<std::string, std::string> metadata;
};

// Per-shape benchmark results arranged on the (w, d) lattice.
struct VolumetricGrid {
  std::string family;
  std::map<Shape, GridEntry> entries;

  std::string to_json() const;
  static VolumetricGrid from_json(const std::string& text);
};

// One (w, d_max) pair per tested width with at least one passing depth.
struct ParetoFrontier {
  std::vector<Shape> points;
};

struct DepolarizingPredictor {
  enum class Mode { DefiniteOutcome, HeavyOutput };
  double eps1 = 0.0;
  double eps2 = 0.0;
  Mode mode = Mode::DefiniteOutcome;
};

struct QuantumVolumeResult {
  int log2_quantum_volume = 0;
  // The implied-success region {(w, d): w <= n, d <= n} intersected with the
  // grid's lattice, for plotting.
  std::vector<Shape> implied_region;
};

// Depths are powers of depth_base up to max_d (optionally preceded by 0);
// widths are powers of width_base rounded half-away-from-zero, deduplicated,
// capped at max_w.  Returns the cartesian product sorted by (w, d).
std::vector<Shape> shape_lattice(int max_w, int max_d, int depth_base = 2,
                                 double width_base = 1.2,
                                 bool include_zero_depth = false);

ParetoFrontier pareto_frontier(const VolumetricGrid& grid);

QuantumVolumeResult quantum_volume(const VolumetricGrid& grid);

// Depolarizing prediction per shape from one representative generated circuit:
// F is the product of (1 - eps_class) over its non-identity gate locations;
// the predicted score is F + (1-F) 2^{-w} for definite-outcome families and
// F h_ideal + (1-F) h_uniform for heavy-output families.
VolumetricGrid predict(const std::vector<Shape>& shapes,
                       const std::function<Circuit(Shape)>& generator,
                       const DepolarizingPredictor& noise,
                       double threshold = 2.0 / 3.0,
                       const std::string& family = "predicted");

struct DiscrepancyFlag {
  enum class Kind { WidthDeficiency, DepthDeficiency };
  Kind kind = Kind::WidthDeficiency;
  int w = 0;
  std::string annotation;
};

// Flags widths where the observed grid underperforms the prediction:
// WidthDeficiency when at least half the predicted-pass depths at a width
// fail, DepthDeficiency when the observed frontier trails the predicted
// frontier by more than one lattice step.  Width-1 depth deficiencies carry a
// non-Markovianity / coherent-error annotation.
std::vector<DiscrepancyFlag> discrepancy_report(const VolumetricGrid& observed,
                                                const VolumetricGrid& predicted);

}  // namespace vb
