#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vb/analysis.hpp"

namespace vb {

struct PlotArgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Volumetric-plot rendering options.  Cells sit on the lattice index grid;
// log mode is realized by index placement (the lattice itself is the log
// scale) and linear mode by value placement.
struct PlotSpec {
  enum class Axes { Linear, Log };
  enum class Shading { Binary, Score };

  Axes axes = Axes::Log;
  Shading shading = Shading::Binary;
  bool show_frontier = true;
  bool frontier_only = false;  // overlay frontier polylines only
  bool show_qv = false;        // outline squares, shade implied region
  bool show_predicted = true;  // inner squares for predicted passes
  // Lower edge of the monotone score color ramp; scores at or below this
  // render as the palest shade, 1.0 as the full accent color.
  double score_floor = 0.5;
  std::string title;
  // Benchmark identification block (family, criterion, threshold, K, N,
  // seed, ...) embedded verbatim as SVG metadata.
  std::map<std::string, std::string> metadata;
};

// Renders one or more observed grids (all on the same lattice) with an
// optional predicted grid to an SVG 1.1 document.  Passes are filled squares,
// tested failures hollow squares, untested shapes blank.
std::string render_plot(const PlotSpec& spec,
                        const std::vector<VolumetricGrid>& grids,
                        const VolumetricGrid* predicted = nullptr);

}  // namespace vb
