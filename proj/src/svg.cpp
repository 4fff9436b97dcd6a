#include "vb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vb {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Rgb {
  int r, g, b;
  std::string hex() const {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
  }
};

const Rgb kPalette[] = {
    {31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {148, 103, 189},
    {255, 127, 14}, {23, 190, 207},
};
constexpr int kPaletteSize = 6;
const Rgb kRampLow = {232, 232, 232};

Rgb ramp(const Rgb& accent, double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto mix = [t](int a, int b) {
    return static_cast<int>(std::lround(a + t * (b - a)));
  };
  return {mix(kRampLow.r, accent.r), mix(kRampLow.g, accent.g),
          mix(kRampLow.b, accent.b)};
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_plot(const PlotSpec& spec,
                        const std::vector<VolumetricGrid>& grids,
                        const VolumetricGrid* predicted) {
  if (grids.empty()) throw PlotArgError("render_plot: at least one grid");

  std::set<Shape> lattice;
  for (const auto& [s, e] : grids[0].entries) lattice.insert(s);
  auto check_lattice = [&lattice](const VolumetricGrid& g) {
    std::set<Shape> k;
    for (const auto& [s, e] : g.entries) k.insert(s);
    if (k != lattice)
      throw PlotArgError("render_plot: overlaid grids cover different "
                         "lattices");
  };
  for (std::size_t i = 1; i < grids.size(); ++i) check_lattice(grids[i]);
  if (predicted) check_lattice(*predicted);

  std::vector<int> widths, depths;
  for (const Shape& s : lattice) {
    widths.push_back(s.w);
    depths.push_back(s.d);
  }
  std::sort(widths.begin(), widths.end());
  widths.erase(std::unique(widths.begin(), widths.end()), widths.end());
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());

  const double pitch = 44.0, cell = 34.0;
  const double ml = 80.0, mt = 60.0, mb = 60.0, mr = 180.0;
  const int ncols = static_cast<int>(depths.size());
  const int nrows = static_cast<int>(widths.size());

  // Cell center coordinates.  Log mode places by lattice index (the lattice
  // is the log scale); linear mode places by value.
  auto xc = [&](int d) {
    if (spec.axes == PlotSpec::Axes::Log || depths.back() == depths.front()) {
      const int i = static_cast<int>(
          std::lower_bound(depths.begin(), depths.end(), d) - depths.begin());
      return ml + pitch * (i + 0.5);
    }
    const double t = static_cast<double>(d - depths.front()) /
                     (depths.back() - depths.front());
    return ml + pitch * 0.5 + t * pitch * (ncols - 1);
  };
  auto yc = [&](int w) {
    if (spec.axes == PlotSpec::Axes::Log || widths.back() == widths.front()) {
      const int i = static_cast<int>(
          std::lower_bound(widths.begin(), widths.end(), w) - widths.begin());
      return mt + pitch * (nrows - 1 - i + 0.5);
    }
    const double t = static_cast<double>(w - widths.front()) /
                     (widths.back() - widths.front());
    return mt + pitch * 0.5 + (1.0 - t) * pitch * (nrows - 1);
  };

  const double plot_w = pitch * ncols, plot_h = pitch * nrows;
  const double total_w = ml + plot_w + mr, total_h = mt + plot_h + mb;

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
    << fmt(total_w) << "\" height=\"" << fmt(total_h) << "\" viewBox=\"0 0 "
    << fmt(total_w) << " " << fmt(total_h) << "\">\n";

  {
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    meta["title"] = spec.title;
    for (const auto& [k, v] : spec.metadata) meta[k] = v;
    s << "<metadata id=\"benchmark\">" << xml_escape(meta.dump())
      << "</metadata>\n";
  }

  s << "<rect x=\"0\" y=\"0\" width=\"" << fmt(total_w) << "\" height=\""
    << fmt(total_h) << "\" fill=\"#ffffff\"/>\n";

  auto cell_rect = [&](const Shape& sh, double size) {
    std::ostringstream r;
    r << "x=\"" << fmt(xc(sh.d) - size / 2) << "\" y=\""
      << fmt(yc(sh.w) - size / 2) << "\" width=\"" << fmt(size)
      << "\" height=\"" << fmt(size) << "\"";
    return r.str();
  };

  // Quantum-volume implied-success region and diagonal outlines.
  if (spec.show_qv) {
    try {
      const QuantumVolumeResult qv = quantum_volume(grids[0]);
      for (const Shape& sh : qv.implied_region)
        s << "<rect class=\"qv-region\" " << cell_rect(sh, pitch)
          << " fill=\"#d9d9d9\"/>\n";
      for (const Shape& sh : lattice)
        if (sh.w == sh.d)
          s << "<rect class=\"qv-square\" " << cell_rect(sh, cell + 6)
            << " fill=\"none\" stroke=\"#404040\" stroke-width=\"2\"/>\n";
      s << "<text x=\"" << fmt(ml + 6) << "\" y=\"" << fmt(mt - 10)
        << "\" font-family=\"sans-serif\" font-size=\"13\">log2(V_Q) = "
        << qv.log2_quantum_volume << "</text>\n";
    } catch (const AnalysisArgError&) {
      // No tested square shapes: nothing to highlight.
    }
  }

  // Cells: filled squares for passes, hollow for tested failures.
  if (!spec.frontier_only) {
    for (std::size_t gi = 0; gi < grids.size(); ++gi) {
      const Rgb accent = kPalette[gi % kPaletteSize];
      const double size = cell - 6.0 * static_cast<double>(gi);
      for (const auto& [sh, e] : grids[gi].entries) {
        if (!e.tested) continue;
        if (e.pass) {
          Rgb fill = accent;
          if (spec.shading == PlotSpec::Shading::Score && e.score) {
            const double t = (std::clamp(*e.score, spec.score_floor, 1.0) -
                              spec.score_floor) /
                             std::max(1e-12, 1.0 - spec.score_floor);
            fill = ramp(accent, t);
          }
          s << "<rect class=\"pass\" " << cell_rect(sh, size) << " fill=\""
            << fill.hex() << "\"/>\n";
        } else {
          s << "<rect class=\"fail\" " << cell_rect(sh, size)
            << " fill=\"none\" stroke=\"" << accent.hex()
            << "\" stroke-width=\"2\"/>\n";
        }
      }
    }

    // Small inner squares for shapes the model predicts should pass.
    if (spec.show_predicted && predicted) {
      for (const auto& [sh, e] : predicted->entries)
        if (e.tested && e.pass)
          s << "<rect class=\"predicted\" " << cell_rect(sh, cell * 0.35)
            << " fill=\"#111111\"/>\n";
    }
  }

  if (spec.show_frontier || spec.frontier_only) {
    for (std::size_t gi = 0; gi < grids.size(); ++gi) {
      const Rgb accent = kPalette[gi % kPaletteSize];
      try {
        const ParetoFrontier f = pareto_frontier(grids[gi]);
        if (f.points.empty()) continue;
        s << "<polyline class=\"frontier\" fill=\"none\" stroke=\""
          << accent.hex() << "\" stroke-width=\"2.5\" points=\"";
        bool first = true;
        for (const Shape& p : f.points) {
          if (!first) s << " ";
          first = false;
          s << fmt(xc(p.d)) << "," << fmt(yc(p.w));
        }
        s << "\"/>\n";
      } catch (const AnalysisArgError&) {
      }
    }
  }

  // Axes and tick labels.
  s << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + plot_h)
    << "\" x2=\"" << fmt(ml + plot_w) << "\" y2=\"" << fmt(mt + plot_h)
    << "\" stroke=\"#000000\"/>\n";
  s << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\""
    << fmt(ml) << "\" y2=\"" << fmt(mt + plot_h) << "\" stroke=\"#000000\"/>\n";
  for (int d : depths)
    s << "<text x=\"" << fmt(xc(d)) << "\" y=\"" << fmt(mt + plot_h + 18)
      << "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"middle\">"
      << d << "</text>\n";
  for (int w : widths)
    s << "<text x=\"" << fmt(ml - 10) << "\" y=\"" << fmt(yc(w) + 4)
      << "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"end\">"
      << w << "</text>\n";
  s << "<text x=\"" << fmt(ml + plot_w / 2) << "\" y=\""
    << fmt(mt + plot_h + 40)
    << "\" font-family=\"sans-serif\" font-size=\"13\" "
       "text-anchor=\"middle\">depth d</text>\n";
  s << "<text x=\"18\" y=\"" << fmt(mt + plot_h / 2)
    << "\" font-family=\"sans-serif\" font-size=\"13\" "
       "text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << fmt(mt + plot_h / 2) << ")\">width w</text>\n";

  // Title and legend.
  s << "<text x=\"" << fmt(total_w / 2)
    << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
       "text-anchor=\"middle\">"
    << xml_escape(spec.title) << "</text>\n";

  double ly = mt + 10;
  const double lx = ml + plot_w + 20;
  auto legend_line = [&](const std::string& mark, const std::string& label) {
    s << mark;
    s << "<text x=\"" << fmt(lx + 22) << "\" y=\"" << fmt(ly + 10)
      << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(label) << "</text>\n";
    ly += 22;
  };
  for (std::size_t gi = 0; gi < grids.size(); ++gi) {
    const Rgb accent = kPalette[gi % kPaletteSize];
    std::ostringstream mark;
    mark << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly) << "\" width=\""
         << 14 << "\" height=\"" << 14 << "\" fill=\"" << accent.hex()
         << "\"/>\n";
    legend_line(mark.str(),
                grids[gi].family.empty() ? "observed" : grids[gi].family);
  }
  {
    std::ostringstream mark;
    mark << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly)
         << "\" width=\"14\" height=\"14\" fill=\"none\" "
            "stroke=\"#555555\" stroke-width=\"2\"/>\n";
    legend_line(mark.str(), "tested, failed");
  }
  if (spec.show_predicted && predicted) {
    std::ostringstream mark;
    mark << "<rect x=\"" << fmt(lx + 4) << "\" y=\"" << fmt(ly + 4)
         << "\" width=\"6\" height=\"6\" fill=\"#111111\"/>\n";
    legend_line(mark.str(), "predicted pass");
  }
  if (spec.shading == PlotSpec::Shading::Score) {
    std::ostringstream mark;
    mark << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly)
         << "\" width=\"14\" height=\"14\" fill=\"" << kRampLow.hex()
         << "\"/>\n";
    legend_line(mark.str(), "score ramp " + fmt(spec.score_floor) +
                                " (pale) to 1.0 (full)");
  }

  s << "</svg>\n";
  return s.str();
}

}  // namespace vb
