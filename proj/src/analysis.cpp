#include "vb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

#include "vb/metrics.hpp"
#include "vb/simulator.hpp"

namespace vb {

using json = nlohmann::ordered_json;

std::string VolumetricGrid::to_json() const {
  json j;
  j["family"] = family;
  j["entries"] = json::array();
  for (const auto& [s, e] : entries) {
    json je;
    je["w"] = s.w;
    je["d"] = s.d;
    je["tested"] = e.tested;
    je["pass"] = e.tested ? e.pass : false;
    if (e.tested && e.score)
      je["score"] = *e.score;
    else
      je["score"] = nullptr;
    je["n_circuits"] = e.n_circuits;
    if (!e.metadata.empty()) {
      json jm = json::object();
      for (const auto& [k, v] : e.metadata) jm[k] = v;
      je["metadata"] = jm;
    }
    j["entries"].push_back(je);
  }
  return j.dump(2);
}

VolumetricGrid VolumetricGrid::from_json(const std::string& text) {
  json j = json::parse(text);
  VolumetricGrid g;
  g.family = j.at("family").get<std::string>();
  for (const auto& je : j.at("entries")) {
    Shape s{je.at("w").get<int>(), je.at("d").get<int>()};
    if (s.w < 1 || s.d < 0)
      throw AnalysisArgError("grid entry shape out of range");
    GridEntry e;
    e.tested = je.at("tested").get<bool>();
    e.pass = e.tested && je.at("pass").get<bool>();
    if (e.tested && !je.at("score").is_null())
      e.score = je.at("score").get<double>();
    e.n_circuits = je.at("n_circuits").get<int>();
    if (je.contains("metadata"))
      for (const auto& [k, v] : je.at("metadata").items())
        e.metadata[k] = v.get<std::string>();
    g.entries[s] = e;
  }
  return g;
}

std::vector<Shape> shape_lattice(int max_w, int max_d, int depth_base,
                                 double width_base, bool include_zero_depth) {
  if (max_w < 1 || max_d < 1)
    throw AnalysisArgError("shape_lattice: max_w and max_d must be >= 1");
  if (depth_base < 2 || width_base <= 1.0)
    throw AnalysisArgError("shape_lattice: bases must exceed 1");

  std::vector<int> depths;
  if (include_zero_depth) depths.push_back(0);
  for (long long v = 1; v <= max_d; v *= depth_base) {
    depths.push_back(static_cast<int>(v));
    if (v > max_d / depth_base) break;
  }

  std::vector<int> widths;
  for (int k = 0;; ++k) {
    const double x = std::pow(width_base, k);
    // Round half-away-from-zero (x is positive here).
    const int wv = static_cast<int>(std::floor(x + 0.5));
    if (wv > max_w) break;
    if (widths.empty() || widths.back() != wv) widths.push_back(wv);
    if (k > 512) break;
  }

  std::vector<Shape> out;
  for (int w : widths)
    for (int d : depths) out.push_back({w, d});
  std::sort(out.begin(), out.end());
  return out;
}

ParetoFrontier pareto_frontier(const VolumetricGrid& grid) {
  bool any_tested = false;
  std::map<int, int> best;  // width -> max passing depth
  for (const auto& [s, e] : grid.entries) {
    if (!e.tested) continue;
    any_tested = true;
    if (!e.pass) continue;
    auto it = best.find(s.w);
    if (it == best.end() || it->second < s.d) best[s.w] = s.d;
  }
  if (!any_tested)
    throw AnalysisArgError("pareto_frontier: grid has no tested entries");
  ParetoFrontier f;
  for (const auto& [w, d] : best) f.points.push_back({w, d});
  return f;
}

QuantumVolumeResult quantum_volume(const VolumetricGrid& grid) {
  std::map<int, bool> squares;  // m -> pass
  for (const auto& [s, e] : grid.entries)
    if (s.w == s.d && e.tested) squares[s.w] = e.pass;
  if (squares.empty())
    throw AnalysisArgError("quantum_volume: no tested square shapes");

  // Largest n whose full prefix of tested squares passes.
  int n = 0;
  for (const auto& [m, pass] : squares) {
    if (!pass) break;
    n = m;
  }

  QuantumVolumeResult r;
  r.log2_quantum_volume = n;
  for (const auto& [s, e] : grid.entries)
    if (s.w <= n && s.d <= n) r.implied_region.push_back(s);
  return r;
}

VolumetricGrid predict(const std::vector<Shape>& shapes,
                       const std::function<Circuit(Shape)>& generator,
                       const DepolarizingPredictor& noise,
                       double threshold, const std::string& family) {
  if (noise.eps1 < 0 || noise.eps1 > 1 || noise.eps2 < 0 || noise.eps2 > 1)
    throw AnalysisArgError("predict: depolarizing rates must lie in [0,1]");

  VolumetricGrid g;
  g.family = family;
  for (const Shape& s : shapes) {
    const Circuit c = generator(s);
    double f = 1.0;
    for (const FlatGate& fg : flatten(c)) {
      if (fg.noise == NoiseClass::OneQubit)
        f *= 1.0 - noise.eps1;
      else if (fg.noise == NoiseClass::TwoQubit)
        f *= 1.0 - noise.eps2;
    }

    double score = 0.0;
    if (noise.mode == DepolarizingPredictor::Mode::DefiniteOutcome) {
      score = f + (1.0 - f) * std::pow(2.0, -s.w);
    } else {
      const Distribution ideal = ideal_distribution(c);
      double h_ideal = 0.0, h_uniform = 0.0;
      try {
        const auto heavy = heavy_set(ideal);
        for (std::uint64_t k : heavy) h_ideal += ideal.prob(k);
        h_uniform =
            static_cast<double>(heavy.size()) * std::pow(2.0, -s.w);
      } catch (const UniformOutcomeError&) {
        // A uniform ideal distribution has no heavy set; any split carries
        // half the mass under both references.
        h_ideal = h_uniform = 0.5;
      }
      score = f * h_ideal + (1.0 - f) * h_uniform;
    }

    GridEntry e;
    e.tested = true;
    e.pass = score >= threshold;
    e.score = score;
    e.n_circuits = 1;
    g.entries[s] = e;
  }
  return g;
}

std::vector<DiscrepancyFlag> discrepancy_report(
    const VolumetricGrid& observed, const VolumetricGrid& predicted) {
  std::set<Shape> ok, pk;
  for (const auto& [s, e] : observed.entries) ok.insert(s);
  for (const auto& [s, e] : predicted.entries) pk.insert(s);
  if (ok != pk)
    throw LatticeMismatchError(
        "discrepancy_report: observed and predicted grids cover different "
        "lattices");

  // Depths per width, in lattice order, for step distances.
  std::map<int, std::vector<int>> depths_at;
  for (const Shape& s : ok) depths_at[s.w].push_back(s.d);
  for (auto& [w, ds] : depths_at) std::sort(ds.begin(), ds.end());

  std::map<int, int> obs_front, pred_front;
  for (const auto& [s, e] : observed.entries)
    if (e.tested && e.pass &&
        (!obs_front.count(s.w) || obs_front[s.w] < s.d))
      obs_front[s.w] = s.d;
  for (const auto& [s, e] : predicted.entries)
    if (e.tested && e.pass &&
        (!pred_front.count(s.w) || pred_front[s.w] < s.d))
      pred_front[s.w] = s.d;

  std::vector<DiscrepancyFlag> flags;
  for (const auto& [w, ds] : depths_at) {
    int tested = 0, deficient = 0;
    for (int d : ds) {
      const Shape s{w, d};
      const auto& oe = observed.entries.at(s);
      const auto& pe = predicted.entries.at(s);
      if (!oe.tested) continue;
      ++tested;
      if (pe.tested && pe.pass && !oe.pass) ++deficient;
    }
    if (tested > 0 && 2 * deficient >= tested) {
      DiscrepancyFlag fl;
      fl.kind = DiscrepancyFlag::Kind::WidthDeficiency;
      fl.w = w;
      fl.annotation =
          "predicted passes fail across at least half the tested depths; "
          "consistent with bad qubits, bad two-qubit gates, or emergent "
          "crosstalk at this width";
      flags.push_back(fl);
    }

    if (pred_front.count(w)) {
      const auto idx = [&ds](int d) {
        return static_cast<int>(
            std::lower_bound(ds.begin(), ds.end(), d) - ds.begin());
      };
      const int pi = idx(pred_front.at(w));
      const int oi = obs_front.count(w) ? idx(obs_front.at(w)) : -1;
      if (pi - oi > 1) {
        DiscrepancyFlag fl;
        fl.kind = DiscrepancyFlag::Kind::DepthDeficiency;
        fl.w = w;
        fl.annotation =
            "observed frontier trails the predicted frontier by more than "
            "one lattice step";
        if (w == 1)
          fl.annotation +=
              "; at width 1 this is indicative of non-Markovianity or "
              "coherent errors rather than crosstalk";
        flags.push_back(fl);
      }
    }
  }
  return flags;
}

}  // namespace vb
