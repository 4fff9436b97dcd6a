// Acceptance harness: one self-contained check per criterion, one pass/fail
// line each.  Run with no arguments for all criteria or with a number (1-10)
// for a single one.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vb/analysis.hpp"
#include "vb/compiler.hpp"
#include "vb/ensembles.hpp"
#include "vb/gates.hpp"
#include "vb/metrics.hpp"
#include "vb/pipeline.hpp"
#include "vb/rng.hpp"
#include "vb/simulator.hpp"
#include "vb/stabilizer.hpp"
#include "vb/svg.hpp"

using namespace vb;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw CheckFailure(what);
}

std::string declared_outcome(const Circuit& c) {
  auto it = c.metadata.extra.find("ideal_outcome");
  require(it != c.metadata.extra.end(), "circuit lacks ideal_outcome");
  return it->second;
}

Distribution dense_distribution(const Circuit& c) {
  const sv::State amps = statevector(c);
  Distribution d;
  d.width = c.width;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const double p = std::norm(amps[k]);
    if (p > 0.0) d.probs[k] = p;
  }
  return d;
}

NativeGateSet verbatim_gate_set() {
  NativeGateSet n;
  n.oneq = {GateKind::Id, GateKind::X,  GateKind::Y,   GateKind::Z,
            GateKind::H,  GateKind::S,  GateKind::Sdg, GateKind::RX,
            GateKind::RY, GateKind::RZ, GateKind::U1q};
  n.twoq = {GateKind::CNOT, GateKind::CZ, GateKind::SWAP};
  return n;
}

double phase_aligned_error(const Eigen::MatrixXcd& a,
                           const Eigen::MatrixXcd& b) {
  int bi = 0, bj = 0;
  double best = 0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (std::abs(a(i, j)) > best) {
        best = std::abs(a(i, j));
        bi = i;
        bj = j;
      }
  if (std::abs(b(bi, bj)) < 1e-14) return 1.0;
  const std::complex<double> ph = a(bi, bj) / b(bi, bj);
  return (a - b * ph).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd gates_unitary(int w, const std::vector<GateApplication>& gs) {
  std::vector<Layer> layers;
  for (const GateApplication& g : gs) layers.push_back(Layer{{g}});
  Eigen::MatrixXcd u = layers_unitary(w, layers);
  if (w == 2) {
    // Two-qubit gate matrices index the basis as 2*b(t0) + b(t1), while the
    // full-register unitary puts qubit 0 at the low bit; conjugating by the
    // bit-reversal permutation moves between the two conventions.
    u.row(1).swap(u.row(2));
    u.col(1).swap(u.col(2));
  }
  return u;
}

double cp_lower_oracle(std::uint64_t k, std::uint64_t n, double conf) {
  if (k == 0) return 0.0;
  const double alpha = 1.0 - conf;
  auto upper_tail = [&](double p) {
    long double term = std::pow((long double)(1.0 - p), (long double)n);
    long double cdf = term;
    for (std::uint64_t i = 1; i < k; ++i) {
      term *= (long double)(n - i + 1) / i * ((long double)p / (1.0 - p));
      cdf += term;
    }
    return (double)(1.0L - cdf);
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (upper_tail(mid) >= alpha)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// --- criterion 1 -----------------------------------------------------------

void criterion_1() {
  int checked = 0;
  for (const int w : {1, 2, 3, 4}) {
    for (const int d : {1, 2, 4, 8, 16, 32}) {
      const int k = 42;  // 4 widths x 6 depths x 42 = 1008 per family
      for (const EnsembleSpec& spec :
           {clifford_rb_ensemble({w, d}, k, 1000 + w * 100 + d),
            direct_rb_ensemble({w, d}, k, 2000 + w * 100 + d)}) {
        for (const Circuit& c : spec.circuits) {
          const Distribution dist = stabilizer_distribution(c);
          const std::uint64_t key = key_of_bitstring(declared_outcome(c));
          require(std::abs(dist.prob(key) - 1.0) < 1e-12,
                  "inversion failed at w=" + std::to_string(w) +
                      " d=" + std::to_string(d));
          ++checked;
        }
      }
    }
  }
  require(checked >= 2000, "fewer than 2x1000 circuits checked");
}

// --- criterion 2 -----------------------------------------------------------

void criterion_2() {
  Rng rng(226);
  const int w = 6;
  for (int it = 0; it < 100; ++it) {
    std::vector<Layer> central;
    for (int l = 0; l < 20; ++l) {
      Layer layer;
      const auto roll = rng.uniform_int(5);
      if (roll < 2) {
        int a = static_cast<int>(rng.uniform_int(w));
        int b = static_cast<int>(rng.uniform_int(w - 1));
        if (b >= a) ++b;
        layer.gates.push_back(
            gate(roll == 0 ? GateKind::CNOT : GateKind::CZ, {a, b}));
      } else {
        const GateKind kinds[] = {GateKind::H, GateKind::S, GateKind::X};
        layer.gates.push_back(
            gate(kinds[roll - 2],
                 {static_cast<int>(rng.uniform_int(w))}));
      }
      central.push_back(std::move(layer));
    }
    const Circuit c = make_circuit(w, {}, std::move(central), {});
    const Distribution stab = stabilizer_distribution(c);
    const Distribution dense = dense_distribution(c);
    require(total_variation_distance(stab, dense) < 1e-10,
            "stabilizer/dense disagreement");
  }
}

// --- criterion 3 -----------------------------------------------------------

void criterion_3() {
  NoiseModel nm;
  nm.eps1 = 0.01;
  nm.eps2 = 0.03;
  const std::uint64_t shots = 100000;

  struct Family {
    std::string name;
    std::function<EnsembleSpec(Shape)> gen;
  };
  const std::vector<Family> families = {
      {"qv", [](Shape s) { return qv_ensemble(s, 1, 31); }},
      {"clifford_rb", [](Shape s) { return clifford_rb_ensemble(s, 1, 32); }},
      {"direct_rb", [](Shape s) { return direct_rb_ensemble(s, 1, 33); }},
      {"simultaneous_rb",
       [](Shape s) { return simultaneous_rb_ensemble(s, 1, 34); }},
      {"rabi", [](Shape s) { return rabi_ensemble(s); }},
      {"ramsey", [](Shape s) { return ramsey_ensemble(s, 0.3); }},
      {"idle_tomography",
       [](Shape s) { return idle_tomography_ensemble(s); }},
      {"germ_periodic", [](Shape s) { return germ_periodic_ensemble(s); }},
      {"grover",
       [](Shape s) { return grover_ensemble(s, std::uint64_t{3}); }},
      {"trotter", [](Shape s) { return trotter_ensemble(s, 1.0, 0.5, 0.05); }},
  };

  for (const Family& fam : families) {
    for (const int d : {1, 4, 16}) {
      const int w = fam.name == "qv" ? 4 : 3;
      const EnsembleSpec spec = fam.gen({w, d});
      const auto pv = policy_from_name(spec.compilation_policy);
      require(pv.has_value(), "bad policy for " + fam.name);
      const NativeGateSet native = *pv == PolicyVariant::None
                                       ? verbatim_gate_set()
                                       : default_native_gate_set();
      const Circuit compiled =
          compile(spec.circuits.at(0), CompilationPolicy{*pv}, native);
      const Distribution oracle = density_matrix_distribution(compiled, nm);
      const OutcomeRecord mc = sample_noisy(
          compiled, nm, shots,
          derive_seed(3000, fam.name, {static_cast<std::uint64_t>(d)}));

      auto freq_of = [&](std::uint64_t key) {
        auto it = mc.counts.find(key);
        return it == mc.counts.end()
                   ? 0.0
                   : static_cast<double>(it->second) / shots;
      };
      auto it = spec.circuits.at(0).metadata.extra.find("ideal_outcome");
      if (it != spec.circuits.at(0).metadata.extra.end()) {
        const std::uint64_t key = key_of_bitstring(it->second);
        const double p = oracle.prob(key);
        const double sigma = std::sqrt(p * (1 - p) / shots);
        require(std::abs(freq_of(key) - p) < 3 * sigma + 1e-6,
                fam.name + " d=" + std::to_string(d) +
                    ": success frequency off the oracle");
      } else if (fam.name == "qv") {
        const auto heavy = heavy_set(ideal_distribution(compiled));
        double p = 0, f = 0;
        for (std::uint64_t key : heavy) {
          p += oracle.prob(key);
          f += freq_of(key);
        }
        const double sigma = std::sqrt(p * (1 - p) / shots);
        require(std::abs(f - p) < 3 * sigma + 1e-6,
                "qv heavy-output frequency off the oracle");
      } else {
        Distribution emp;
        emp.width = compiled.width;
        for (const auto& [key, n] : mc.counts)
          emp.probs[key] = static_cast<double>(n) / shots;
        require(total_variation_distance(emp, oracle) < 0.02,
                fam.name + " d=" + std::to_string(d) +
                    ": sampled distribution off the oracle");
      }
    }
  }
}

// --- criterion 4 -----------------------------------------------------------

void criterion_4() {
  Rng rng(44);
  for (int it = 0; it < 500; ++it) {
    const Eigen::Matrix4cd u = random_su4(rng);
    const Su4Decomposition dec = decompose_su4(u);
    require(dec.cnot_count == 3, "SU(4) CNOT count != 3");
    require(phase_aligned_error(u, gates_unitary(2, dec.gates)) < 1e-8,
            "SU(4) reconstruction error");
  }
  for (int it = 0; it < 1000; ++it) {
    const Eigen::Matrix2cd u = random_u2(rng);
    const ZyzDecomposition z = decompose_1q(u);
    const Eigen::Matrix2cd rec = std::exp(std::complex<double>(0, z.phase)) *
                                 mat_rz(z.alpha) * mat_ry(z.beta) *
                                 mat_rz(z.gamma);
    require((u - rec).cwiseAbs().maxCoeff() < 1e-10,
            "1q reconstruction error");
  }
}

// --- criterion 5 -----------------------------------------------------------

void criterion_5() {
  const int K = 200;
  const EnsembleSpec spec = qv_ensemble({4, 4}, K, 55);
  Rng spoof(555);
  double mean_heavy = 0, mean_spoof = 0;
  for (const Circuit& c : spec.circuits) {
    const Distribution ideal = ideal_distribution(c);
    const auto heavy = heavy_set(ideal);
    double h = 0;
    for (std::uint64_t key : heavy) h += ideal.prob(key);
    mean_heavy += h;

    const int per = 500;  // 200 x 500 = 1e5 uniform samples total
    int hits = 0;
    for (int s = 0; s < per; ++s)
      if (heavy.count(spoof.uniform_int(16))) ++hits;
    mean_spoof += static_cast<double>(hits) / per;
  }
  mean_heavy /= K;
  mean_spoof /= K;
  require(mean_heavy >= 0.75 && mean_heavy <= 0.92,
          "ideal heavy mass out of range: " + std::to_string(mean_heavy));
  require(mean_spoof < 0.55,
          "uniform spoofing too strong: " + std::to_string(mean_spoof));
  require(mean_spoof < mean_heavy, "no separation");
}

// --- criterion 6 -----------------------------------------------------------

void criterion_6() {
  NoiseModel nm;
  nm.eps1 = 5e-4;
  nm.eps2 = 3e-3;
  const std::uint64_t shots = 20000;
  CircuitCriterion criterion;  // correct outcome, 2/3, 95%

  int frontier = 0;
  for (int d = 1; d <= 4096; d *= 2) {
    const EnsembleSpec spec = rabi_ensemble({1, d});
    const OutcomeRecord rec = sample_noisy(
        spec.circuits[0], nm, shots,
        derive_seed(6, "rabi", {static_cast<std::uint64_t>(d)}));
    const auto res = score_circuit(rec, std::nullopt, criterion,
                                   spec.ideal_outcome);
    if (res.pass) frontier = d;
  }
  const int dstar = static_cast<int>(
      std::floor(std::log(1.0 / 3.0) / std::log(1.0 - nm.eps1)));
  require(dstar == 2196, "closed-form d* mismatch");
  // Largest lattice depth at or below d* is 2048; allow one lattice step.
  require(frontier > 0, "no passing depth");
  const double steps =
      std::abs(std::log2(double(frontier)) - std::log2(2048.0));
  require(steps <= 1.0 + 1e-9,
          "frontier " + std::to_string(frontier) +
              " more than one lattice step from 2048");
}

// --- criterion 7 -----------------------------------------------------------

void criterion_7() {
  VolumetricGrid grid;
  grid.family = "synthetic_qv";
  for (int w = 1; w <= 9; ++w) {
    for (int d = 1; d <= 9; ++d) {
      GridEntry e;
      if (w == d) {
        e.tested = true;
        e.pass = w <= 8;
        e.score = e.pass ? 0.9 : 0.3;
        e.n_circuits = 1;
      }
      grid.entries[{w, d}] = e;
    }
  }
  const QuantumVolumeResult qv = quantum_volume(grid);
  require(qv.log2_quantum_volume == 8, "library qv != 8");
  for (const Shape& s : qv.implied_region)
    require(s.w <= 8 && s.d <= 8, "implied region outside the 8x8 corner");
  require(qv.implied_region.size() == 64, "implied region not the full corner");

  PlotSpec ps;
  ps.title = "synthetic";
  ps.show_qv = true;
  const std::string svg = render_plot(ps, {grid});
  int regions = 0;
  for (std::size_t pos = svg.find("class=\"qv-region\"");
       pos != std::string::npos;
       pos = svg.find("class=\"qv-region\"", pos + 1))
    ++regions;
  require(regions == 64, "SVG gray region cell count != 64");

  // The CLI must report the same value.
  const std::filesystem::path tmp =
      std::filesystem::temp_directory_path() / "vb_accept7_grid.json";
  {
    std::ofstream f(tmp);
    f << grid.to_json();
  }
  const std::string cmd =
      std::string(VB_CLI_PATH) + " qv --grid " + tmp.string();
  FILE* pipe = popen(cmd.c_str(), "r");
  require(pipe != nullptr, "cannot run CLI");
  char buf[64] = {0};
  const bool got = fgets(buf, sizeof(buf), pipe) != nullptr;
  const int status = pclose(pipe);
  std::filesystem::remove(tmp);
  require(got && status == 0, "CLI qv failed");
  require(std::stoi(buf) == 8, "CLI qv printed " + std::string(buf));
}

// --- criterion 8 -----------------------------------------------------------

void criterion_8() {
  NoiseModel nm;
  nm.coherent_overrotation = 0.02;
  NativeGateSet native;
  native.oneq = {GateKind::RZ, GateKind::RX};
  native.twoq = {GateKind::CNOT};

  const EnsembleSpec germs =
      germ_periodic_ensemble({1, 64}, {{GateKind::X}});
  const Circuit* zz = nullptr;
  for (const Circuit& c : germs.circuits)
    if (c.metadata.extra.at("fiducial") == "Z:Z") zz = &c;
  require(zz != nullptr, "no Z:Z fiducial circuit");
  const Circuit germ_compiled =
      compile(*zz, CompilationPolicy{PolicyVariant::PerLayer}, native);
  const double germ_score =
      density_matrix_distribution(germ_compiled, nm).prob(0);

  const EnsembleSpec rb = clifford_rb_ensemble({1, 64}, 20, 88);
  double rb_score = 0;
  for (const Circuit& c : rb.circuits) {
    const Circuit compiled =
        compile(c, CompilationPolicy{PolicyVariant::PerSegment}, native);
    rb_score += density_matrix_distribution(compiled, nm)
                    .prob(key_of_bitstring(declared_outcome(c)));
  }
  rb_score /= static_cast<double>(rb.circuits.size());

  require(germ_score < rb_score,
          "germ score " + std::to_string(germ_score) +
              " not below RB score " + std::to_string(rb_score));
}

// --- criterion 9 -----------------------------------------------------------

void criterion_9() {
  const double bound = binomial_lower_bound(689, 1000, 0.95);
  require(bound < 2.0 / 3.0, "689/1000 bound not below 2/3");
  require(bound > 0.5, "689/1000 bound not above 1/2");
  const double oracle = cp_lower_oracle(689, 1000, 0.95);
  require(std::abs(bound - oracle) < 1e-8,
          "bisection bound differs from independent oracle");
}

// --- criterion 10 ----------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void criterion_10() {
  const auto base = std::filesystem::temp_directory_path();
  const auto dir_a = base / "vb_accept10_a";
  const auto dir_b = base / "vb_accept10_b";
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);

  BenchmarkConfig cfg;
  cfg.family = "clifford_rb";
  cfg.k = 5;
  cfg.seed = 1010;
  cfg.max_w = 3;
  cfg.max_d = 4;
  cfg.noise.eps1 = 1e-3;
  cfg.noise.eps2 = 5e-3;
  cfg.shots = 400;
  cfg.criterion.variant = CircuitCriterion::Variant::CorrectOutcome;
  cfg.ensemble_rule.variant = EnsembleCriterion::Variant::MeanScoreAbove;

  cfg.output_dir = dir_a.string();
  cfg.threads = 8;
  const VolumetricGrid ga = run_benchmark(cfg);
  cfg.output_dir = dir_b.string();
  cfg.threads = 1;
  const VolumetricGrid gb = run_benchmark(cfg);

  require(ga.to_json() == gb.to_json(), "in-memory grids differ");
  require(slurp(dir_a / "grid.json") == slurp(dir_b / "grid.json"),
          "grid.json differs between 8-thread and serial runs");
  require(slurp(dir_a / "plot.svg") == slurp(dir_b / "plot.svg"),
          "plot.svg differs between 8-thread and serial runs");
  require(!slurp(dir_a / "grid.json").empty(), "empty grid artifact");
  std::filesystem::remove_all(dir_a);
  std::filesystem::remove_all(dir_b);
}

struct Criterion {
  int id;
  const char* label;
  std::function<void()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "RB inversion law holds on 2000 circuits", criterion_1},
      {2, "stabilizer and dense simulators agree", criterion_2},
      {3, "Monte Carlo sampling matches the density-matrix oracle",
       criterion_3},
      {4, "SU(4) and 1q decompositions reconstruct their inputs",
       criterion_4},
      {5, "heavy-output mass separates from uniform spoofing", criterion_5},
      {6, "simulated Rabi frontier matches the closed-form boundary",
       criterion_6},
      {7, "quantum volume extraction and plot region", criterion_7},
      {8, "periodic germs amplify coherent errors beyond RB", criterion_8},
      {9, "Clopper-Pearson bound reproduces the 689/1000 case",
       criterion_9},
      {10, "pipeline runs are byte-identical across thread counts",
       criterion_10},
  };

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    try {
      c.fn();
      std::printf("criterion %2d: PASS - %s\n", c.id, c.label);
    } catch (const std::exception& e) {
      ++failures;
      std::printf("criterion %2d: FAIL - %s (%s)\n", c.id, c.label,
                  e.what());
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
