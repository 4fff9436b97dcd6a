#include "vb/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "json.hpp"

#include "vb/compiler.hpp"
#include "vb/distribution.hpp"
#include "vb/gates.hpp"
#include "vb/rng.hpp"
#include "vb/stabilizer.hpp"

namespace vb {

namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

std::vector<int> all_qubits(int w) {
  std::vector<int> t(w);
  for (int i = 0; i < w; ++i) t[i] = i;
  return t;
}

Layer uniform_layer(int w, GateKind kind, std::vector<double> params = {}) {
  Layer l;
  for (int q = 0; q < w; ++q) l.gates.push_back(gate(kind, {q}, params));
  return l;
}

// Greedy ASAP packing of a flat gate list into layers.
std::vector<Layer> pack_layers(int w, const std::vector<GateApplication>& gs) {
  std::vector<Layer> layers;
  std::vector<int> frontier(w, 0);
  for (const GateApplication& g : gs) {
    int at = 0;
    for (int t : g.targets) at = std::max(at, frontier[t]);
    while (static_cast<int>(layers.size()) <= at) layers.emplace_back();
    layers[at].gates.push_back(g);
    for (int t : g.targets) frontier[t] = at + 1;
  }
  return layers;
}

std::shared_ptr<const Circuit> clifford_body(const CliffordTableau& T,
                                             const std::string& label) {
  auto body = std::make_shared<Circuit>(
      make_circuit(T.w, {}, pack_layers(T.w, clifford_synthesis_gates(T)), {}));
  body->metadata.family = label;
  return body;
}

std::vector<int> random_permutation(int w, Rng& rng) {
  std::vector<int> p = all_qubits(w);
  for (int i = w - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(i + 1));
    std::swap(p[i], p[j]);
  }
  return p;
}

void set_ideal(Circuit& c, const std::string& bits) {
  c.metadata.extra["ideal_outcome"] = bits;
}

std::uint64_t circuit_seed(std::uint64_t master, const std::string& family,
                           Shape s, int index) {
  return derive_seed(master, family,
                     {static_cast<std::uint64_t>(s.w),
                      static_cast<std::uint64_t>(s.d),
                      static_cast<std::uint64_t>(index)});
}

void stamp(Circuit& c, const std::string& family, Shape s,
           std::uint64_t seed, int index) {
  c.metadata.family = family;
  c.metadata.shape_w = s.w;
  c.metadata.shape_d = s.d;
  c.metadata.seed = seed;
  c.metadata.index = index;
}

// Basis-change layers for Pauli eigenstate preparation / measurement.
// prep(P): |0> -> +1 eigenstate of P; meas(P): that eigenstate -> |0>.
std::vector<Layer> prep_layers(int w, char p) {
  switch (p) {
    case 'Z':
      return {uniform_layer(w, GateKind::Id)};
    case 'X':
      return {uniform_layer(w, GateKind::H)};
    case 'Y':
      return {uniform_layer(w, GateKind::H), uniform_layer(w, GateKind::S)};
  }
  throw EnsembleArgError("unknown Pauli basis");
}

std::vector<Layer> meas_layers(int w, char p) {
  switch (p) {
    case 'Z':
      return {uniform_layer(w, GateKind::Id)};
    case 'X':
      return {uniform_layer(w, GateKind::H)};
    case 'Y':
      return {uniform_layer(w, GateKind::Sdg), uniform_layer(w, GateKind::H)};
  }
  throw EnsembleArgError("unknown Pauli basis");
}

// Phase flip of one computational basis state: X-conjugation of a
// multi-controlled Z realized as a parity-phase network (exact up to global
// phase).
std::shared_ptr<const Circuit> phase_flip_body(int w, std::uint64_t marked) {
  std::vector<GateApplication> gs;
  const auto flip_frame = [&]() {
    for (int q = 0; q < w; ++q) {
      if (!((marked >> q) & 1)) gs.push_back(gate(GateKind::X, {q}));
    }
  };
  flip_frame();
  // exp(i*pi*prod b_q) = prod over nonempty subsets S of
  // exp(i * c_S * (-1)^{parity_S}), c_S = pi * (-1)^{|S|} / 2^w.
  const std::uint64_t full = (std::uint64_t{1} << w);
  for (std::uint64_t sub = 1; sub < full; ++sub) {
    int bits = 0, top = 0;
    for (int q = 0; q < w; ++q) {
      if ((sub >> q) & 1) {
        ++bits;
        top = q;
      }
    }
    const double c = kPi * ((bits % 2 == 0) ? 1.0 : -1.0) /
                     static_cast<double>(full);
    for (int q = 0; q < w; ++q) {
      if (q != top && ((sub >> q) & 1)) gs.push_back(gate(GateKind::CNOT, {q, top}));
    }
    gs.push_back(gate(GateKind::RZ, {top}, {-2.0 * c}));
    for (int q = w - 1; q >= 0; --q) {
      if (q != top && ((sub >> q) & 1)) gs.push_back(gate(GateKind::CNOT, {q, top}));
    }
  }
  flip_frame();
  auto body = std::make_shared<Circuit>(make_circuit(w, {}, pack_layers(w, gs), {}));
  body->metadata.family = "phase_flip";
  body->metadata.extra["marked"] = bitstring_of(marked, w);
  return body;
}

}  // namespace

EnsembleSpec qv_ensemble(Shape shape, int k, std::uint64_t seed) {
  if (shape.w < 2) {
    throw ShapeUnsupportedError("qv_ensemble requires w >= 2");
  }
  EnsembleSpec spec;
  spec.variant = EnsembleVariant::Sampled;
  spec.family = "qv";
  spec.shape = shape;
  spec.measure = "per layer: uniform permutation, Haar SU(4) on consecutive pairs";
  spec.family_rule = "mean_hop_ge_2_3";
  spec.compilation_policy = "free";
  spec.seed = seed;
  spec.k = k;
  for (int i = 0; i < k; ++i) {
    const std::uint64_t cs = circuit_seed(seed, "qv", shape, i);
    Rng rng(cs);
    std::vector<Layer> central;
    for (int l = 0; l < shape.d; ++l) {
      std::vector<Layer> body_layers(2);
      body_layers[0].gates.push_back(
          permute_all_gate(random_permutation(shape.w, rng)));
      for (int j = 0; 2 * j + 1 < shape.w; ++j) {
        Eigen::Matrix4cd u = random_su4(rng);
        std::vector<cd> m(16);
        for (int r = 0; r < 4; ++r)
          for (int col = 0; col < 4; ++col) m[4 * r + col] = u(r, col);
        body_layers[1].gates.push_back(su4_gate(2 * j, 2 * j + 1, m));
      }
      if (shape.w % 2 == 1) {
        body_layers[1].gates.push_back(gate(GateKind::Id, {shape.w - 1}));
      }
      auto body = std::make_shared<Circuit>(
          make_circuit(shape.w, {}, std::move(body_layers), {}));
      body->metadata.family = "qv_layer";
      Layer l2;
      l2.gates.push_back(
          subroutine_gate("qv_layer", all_qubits(shape.w), body));
      central.push_back(std::move(l2));
    }
    Circuit c = make_circuit(shape.w, {}, std::move(central), {});
    stamp(c, "qv", shape, cs, i);
    spec.circuits.push_back(std::move(c));
  }
  return spec;
}

EnsembleSpec clifford_rb_ensemble(Shape shape, int k, std::uint64_t seed) {
  if (shape.d < 1) {
    throw ShapeUnsupportedError("clifford_rb_ensemble requires d >= 1");
  }
  EnsembleSpec spec;
  spec.variant = EnsembleVariant::Sampled;
  spec.family = "clifford_rb";
  spec.shape = shape;
  spec.measure = "uniform w-qubit Cliffords, inversion in the final layer";
  spec.family_rule = "mean_success_ge_2_3";
  spec.compilation_policy = "per_segment";
  spec.ideal_outcome = std::string(shape.w, '0');
  spec.seed = seed;
  spec.k = k;
  for (int i = 0; i < k; ++i) {
    const std::uint64_t cs = circuit_seed(seed, "clifford_rb", shape, i);
    Rng rng(cs);
    CliffordTableau total = tableau_identity(shape.w);
    std::vector<Layer> central;
    for (int l = 0; l < shape.d - 1; ++l) {
      CliffordTableau t = random_clifford(shape.w, rng);
      total = tableau_compose(t, total);
      Layer layer;
      layer.gates.push_back(subroutine_gate(
          "clifford", all_qubits(shape.w), clifford_body(t, "clifford")));
      central.push_back(std::move(layer));
    }
    Layer inv_layer;
    inv_layer.gates.push_back(subroutine_gate(
        "clifford_inverse", all_qubits(shape.w),
        clifford_body(tableau_inverse(total), "clifford_inverse")));
    central.push_back(std::move(inv_layer));
    Circuit c = make_circuit(shape.w, {}, std::move(central), {});
    std::fill(c.barriers.begin(), c.barriers.end(), std::uint8_t{1});
    stamp(c, "clifford_rb", shape, cs, i);
    set_ideal(c, std::string(shape.w, '0'));
    spec.circuits.push_back(std::move(c));
  }
  return spec;
}

EnsembleSpec direct_rb_ensemble(Shape shape, int k, std::uint64_t seed,
                                double two_qubit_density) {
  if (two_qubit_density < 0.0 || two_qubit_density > 1.0) {
    throw EnsembleArgError("two_qubit_density must lie in [0,1]");
  }
  EnsembleSpec spec;
  spec.variant = EnsembleVariant::Sampled;
  spec.family = "direct_rb";
  spec.shape = shape;
  spec.measure =
      "uniform stabilizer preparation; i.i.d. Clifford-generator layers";
  spec.family_rule = "mean_success_ge_2_3";
  spec.compilation_policy = "per_segment";
  spec.seed = seed;
  spec.k = k;
  spec.params["two_qubit_density"] = std::to_string(two_qubit_density);
  const GateKind oneq_gens[6] = {GateKind::Id, GateKind::H, GateKind::S,
                                 GateKind::X,  GateKind::Y, GateKind::Z};
  for (int i = 0; i < k; ++i) {
    const std::uint64_t cs = circuit_seed(seed, "direct_rb", shape, i);
    Rng rng(cs);
    std::vector<Layer> prefix;
    {
      Layer l;
      l.gates.push_back(subroutine_gate(
          "stabilizer_prep", all_qubits(shape.w),
          clifford_body(random_clifford(shape.w, rng), "stabilizer_prep")));
      prefix.push_back(std::move(l));
    }
    std::vector<Layer> central;
    for (int l = 0; l < shape.d; ++l) {
      Layer layer;
      const std::vector<int> p = random_permutation(shape.w, rng);
      std::vector<bool> used(shape.w, false);
      for (int j = 0; 2 * j + 1 < shape.w; ++j) {
        const int a = p[2 * j], b = p[2 * j + 1];
        if (rng.bernoulli(two_qubit_density)) {
          layer.gates.push_back(gate(GateKind::CNOT, {a, b}));
          used[a] = used[b] = true;
        }
      }
      for (int q = 0; q < shape.w; ++q) {
        if (!used[q]) {
          layer.gates.push_back(
              gate(oneq_gens[rng.uniform_int(6)], {q}));
        }
      }
      central.push_back(std::move(layer));
    }
    // Inversion: rotate the propagated stabilizer state onto a random
    // computational basis state.
    Circuit partial = make_circuit(shape.w, prefix, central, {});
    const CliffordTableau inv =
        tableau_inverse(tableau_of_circuit(partial));
    std::uint64_t outcome_bits = 0;
    for (int q = 0; q < shape.w; ++q) {
      if (rng.next_u64() & 1) outcome_bits |= std::uint64_t{1} << q;
    }
    std::vector<GateApplication> post_gates =
        clifford_synthesis_gates(inv);
    for (int q = 0; q < shape.w; ++q) {
      if ((outcome_bits >> q) & 1) post_gates.push_back(gate(GateKind::X, {q}));
    }
    auto post_body = std::make_shared<Circuit>(
        make_circuit(shape.w, {}, pack_layers(shape.w, post_gates), {}));
    post_body->metadata.family = "stabilizer_inversion";
    std::vector<Layer> postfix(1);
    postfix[0].gates.push_back(subroutine_gate(
        "stabilizer_inversion", all_qubits(shape.w), post_body));
    Circuit c = make_circuit(shape.w, std::move(prefix), std::move(central),
                             std::move(postfix));
    std::fill(c.barriers.begin(), c.barriers.end(), std::uint8_t{1});
    stamp(c, "direct_rb", shape, cs, i);
    set_ideal(c, bitstring_of(outcome_bits, shape.w));
    spec.circuits.push_back(std::move(c));
  }
  return spec;
}

EnsembleSpec simultaneous_rb_ensemble(Shape shape, int k, std::uint64_t seed) {
  if (shape.d < 1) {
    throw ShapeUnsupportedError("simultaneous_rb_ensemble requires d >= 1");
  }
  EnsembleSpec spec;
  spec.variant = EnsembleVariant::Sampled;
  spec.family = "simultaneous_rb";
  spec.shape = shape;
  spec.measure = "independent uniform 1q Cliffords per qubit, per-qubit inversion";
  spec.family_rule = "mean_success_ge_2_3";
  spec.compilation_policy = "per_segment";
  spec.ideal_outcome = std::string(shape.w, '0');
  spec.seed = seed;
  spec.k = k;
  spec.params["idle_padding"] = "none";
  for (int i = 0; i < k; ++i) {
    const std::uint64_t cs = circuit_seed(seed, "simultaneous_rb", shape, i);
    Rng rng(cs);
    // bodies[q][l]
    std::vector<std::vector<std::shared_ptr<const Circuit>>> bodies(shape.w);
    for (int q = 0; q < shape.w; ++q) {
      CliffordTableau total = tableau_identity(1);
      for (int l = 0; l < shape.d - 1; ++l) {
        CliffordTableau t = random_clifford(1, rng);
        total = tableau_compose(t, total);
        bodies[q].push_back(clifford_body(t, "clifford1q"));
      }
      bodies[q].push_back(
          clifford_body(tableau_inverse(total), "clifford1q_inverse"));
    }
    std::vector<Layer> central(shape.d);
    for (int l = 0; l < shape.d; ++l) {
      for (int q = 0; q < shape.w; ++q) {
        central[l].gates.push_back(
            subroutine_gate("clifford1q", {q}, bodies[q][l]));
      }
    }
    Circuit c = make_circuit(shape.w, {}, std::move(central), {});
    std::fill(c.barriers.begin(), c.barriers.end(), std::uint8_t{1});
    stamp(c, "simultaneous_rb", shape, cs, i);
    set_ideal(c, std::string(shape.w, '0'));
    spec.circuits.push_back(std::move(c));
  }
  return spec;
}

EnsembleSpec rabi_ensemble(Shape shape) {
  EnsembleSpec spec;
  spec.variant = EnsembleVariant::Single;
  spec.family = "rabi";
  spec.shape = shape;
  spec.family_rule = "tvd_below";
  spec.compilation_policy = "none";
  std::vector<Layer> central;
  for (int l = 0; l < shape.d; ++l) {
    central.push_back(uniform_layer(shape.w, GateKind::X));
  }
  Circuit c = make_circuit(shape.w, {}, std::move(central), {});
  stamp(c, "rabi", shape, 0, 0);
  const std::string bits(shape.w, shape.d % 2 == 0 ? '0' : '1');
  set_ideal(c, bits);
  spec.ideal_outcome = bits;
  spec.circuits.push_back(std::move(c));
  return spec;
}

EnsembleSpec ramsey_ensemble(Shape shape, double theta) {
  EnsembleSpec spec;
  spec.variant = EnsembleVariant::Single;
  spec.family = "ramsey";
  spec.shape = shape;
  spec.family_rule = "tvd_below";
  spec.compilation_policy = "none";
  spec.params["theta"] = std::to_string(theta);
  std::vector<Layer> prefix{uniform_layer(shape.w, GateKind::RY, {kPi / 2})};
  std::vector<Layer> central;
  for (int l = 0; l < shape.d; ++l) {
    central.push_back(theta == 0.0
                          ? uniform_layer(shape.w, GateKind::Id)
                          : uniform_layer(shape.w, GateKind::RZ, {theta}));
  }
  std::vector<Layer> postfix{uniform_layer(shape.w, GateKind::RY, {-kPi / 2})};
  Circuit c = make_circuit(shape.w, std::move(prefix), std::move(central),
                           std::move(postfix));
  stamp(c, "ramsey", shape, 0, 0);
  if (theta == 0.0) {
    const std::string bits(shape.w, '0');
    set_ideal(c, bits);
    spec.ideal_outcome = bits;
  }
  spec.circuits.push_back(std::move(c));
  return spec;
}

EnsembleSpec idle_tomography_ensemble(Shape shape) {
  EnsembleSpec spec;
  spec.variant = EnsembleVariant::ExplicitList;
  spec.family = "idle_tomography";
  spec.shape = shape;
  spec.family_rule = "all_pass";
  spec.compilation_policy = "none";
  const char bases[3] = {'X', 'Y', 'Z'};
  int index = 0;
  for (char p : bases) {
    for (char q : bases) {
      std::vector<Layer> central;
      for (int l = 0; l < shape.d; ++l) {
        central.push_back(uniform_layer(shape.w, GateKind::Id));
      }
      Circuit c = make_circuit(shape.w, prep_layers(shape.w, p),
                               std::move(central), meas_layers(shape.w, q));
      stamp(c, "idle_tomography", shape, 0, index++);
      c.metadata.extra["prep"] = std::string(1, p);
      c.metadata.extra["meas"] = std::string(1, q);
      if (p == q) set_ideal(c, std::string(shape.w, '0'));
      spec.circuits.push_back(std::move(c));
    }
  }
  return spec;
}

std::vector<Germ> default_germ_set() {
  return {{GateKind::X},
          {GateKind::Y},
          {GateKind::X, GateKind::Y},
          {GateKind::X, GateKind::X, GateKind::Y}};
}

EnsembleSpec germ_periodic_ensemble(Shape shape) {
  return germ_periodic_ensemble(shape, default_germ_set());
}

EnsembleSpec germ_periodic_ensemble(Shape shape,
                                    const std::vector<Germ>& germ_set) {
  if (germ_set.empty()) {
    throw EnsembleArgError("germ_periodic_ensemble: empty germ set");
  }
  EnsembleSpec spec;
  spec.variant = EnsembleVariant::ExplicitList;
  spec.family = "germ_periodic";
  spec.shape = shape;
  spec.family_rule = "all_pass";
  spec.compilation_policy = "per_layer";
  // (prep, meas) fiducial pairs over the single-qubit Pauli bases.
  const std::pair<char, char> fiducials[6] = {{'Z', 'Z'}, {'X', 'X'},
                                              {'Y', 'Y'}, {'X', 'Y'},
                                              {'Y', 'Z'}, {'Z', 'X'}};
  int index = 0;
  for (const Germ& germ : germ_set) {
    if (germ.empty()) {
      throw EnsembleArgError("germ_periodic_ensemble: empty germ");
    }
    std::string germ_name;
    for (GateKind kind : germ) germ_name += gate_kind_name(kind);
    const int len = static_cast<int>(germ.size());
    const int reps = shape.d / len;
    for (const auto& [p, q] : fiducials) {
      std::vector<Layer> central;
      for (int rep = 0; rep < reps; ++rep) {
        for (GateKind kind : germ) {
          if (kind == GateKind::X) {
            central.push_back(uniform_layer(shape.w, GateKind::RX, {kPi}));
          } else if (kind == GateKind::Y) {
            central.push_back(uniform_layer(shape.w, GateKind::RY, {kPi}));
          } else {
            central.push_back(uniform_layer(shape.w, kind));
          }
        }
      }
      Circuit c = make_circuit(shape.w, prep_layers(shape.w, p),
                               std::move(central), meas_layers(shape.w, q));
      stamp(c, "germ_periodic", shape, 0, index++);
      c.metadata.extra["germ"] = germ_name;
      c.metadata.extra["fiducial"] = std::string(1, p) + ":" + q;
      c.metadata.extra["actual_depth"] = std::to_string(reps * len);
      spec.circuits.push_back(std::move(c));
    }
  }
  return spec;
}

EnsembleSpec grover_ensemble(Shape shape, std::optional<std::uint64_t> marked,
                             int k, std::uint64_t seed) {
  if (shape.w < 2) {
    throw ShapeUnsupportedError("grover_ensemble requires w >= 2");
  }
  EnsembleSpec spec;
  spec.variant =
      marked ? EnsembleVariant::Single : EnsembleVariant::Sampled;
  spec.family = "grover";
  spec.shape = shape;
  spec.family_rule = "tvd_below";
  spec.compilation_policy = "free";
  spec.seed = seed;
  spec.k = marked ? 1 : k;
  if (!marked) spec.measure = "uniform marked basis state";
  const auto diffusion_mark = std::uint64_t{0};
  for (int i = 0; i < spec.k; ++i) {
    const std::uint64_t cs = circuit_seed(seed, "grover", shape, i);
    std::uint64_t m;
    if (marked) {
      m = *marked;
    } else {
      Rng rng(cs);
      m = rng.uniform_int(std::uint64_t{1} << shape.w);
    }
    auto oracle = phase_flip_body(shape.w, m);
    // diffusion = H^w . phase flip on |0...0> . H^w
    std::vector<Layer> diff_layers;
    diff_layers.push_back(uniform_layer(shape.w, GateKind::H));
    diff_layers.push_back(Layer{{subroutine_gate(
        "zero_phase_flip", all_qubits(shape.w),
        phase_flip_body(shape.w, diffusion_mark))}});
    diff_layers.push_back(uniform_layer(shape.w, GateKind::H));
    auto diffusion = std::make_shared<Circuit>(
        make_circuit(shape.w, {}, std::move(diff_layers), {}));
    auto diffusion_const =
        std::static_pointer_cast<const Circuit>(diffusion);
    std::vector<Layer> iter_layers(2);
    iter_layers[0].gates.push_back(
        subroutine_gate("oracle", all_qubits(shape.w), oracle));
    iter_layers[1].gates.push_back(
        subroutine_gate("diffusion", all_qubits(shape.w), diffusion_const));
    auto iteration = std::make_shared<Circuit>(
        make_circuit(shape.w, {}, std::move(iter_layers), {}));
    std::vector<Layer> central;
    for (int l = 0; l < shape.d; ++l) {
      Layer layer;
      layer.gates.push_back(subroutine_gate("grover_iteration",
                                            all_qubits(shape.w), iteration));
      central.push_back(std::move(layer));
    }
    Circuit c =
        make_circuit(shape.w, {uniform_layer(shape.w, GateKind::H)},
                     std::move(central), {});
    stamp(c, "grover", shape, cs, i);
    c.metadata.extra["marked"] = bitstring_of(m, shape.w);
    spec.circuits.push_back(std::move(c));
  }
  if (marked) spec.params["marked"] = bitstring_of(*marked, shape.w);
  return spec;
}

EnsembleSpec trotter_ensemble(Shape shape, double J, double h, double dt) {
  if (shape.w < 2) {
    throw ShapeUnsupportedError("trotter_ensemble requires w >= 2");
  }
  EnsembleSpec spec;
  spec.variant = EnsembleVariant::Single;
  spec.family = "trotter";
  spec.shape = shape;
  spec.family_rule = "tvd_below";
  spec.compilation_policy = "free";
  spec.params["J"] = std::to_string(J);
  spec.params["h"] = std::to_string(h);
  spec.params["dt"] = std::to_string(dt);
  // One first-order step: even-bond exp(i J dt ZZ), odd-bond ditto, then
  // exp(i h dt X) on every qubit; exp(i t ZZ) = CNOT RZ(-2t) CNOT.
  std::vector<Layer> step;
  for (int parity : {0, 1}) {
    Layer cn1, rz, cn2;
    for (int i = parity; i + 1 < shape.w; i += 2) {
      cn1.gates.push_back(gate(GateKind::CNOT, {i, i + 1}));
      rz.gates.push_back(gate(GateKind::RZ, {i + 1}, {-2.0 * J * dt}));
      cn2.gates.push_back(gate(GateKind::CNOT, {i, i + 1}));
    }
    if (!cn1.gates.empty()) {
      step.push_back(std::move(cn1));
      step.push_back(std::move(rz));
      step.push_back(std::move(cn2));
    }
  }
  step.push_back(uniform_layer(shape.w, GateKind::RX, {-2.0 * h * dt}));
  auto body = std::make_shared<Circuit>(
      make_circuit(shape.w, {}, std::move(step), {}));
  body->metadata.family = "trotter_step";
  auto body_const = std::static_pointer_cast<const Circuit>(body);
  std::vector<Layer> central;
  for (int l = 0; l < shape.d; ++l) {
    Layer layer;
    layer.gates.push_back(
        subroutine_gate("trotter_step", all_qubits(shape.w), body_const));
    central.push_back(std::move(layer));
  }
  Circuit c = make_circuit(shape.w, {}, std::move(central), {});
  stamp(c, "trotter", shape, 0, 0);
  spec.circuits.push_back(std::move(c));
  return spec;
}

// ---------------------------------------------------------------------------

std::string serialize_manifest(const EnsembleSpec& spec) {
  json j;
  j["family"] = spec.family;
  j["shape"] = {{"w", spec.shape.w}, {"d", spec.shape.d}};
  j["variant"] = spec.variant == EnsembleVariant::Single       ? "single"
                 : spec.variant == EnsembleVariant::ExplicitList ? "explicit_list"
                                                                 : "sampled";
  j["k"] = spec.k;
  j["seed"] = spec.seed;
  j["measure"] = spec.measure;
  j["family_rule"] = spec.family_rule;
  j["compilation_policy"] = spec.compilation_policy;
  if (spec.ideal_outcome) {
    j["ideal_outcome"] = *spec.ideal_outcome;
  } else {
    j["ideal_outcome"] = nullptr;
  }
  j["params"] = json::object();
  for (const auto& [key, value] : spec.params) j["params"][key] = value;
  j["circuits"] = json::array();
  for (const Circuit& c : spec.circuits) {
    j["circuits"].push_back(json::parse(serialize(c)));
  }
  return j.dump(2);
}

EnsembleSpec deserialize_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError{std::string("manifest: ") + e.what()};
  }
  EnsembleSpec spec;
  try {
    spec.family = j.at("family").get<std::string>();
    spec.shape.w = j.at("shape").at("w").get<int>();
    spec.shape.d = j.at("shape").at("d").get<int>();
    const std::string v = j.at("variant").get<std::string>();
    spec.variant = v == "single"        ? EnsembleVariant::Single
                   : v == "explicit_list" ? EnsembleVariant::ExplicitList
                                          : EnsembleVariant::Sampled;
    spec.k = j.at("k").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.measure = j.value("measure", std::string{});
    spec.family_rule = j.value("family_rule", std::string{});
    spec.compilation_policy = j.value("compilation_policy", std::string{});
    if (j.contains("ideal_outcome") && !j["ideal_outcome"].is_null()) {
      spec.ideal_outcome = j["ideal_outcome"].get<std::string>();
    }
    if (j.contains("params")) {
      for (const auto& [key, value] : j["params"].items()) {
        spec.params[key] = value.get<std::string>();
      }
    }
    for (const auto& e : j.at("circuits")) {
      spec.circuits.push_back(deserialize(e.dump()));
    }
  } catch (const json::exception& e) {
    throw ParseError{std::string("manifest: ") + e.what()};
  }
  return spec;
}

}  // namespace vb
