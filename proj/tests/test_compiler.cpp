#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "vb/compiler.hpp"
#include "vb/gates.hpp"
#include "vb/rng.hpp"
#include "vb/simulator.hpp"
#include "vb/stabilizer.hpp"

using namespace vb;

namespace {

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

// Max-entry difference after aligning global phase.
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

Circuit random_compilable_circuit(Rng& rng, int w, int d) {
  std::vector<Layer> central;
  for (int l = 0; l < d; ++l) {
    Layer layer;
    const auto roll = rng.uniform_int(6);
    if (roll == 0) {
      const Eigen::Matrix4cd u = random_su4(rng);
      std::vector<std::complex<double>> m(16);
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m[4 * r + c] = u(r, c);
      int a = static_cast<int>(rng.uniform_int(w));
      int b = static_cast<int>(rng.uniform_int(w - 1));
      if (b >= a) ++b;
      layer.gates.push_back(su4_gate(a, b, m));
    } else if (roll == 1) {
      std::vector<int> perm(w);
      for (int i = 0; i < w; ++i) perm[i] = i;
      for (int i = w - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(i + 1));
        std::swap(perm[i], perm[j]);
      }
      layer.gates.push_back(permute_all_gate(perm));
    } else if (roll == 2) {
      layer.gates.push_back(gate(GateKind::CNOT, {0, 1}));
      if (w > 2) layer.gates.push_back(gate(GateKind::H, {2}));
    } else if (roll == 3) {
      layer.gates.push_back(
          gate(GateKind::RY, {static_cast<int>(rng.uniform_int(w))},
               {rng.uniform() * 6.28 - 3.14}));
    } else if (roll == 4) {
      layer.gates.push_back(gate(GateKind::SWAP, {0, 1}));
    } else {
      layer.gates.push_back(
          gate(GateKind::S, {static_cast<int>(rng.uniform_int(w))}));
    }
    central.push_back(std::move(layer));
  }
  Circuit c = make_circuit(w, {}, std::move(central), {});
  for (std::size_t i = 0; i < c.barriers.size(); ++i)
    c.barriers[i] = rng.bernoulli(0.3) ? 1 : 0;
  return c;
}

bool gate_is_native(const GateApplication& g, const NativeGateSet& native) {
  if (g.kind == GateKind::Id) return true;
  if (is_one_qubit_kind(g.kind)) return native.allows_oneq(g.kind);
  if (is_two_qubit_kind(g.kind)) return native.allows_twoq(g.kind);
  return false;
}

bool circuit_is_native(const Circuit& c, const NativeGateSet& native) {
  for (const auto* block : {&c.prefix, &c.central, &c.postfix})
    for (const Layer& l : *block)
      for (const GateApplication& g : l.gates)
        if (!gate_is_native(g, native)) return false;
  return true;
}

}  // namespace

TEST_CASE("decompose_1q canonical cases") {
  const ZyzDecomposition id = decompose_1q(Eigen::Matrix2cd::Identity());
  CHECK(id.alpha == doctest::Approx(0.0));
  CHECK(id.beta == doctest::Approx(0.0));
  CHECK(id.gamma == doctest::Approx(0.0));
  CHECK(id.phase == doctest::Approx(0.0));

  const ZyzDecomposition ry = decompose_1q(mat_ry(0.7));
  CHECK(ry.alpha == doctest::Approx(0.0));
  CHECK(ry.beta == doctest::Approx(0.7));
  CHECK(ry.gamma == doctest::Approx(0.0));
}

TEST_CASE("decompose_1q reconstructs random unitaries") {
  Rng rng(808);
  for (int it = 0; it < 300; ++it) {
    const Eigen::Matrix2cd u = random_u2(rng);
    const ZyzDecomposition z = decompose_1q(u);
    const Eigen::Matrix2cd rec = std::exp(std::complex<double>(0, z.phase)) *
                                 mat_rz(z.alpha) * mat_ry(z.beta) *
                                 mat_rz(z.gamma);
    CHECK((u - rec).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("decompose_1q rejects non-unitary input") {
  Eigen::Matrix2cd m;
  m << 1, 1, 0, 1;
  CHECK_THROWS_AS(decompose_1q(m), NonUnitaryError);
}

TEST_CASE("decompose_su4 CNOT counts for special gates") {
  const Su4Decomposition id = decompose_su4(Eigen::Matrix4cd::Identity());
  CHECK(id.cnot_count == 0);

  const Su4Decomposition cx = decompose_su4(mat_cnot());
  CHECK(cx.cnot_count == 1);
  CHECK(phase_aligned_error(mat_cnot(), gates_unitary(2, cx.gates)) < 1e-8);

  const Su4Decomposition cz = decompose_su4(mat_cz());
  CHECK(cz.cnot_count == 1);
  CHECK(phase_aligned_error(mat_cz(), gates_unitary(2, cz.gates)) < 1e-8);

  const Su4Decomposition sw = decompose_su4(mat_swap());
  CHECK(sw.cnot_count == 3);
  CHECK(phase_aligned_error(mat_swap(), gates_unitary(2, sw.gates)) < 1e-8);

  // Local-only gate: zero CNOTs.
  Eigen::Matrix4cd local = Eigen::Matrix4cd::Zero();
  const Eigen::Matrix2cd a = mat_ry(0.3), b = mat_rz(1.1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      local.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  const Su4Decomposition lo = decompose_su4(local);
  CHECK(lo.cnot_count == 0);
  CHECK(phase_aligned_error(local, gates_unitary(2, lo.gates)) < 1e-8);
}

TEST_CASE("decompose_su4 reconstructs Haar-random unitaries with 3 CNOTs") {
  Rng rng(404);
  for (int it = 0; it < 100; ++it) {
    const Eigen::Matrix4cd u = random_su4(rng);
    const Su4Decomposition dec = decompose_su4(u);
    CHECK(dec.cnot_count == 3);
    CHECK(phase_aligned_error(u, gates_unitary(2, dec.gates)) < 1e-8);
  }
}

TEST_CASE("clifford_synthesis_gates round-trips random tableaus exactly") {
  Rng rng(616);
  for (int it = 0; it < 200; ++it) {
    const CliffordTableau t = random_clifford(3, rng);
    const auto gs = clifford_synthesis_gates(t);
    std::vector<Layer> layers;
    for (const GateApplication& g : gs) layers.push_back(Layer{{g}});
    const Circuit c = make_circuit(3, {}, std::move(layers), {});
    CHECK(tableau_of_circuit(c) == t);
  }
}

TEST_CASE("clifford_synthesis respects the native alphabet") {
  Rng rng(99);
  NativeGateSet native;
  native.oneq = {GateKind::H, GateKind::S, GateKind::Sdg, GateKind::RZ};
  native.twoq = {GateKind::CZ};
  for (int it = 0; it < 20; ++it) {
    const CliffordTableau t = random_clifford(3, rng);
    const Circuit c = clifford_synthesis(t, native);
    CHECK(circuit_is_native(c, native));
    CHECK(tableau_of_circuit(c) == t);
  }
  NativeGateSet weak;
  weak.oneq = {GateKind::RZ, GateKind::RX};
  weak.twoq = {GateKind::CNOT};
  CHECK_THROWS_AS(clifford_synthesis(random_clifford(2, rng), weak),
                  NonGeneratingGateSetError);
}

TEST_CASE("segment_by_barriers splits at interior barriers only") {
  Circuit c = make_circuit(2, {}, std::vector<Layer>(3), {});
  c.barriers = {1, 0, 1, 1};
  const auto segs = segment_by_barriers(c);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].first == 0);
  CHECK(segs[0].last == 1);
  CHECK(segs[1].first == 2);
  CHECK(segs[1].last == 2);
}

TEST_CASE("compile preserves the unitary under every policy") {
  Rng rng(1234);
  const NativeGateSet native = default_native_gate_set();
  for (const PolicyVariant pv :
       {PolicyVariant::Free, PolicyVariant::PerSegment,
        PolicyVariant::PerLayer}) {
    for (int it = 0; it < 8; ++it) {
      const Circuit c = random_compilable_circuit(rng, 3, 5);
      const Circuit out = compile(c, CompilationPolicy{pv}, native);
      CHECK(circuit_is_native(out, native));
      CHECK(phase_aligned_error(circuit_unitary(c), circuit_unitary(out)) <
            1e-7);
      CHECK(out.metadata.extra.count("policy") == 1);
      CHECK(out.metadata.extra.count("physical_depth") == 1);
    }
  }
}

TEST_CASE("per-segment compilation keeps barriers as fences") {
  Rng rng(4321);
  Circuit c = random_compilable_circuit(rng, 3, 6);
  c.barriers = {1, 0, 0, 1, 0, 0, 1};
  const Circuit out =
      compile(c, CompilationPolicy{PolicyVariant::PerSegment},
              default_native_gate_set());
  // The compiled circuit must still contain interior fences (the original
  // had two interior segments' worth).
  int interior = 0;
  for (std::size_t i = 1; i + 1 < out.barriers.size(); ++i)
    if (out.barriers[i]) ++interior;
  CHECK(interior == 1);
  CHECK(phase_aligned_error(circuit_unitary(c), circuit_unitary(out)) < 1e-7);
}

TEST_CASE("CNOT is rebuilt from CZ when CNOT is not native") {
  NativeGateSet native;
  native.oneq = {GateKind::RZ, GateKind::RX, GateKind::H, GateKind::S,
                 GateKind::Sdg};
  native.twoq = {GateKind::CZ};
  const Circuit c = make_circuit(
      2, {}, {Layer{{gate(GateKind::CNOT, {0, 1})}}}, {});
  const Circuit out =
      compile(c, CompilationPolicy{PolicyVariant::PerSegment}, native);
  CHECK(circuit_is_native(out, native));
  CHECK(phase_aligned_error(circuit_unitary(c), circuit_unitary(out)) < 1e-8);
}

TEST_CASE("policy none rejects non-native gates") {
  const Circuit c = make_circuit(
      1, {}, {Layer{{gate(GateKind::RY, {0}, {0.5})}}}, {});
  CHECK_THROWS_AS(compile(c, CompilationPolicy{PolicyVariant::None},
                          default_native_gate_set()),
                  NonNativeGateError);
}

TEST_CASE("connectivity constraints are enforced") {
  NativeGateSet native = default_native_gate_set();
  native.edges = std::vector<std::pair<int, int>>{{0, 1}};
  const Circuit c = make_circuit(
      3, {}, {Layer{{gate(GateKind::CNOT, {0, 2})}}}, {});
  CHECK_THROWS_AS(
      compile(c, CompilationPolicy{PolicyVariant::None}, native),
      ConnectivityViolationError);
}

TEST_CASE("physical depth counts central layers") {
  const Circuit c = make_circuit(
      2, {Layer{{gate(GateKind::H, {0})}}},
      std::vector<Layer>(4), {Layer{{gate(GateKind::H, {0})}}});
  CHECK(physical_depth(c) == 4);
  const DepthBreakdown b = physical_depth_breakdown(c);
  CHECK(b.prefix == 1);
  CHECK(b.central == 4);
  CHECK(b.postfix == 1);
}
