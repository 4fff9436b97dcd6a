#include "doctest.h"

#include <map>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "vb/gates.hpp"
#include "vb/simulator.hpp"
#include "vb/stabilizer.hpp"

using namespace vb;

namespace {

std::string tableau_key(const CliffordTableau& t) {
  std::string key;
  for (const PauliRow& r : t.rows) {
    for (auto v : r.x) key += static_cast<char>('0' + v);
    for (auto v : r.z) key += static_cast<char>('0' + v);
    key += static_cast<char>('0' + r.sign);
  }
  return key;
}

// Dense matrix of a Hermitian Pauli row.
Eigen::MatrixXcd pauli_dense(const PauliRow& p) {
  const int w = static_cast<int>(p.x.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  // Qubit i occupies bit i of the basis index, so qubit 0 is the innermost
  // Kronecker factor: build outward from qubit 0, wrapping each previous
  // product inside the next qubit's 2x2 factor.
  for (int q = 0; q < w; ++q) {
    Eigen::Matrix2cd f = Eigen::Matrix2cd::Identity();
    if (p.x[q] && p.z[q])
      f = mat_y();
    else if (p.x[q])
      f = mat_x();
    else if (p.z[q])
      f = mat_z();
    Eigen::MatrixXcd next(m.rows() * 2, m.cols() * 2);
    next << f(0, 0) * m, f(0, 1) * m, f(1, 0) * m, f(1, 1) * m;
    m = next;
  }
  if (p.sign) m = -m;
  return m;
}

}  // namespace

TEST_CASE("tableau conjugation matches dense conjugation for every gate") {
  const std::vector<GateApplication> gates = {
      gate(GateKind::H, {0}),    gate(GateKind::S, {1}),
      gate(GateKind::Sdg, {0}),  gate(GateKind::X, {1}),
      gate(GateKind::Y, {0}),    gate(GateKind::Z, {1}),
      gate(GateKind::CNOT, {0, 1}), gate(GateKind::CNOT, {1, 0}),
      gate(GateKind::CZ, {0, 1}),   gate(GateKind::SWAP, {0, 1}),
  };
  const int w = 2;
  for (const GateApplication& g : gates) {
    CAPTURE(gate_kind_name(g.kind));
    const Circuit c = make_circuit(w, {}, {Layer{{g}}}, {});
    const CliffordTableau t = tableau_of_circuit(c);
    REQUIRE(tableau_is_symplectic(t));
    const Eigen::MatrixXcd u = circuit_unitary(c);
    for (int i = 0; i < 2 * w; ++i) {
      PauliRow gen(w);
      if (i < w)
        gen.x[i] = 1;
      else
        gen.z[i - w] = 1;
      const Eigen::MatrixXcd expect = u * pauli_dense(gen) * u.adjoint();
      const Eigen::MatrixXcd got = pauli_dense(t.rows[i]);
      CHECK((expect - got).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("compose and inverse behave as a group") {
  Rng rng(5150);
  for (int it = 0; it < 50; ++it) {
    const int w = 1 + static_cast<int>(rng.uniform_int(4));
    const CliffordTableau a = random_clifford(w, rng);
    const CliffordTableau b = random_clifford(w, rng);
    REQUIRE(tableau_is_symplectic(a));
    CHECK(tableau_compose(a, tableau_inverse(a)) == tableau_identity(w));
    CHECK(tableau_compose(tableau_inverse(a), a) == tableau_identity(w));
    // Associativity through an image: (a.b) applied to a random Pauli.
    PauliRow p(w);
    for (int q = 0; q < w; ++q) {
      p.x[q] = rng.bernoulli(0.5);
      p.z[q] = rng.bernoulli(0.5);
    }
    const PauliRow lhs = tableau_image(tableau_compose(a, b), p);
    const PauliRow rhs = tableau_image(a, tableau_image(b, p));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("random_clifford covers the width-1 group uniformly") {
  Rng rng(31337);
  const int classes = 24;
  const int per = 400;
  std::map<std::string, int> counts;
  for (int i = 0; i < classes * per; ++i)
    ++counts[tableau_key(random_clifford(1, rng))];
  CHECK(counts.size() == classes);
  double chi2 = 0;
  for (const auto& [k, n] : counts) {
    const double diff = n - per;
    chi2 += diff * diff / per;
  }
  // df = 23: mean 23, sd ~ 6.8; generous deterministic bound.
  CHECK(chi2 < 70.0);
}

TEST_CASE("random_clifford covers the width-2 group uniformly"
          * doctest::timeout(120)) {
  Rng rng(271828);
  const int classes = 11520;
  const int per = 20;
  std::map<std::string, int> counts;
  for (int i = 0; i < classes * per; ++i)
    ++counts[tableau_key(random_clifford(2, rng))];
  CHECK(counts.size() == classes);
  double chi2 = 0;
  for (const auto& [k, n] : counts) {
    const double diff = n - per;
    chi2 += diff * diff / per;
  }
  // df = 11519, sd = sqrt(2 df) ~ 152; accept within ~6 sd.
  CHECK(chi2 > 11519.0 - 950.0);
  CHECK(chi2 < 11519.0 + 950.0);
}

TEST_CASE("stabilizer distribution of GHZ state") {
  Circuit c = make_circuit(
      3, {},
      {Layer{{gate(GateKind::H, {0})}}, Layer{{gate(GateKind::CNOT, {0, 1})}},
       Layer{{gate(GateKind::CNOT, {1, 2})}}},
      {});
  const Distribution d = stabilizer_distribution(c);
  CHECK(d.probs.size() == 2);
  CHECK(d.prob(0b000) == doctest::Approx(0.5));
  CHECK(d.prob(0b111) == doctest::Approx(0.5));
}

TEST_CASE("tableau_of_circuit expands subroutines") {
  auto body = std::make_shared<Circuit>(
      make_circuit(2, {}, {Layer{{gate(GateKind::CNOT, {0, 1})}}}, {}));
  const Circuit outer = make_circuit(
      3, {},
      {Layer{{subroutine_gate("cx", {2, 1},
                              std::static_pointer_cast<const Circuit>(
                                  body))}}},
      {});
  const Circuit direct =
      make_circuit(3, {}, {Layer{{gate(GateKind::CNOT, {2, 1})}}}, {});
  CHECK(tableau_of_circuit(outer) == tableau_of_circuit(direct));
}

TEST_CASE("non-Clifford gates are rejected by the tableau path") {
  const Circuit c =
      make_circuit(1, {}, {Layer{{gate(GateKind::RZ, {0}, {0.3})}}}, {});
  CHECK_THROWS_AS(tableau_of_circuit(c), UnsupportedGateError);
}
