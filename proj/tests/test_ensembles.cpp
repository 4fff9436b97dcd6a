#include "doctest.h"

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "vb/compiler.hpp"
#include "vb/ensembles.hpp"
#include "vb/gates.hpp"
#include "vb/simulator.hpp"
#include "vb/stabilizer.hpp"

using namespace vb;

namespace {

std::string definite_outcome(const Circuit& c) {
  const Distribution d = ideal_distribution(c);
  for (const auto& [k, p] : d.probs)
    if (p > 1.0 - 1e-9) return bitstring_of(k, c.width);
  return "<not definite>";
}

std::string declared_outcome(const Circuit& c) {
  auto it = c.metadata.extra.find("ideal_outcome");
  return it == c.metadata.extra.end() ? "<none>" : it->second;
}

}  // namespace

TEST_CASE("qv ensemble shape, structure, and determinism") {
  const EnsembleSpec a = qv_ensemble({4, 3}, 5, 71);
  CHECK(a.family == "qv");
  CHECK(a.circuits.size() == 5);
  for (const Circuit& c : a.circuits) {
    CHECK(c.width == 4);
    CHECK(c.central.size() == 3);
    for (const Layer& l : c.central) {
      REQUIRE(l.gates.size() == 1);
      CHECK(l.gates[0].kind == GateKind::SubroutineRef);
    }
  }
  const EnsembleSpec b = qv_ensemble({4, 3}, 5, 71);
  CHECK(serialize_manifest(a) == serialize_manifest(b));
  const EnsembleSpec other = qv_ensemble({4, 3}, 5, 72);
  CHECK(serialize_manifest(a) != serialize_manifest(other));
}

TEST_CASE("clifford_rb circuits invert to the all-zeros outcome") {
  const EnsembleSpec spec = clifford_rb_ensemble({3, 6}, 8, 5);
  CHECK(spec.circuits.size() == 8);
  for (const Circuit& c : spec.circuits) {
    CHECK(c.central.size() == 6);
    for (auto bflag : c.barriers) CHECK(bflag == 1);
    CHECK(tableau_of_circuit(c) == tableau_identity(3));
    CHECK(definite_outcome(c) == declared_outcome(c));
    CHECK(declared_outcome(c) == "000");
  }
}

TEST_CASE("direct_rb declares the stabilizer-simulated outcome") {
  const EnsembleSpec spec = direct_rb_ensemble({4, 8}, 10, 21);
  CHECK(spec.circuits.size() == 10);
  for (const Circuit& c : spec.circuits) {
    const std::string declared = declared_outcome(c);
    REQUIRE(declared.size() == 4);
    CHECK(definite_outcome(c) == declared);
  }
}

TEST_CASE("simultaneous_rb runs independent single-qubit RB") {
  const EnsembleSpec spec = simultaneous_rb_ensemble({3, 5}, 6, 9);
  for (const Circuit& c : spec.circuits) {
    CHECK(definite_outcome(c) == declared_outcome(c));
  }
}

TEST_CASE("rabi ensemble alternates between all-ones and all-zeros") {
  const EnsembleSpec odd = rabi_ensemble({2, 5});
  REQUIRE(odd.circuits.size() == 1);
  CHECK(odd.ideal_outcome == "11");
  CHECK(definite_outcome(odd.circuits[0]) == "11");
  const EnsembleSpec even = rabi_ensemble({2, 6});
  CHECK(even.ideal_outcome == "00");
  CHECK(even.circuits[0].central.size() == 6);
}

TEST_CASE("ramsey at theta=0 refocuses to all zeros") {
  const EnsembleSpec spec = ramsey_ensemble({2, 4}, 0.0);
  REQUIRE(spec.circuits.size() == 1);
  CHECK(spec.ideal_outcome == "00");
  CHECK(definite_outcome(spec.circuits[0]) == "00");
  // Nonzero detuning rotates the qubit away from |0>.
  const EnsembleSpec det = ramsey_ensemble({1, 3}, 0.4);
  const Distribution d = ideal_distribution(det.circuits[0]);
  CHECK(d.prob(1) > 1e-3);
}

TEST_CASE("idle tomography emits the nine basis-pair circuits") {
  const EnsembleSpec spec = idle_tomography_ensemble({2, 3});
  CHECK(spec.circuits.size() == 9);
  int definite = 0;
  for (const Circuit& c : spec.circuits) {
    CHECK(c.central.size() == 3);
    const std::string p = c.metadata.extra.at("prep");
    const std::string q = c.metadata.extra.at("meas");
    if (p == q) {
      ++definite;
      CHECK(definite_outcome(c) == "00");
    }
  }
  CHECK(definite == 3);
}

TEST_CASE("germ-periodic circuits repeat the germ and record depth") {
  const EnsembleSpec spec = germ_periodic_ensemble({1, 7});
  // 4 default germs x 6 fiducial pairs.
  CHECK(spec.circuits.size() == 24);
  for (const Circuit& c : spec.circuits) {
    const std::string germ = c.metadata.extra.at("germ");
    const int len = static_cast<int>(germ.size());
    const int reps = 7 / len;
    CHECK(c.metadata.extra.at("actual_depth") ==
          std::to_string(reps * len));
    CHECK(static_cast<int>(c.central.size()) == reps * len);
    CHECK(c.metadata.shape_d == 7);
  }
  CHECK_THROWS_AS(germ_periodic_ensemble({1, 7}, {}), EnsembleArgError);
}

TEST_CASE("grover with one marked item is exact at width 2") {
  const EnsembleSpec spec = grover_ensemble({2, 1}, std::uint64_t{2});
  REQUIRE(spec.circuits.size() == 1);
  const Distribution d = ideal_distribution(spec.circuits[0]);
  CHECK(d.prob(2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(grover_ensemble({1, 1}, std::uint64_t{0}),
                  ShapeUnsupportedError);
}

TEST_CASE("trotter steps approximate the TFIM propagator") {
  const double J = 1.0, h = 0.7, dt = 0.02;
  const int d = 3;
  const EnsembleSpec spec = trotter_ensemble({2, d}, J, h, dt);
  REQUIRE(spec.circuits.size() == 1);
  const Eigen::MatrixXcd u = circuit_unitary(spec.circuits[0]);

  // H = -J Z0 Z1 - h (X0 + X1) on basis index b0 + 2 b1.
  Eigen::Matrix4cd H = Eigen::Matrix4cd::Zero();
  const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
  auto kron = [](const Eigen::Matrix2cd& hi, const Eigen::Matrix2cd& lo) {
    Eigen::Matrix4cd out;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out.block<2, 2>(2 * i, 2 * j) = hi(i, j) * lo;
    return out;
  };
  H -= J * kron(mat_z(), mat_z());
  H -= h * (kron(I, mat_x()) + kron(mat_x(), I));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(H);
  Eigen::Vector4cd phases;
  for (int i = 0; i < 4; ++i)
    phases(i) = std::exp(std::complex<double>(0, -es.eigenvalues()(i) * dt * d));
  const Eigen::Matrix4cd exact = es.eigenvectors() *
                                 phases.asDiagonal() *
                                 es.eigenvectors().adjoint();
  int bi = 0, bj = 0;
  double best = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(exact(i, j)) > best) {
        best = std::abs(exact(i, j));
        bi = i;
        bj = j;
      }
  const std::complex<double> ph = exact(bi, bj) / u(bi, bj);
  CHECK((exact - u * ph).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("manifests round-trip through JSON") {
  for (const EnsembleSpec& spec :
       {qv_ensemble({3, 2}, 3, 1), clifford_rb_ensemble({2, 3}, 2, 2),
        rabi_ensemble({2, 4}), idle_tomography_ensemble({1, 2})}) {
    const std::string text = serialize_manifest(spec);
    const EnsembleSpec back = deserialize_manifest(text);
    CHECK(serialize_manifest(back) == text);
    CHECK(back.family == spec.family);
    CHECK(back.circuits.size() == spec.circuits.size());
  }
}
