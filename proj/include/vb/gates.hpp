#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "vb/circuit.hpp"
#include "vb/rng.hpp"

namespace vb {

using cd = std::complex<double>;

// 2x2 and 4x4 unitaries for the native gate kinds.  Two-qubit matrices act on
// basis index 2*b(targets[0]) + b(targets[1]).

inline Eigen::Matrix2cd mat_id() { return Eigen::Matrix2cd::Identity(); }

inline Eigen::Matrix2cd mat_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

inline Eigen::Matrix2cd mat_y() {
  Eigen::Matrix2cd m;
  m << 0, cd(0, -1), cd(0, 1), 0;
  return m;
}

inline Eigen::Matrix2cd mat_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

inline Eigen::Matrix2cd mat_h() {
  Eigen::Matrix2cd m;
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

inline Eigen::Matrix2cd mat_s() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, cd(0, 1);
  return m;
}

inline Eigen::Matrix2cd mat_sdg() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, cd(0, -1);
  return m;
}

inline Eigen::Matrix2cd mat_rx(double t) {
  Eigen::Matrix2cd m;
  m << std::cos(t / 2), cd(0, -std::sin(t / 2)), cd(0, -std::sin(t / 2)),
      std::cos(t / 2);
  return m;
}

inline Eigen::Matrix2cd mat_ry(double t) {
  Eigen::Matrix2cd m;
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

inline Eigen::Matrix2cd mat_rz(double t) {
  Eigen::Matrix2cd m;
  m << std::exp(cd(0, -t / 2)), 0, 0, std::exp(cd(0, t / 2));
  return m;
}

// Euler ZYZ form: U1q(a, b, c) = RZ(a) * RY(b) * RZ(c).
inline Eigen::Matrix2cd mat_u1q(double a, double b, double c) {
  return mat_rz(a) * mat_ry(b) * mat_rz(c);
}

inline Eigen::Matrix4cd mat_cnot() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

inline Eigen::Matrix4cd mat_cz() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
  m(3, 3) = -1;
  return m;
}

inline Eigen::Matrix4cd mat_swap() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = 1;
  return m;
}

// 1-qubit unitary of a gate, with optional additive shift on every rotation
// angle (coherent over-rotation); non-rotation kinds ignore the shift.
inline Eigen::Matrix2cd one_qubit_unitary(const GateApplication& g,
                                          double angle_shift = 0.0) {
  switch (g.kind) {
    case GateKind::Id:
      return mat_id();
    case GateKind::X:
      return mat_x();
    case GateKind::Y:
      return mat_y();
    case GateKind::Z:
      return mat_z();
    case GateKind::H:
      return mat_h();
    case GateKind::S:
      return mat_s();
    case GateKind::Sdg:
      return mat_sdg();
    case GateKind::RX:
      return mat_rx(g.params.at(0) + angle_shift);
    case GateKind::RY:
      return mat_ry(g.params.at(0) + angle_shift);
    case GateKind::RZ:
      return mat_rz(g.params.at(0) + angle_shift);
    case GateKind::U1q:
      return mat_u1q(g.params.at(0) + angle_shift, g.params.at(1) + angle_shift,
                     g.params.at(2) + angle_shift);
    default:
      throw std::invalid_argument("not a one-qubit gate kind");
  }
}

inline Eigen::Matrix4cd two_qubit_unitary(const GateApplication& g) {
  switch (g.kind) {
    case GateKind::CNOT:
      return mat_cnot();
    case GateKind::CZ:
      return mat_cz();
    case GateKind::SWAP:
      return mat_swap();
    case GateKind::SU4: {
      Eigen::Matrix4cd m;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = g.matrix.at(4 * i + j);
      return m;
    }
    default:
      throw std::invalid_argument("not a two-qubit gate kind");
  }
}

// Haar-random SU(4): QR of a complex Ginibre matrix with the R-diagonal phase
// fix, then determinant normalization.
inline Eigen::Matrix4cd random_su4(Rng& rng) {
  Eigen::Matrix4cd g;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g(i, j) = cd(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Eigen::Matrix4cd> qr(g);
  Eigen::Matrix4cd q = qr.householderQ();
  Eigen::Matrix4cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < 4; ++j) {
    cd d = r(j, j);
    q.col(j) *= d / std::abs(d);
  }
  cd det = q.determinant();
  q *= std::pow(det, -0.25);
  return q;
}

inline Eigen::Matrix2cd random_u2(Rng& rng) {
  Eigen::Matrix2cd g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = cd(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(g);
  Eigen::Matrix2cd q = qr.householderQ();
  Eigen::Matrix2cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < 2; ++j) {
    cd d = r(j, j);
    q.col(j) *= d / std::abs(d);
  }
  return q;
}

}  // namespace vb
