#include "vb/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "json.hpp"

#include "vb/gates.hpp"

namespace vb {

namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

}  // namespace

const char* policy_name(PolicyVariant v) {
  switch (v) {
    case PolicyVariant::Free:
      return "free";
    case PolicyVariant::PerSegment:
      return "per_segment";
    case PolicyVariant::PerLayer:
      return "per_layer";
    case PolicyVariant::None:
      return "none";
  }
  return "?";
}

std::optional<PolicyVariant> policy_from_name(const std::string& name) {
  if (name == "free") return PolicyVariant::Free;
  if (name == "per_segment") return PolicyVariant::PerSegment;
  if (name == "per_layer") return PolicyVariant::PerLayer;
  if (name == "none") return PolicyVariant::None;
  return std::nullopt;
}

bool NativeGateSet::allows_oneq(GateKind k) const {
  return std::find(oneq.begin(), oneq.end(), k) != oneq.end();
}

bool NativeGateSet::allows_twoq(GateKind k) const {
  return std::find(twoq.begin(), twoq.end(), k) != twoq.end();
}

bool NativeGateSet::allows_edge(int a, int b) const {
  if (!edges) return true;
  for (const auto& [x, y] : *edges) {
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

std::string NativeGateSet::to_json() const {
  json j;
  j["oneq"] = json::array();
  for (GateKind k : oneq) j["oneq"].push_back(gate_kind_name(k));
  j["twoq"] = json::array();
  for (GateKind k : twoq) j["twoq"].push_back(gate_kind_name(k));
  if (edges) {
    j["edges"] = json::array();
    for (const auto& [a, b] : *edges) j["edges"].push_back({a, b});
  } else {
    j["edges"] = nullptr;
  }
  if (max_parallel_twoq) {
    j["max_parallel_twoq"] = *max_parallel_twoq;
  } else {
    j["max_parallel_twoq"] = nullptr;
  }
  return j.dump(2);
}

NativeGateSet NativeGateSet::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError{std::string("native gate set: ") + e.what()};
  }
  NativeGateSet n;
  auto read_kinds = [&](const char* field, std::vector<GateKind>& out) {
    if (!j.contains(field) || !j[field].is_array()) {
      throw ParseError{std::string("native gate set: missing array field '") +
                       field + "'"};
    }
    for (const auto& e : j[field]) {
      auto k = gate_kind_from_name(e.get<std::string>());
      if (!k) {
        throw ParseError{"native gate set: unknown gate kind '" +
                         e.get<std::string>() + "'"};
      }
      out.push_back(*k);
    }
  };
  read_kinds("oneq", n.oneq);
  read_kinds("twoq", n.twoq);
  if (n.oneq.empty() && n.twoq.empty()) {
    throw ParseError{"native gate set: empty"};
  }
  if (j.contains("edges") && !j["edges"].is_null()) {
    std::vector<std::pair<int, int>> es;
    for (const auto& e : j["edges"]) {
      es.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    n.edges = std::move(es);
  }
  if (j.contains("max_parallel_twoq") && !j["max_parallel_twoq"].is_null()) {
    n.max_parallel_twoq = j["max_parallel_twoq"].get<int>();
  }
  return n;
}

NativeGateSet default_native_gate_set() {
  NativeGateSet n;
  n.oneq = {GateKind::RZ, GateKind::RX, GateKind::H,
            GateKind::S,  GateKind::Sdg, GateKind::X};
  n.twoq = {GateKind::CNOT, GateKind::CZ};
  return n;
}

std::vector<Segment> segment_by_barriers(const Circuit& c) {
  const int d = static_cast<int>(c.central.size());
  std::vector<Segment> out;
  int start = 0;
  for (int i = 1; i <= d; ++i) {
    const bool cut = (i == d) || (i < static_cast<int>(c.barriers.size()) &&
                                  c.barriers[i] != 0);
    if (cut) {
      if (i > start) out.push_back({start, i - 1});
      start = i;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// One-qubit ZYZ decomposition.

ZyzDecomposition decompose_1q(const Eigen::Matrix2cd& u) {
  const Eigen::Matrix2cd err = u.adjoint() * u - Eigen::Matrix2cd::Identity();
  if (err.cwiseAbs().maxCoeff() > 1e-10) {
    throw NonUnitaryError("decompose_1q: input is not unitary");
  }
  const cd det = u.determinant();
  const double phi0 = std::arg(det) / 2.0;
  const Eigen::Matrix2cd v = u * std::exp(cd(0, -phi0));
  const double cos_h = std::abs(v(0, 0));
  const double sin_h = std::abs(v(1, 0));
  ZyzDecomposition z;
  z.beta = 2.0 * std::atan2(sin_h, cos_h);
  const double sum = cos_h > 1e-13 ? 2.0 * std::arg(v(1, 1)) : 0.0;
  const double diff = sin_h > 1e-13 ? 2.0 * std::arg(v(1, 0)) : 0.0;
  z.alpha = (sum + diff) / 2.0;
  z.gamma = (sum - diff) / 2.0;
  // Recover the exact phase from the largest reconstructed entry.
  const Eigen::Matrix2cd r = mat_u1q(z.alpha, z.beta, z.gamma);
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (std::abs(r(i, j)) > best) {
        best = std::abs(r(i, j));
        bi = i;
        bj = j;
      }
    }
  }
  z.phase = std::arg(u(bi, bj) / r(bi, bj));
  return z;
}

// ---------------------------------------------------------------------------
// Two-qubit KAK decomposition.

namespace {

// Magic basis: columns are the Bell states Phi+, i*Psi+, Psi-, i*Phi-.
Eigen::Matrix4cd magic_basis() {
  Eigen::Matrix4cd e;
  const double s = 1.0 / std::sqrt(2.0);
  e << cd(s, 0), 0, 0, cd(0, s),  //
      0, cd(0, s), cd(s, 0), 0,   //
      0, cd(0, s), cd(-s, 0), 0,  //
      cd(s, 0), 0, 0, cd(0, -s);
  return e;
}

// Splits a Schmidt-rank-1 4x4 unitary into its one-qubit tensor factors.
std::pair<Eigen::Matrix2cd, Eigen::Matrix2cd> factor_local(
    const Eigen::Matrix4cd& l) {
  Eigen::Matrix4cd r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int m = 0; m < 2; ++m)
          r(2 * i + j, 2 * k + m) = l(2 * i + k, 2 * j + m);
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(
      r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) > 1e-8) {
    throw NonUnitaryError("factor_local: operator is not a tensor product");
  }
  const double s0 = std::sqrt(svd.singularValues()(0));
  Eigen::Matrix2cd a, b;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      a(i, j) = svd.matrixU()(2 * i + j, 0) * s0;
      b(i, j) = std::conj(svd.matrixV()(2 * i + j, 0)) * s0;
    }
  }
  return {a, b};
}

struct KakResult {
  Eigen::Matrix2cd a1, b1;  // left locals, qubit 0 / qubit 1
  double ta = 0, tb = 0, tc = 0;
  Eigen::Matrix2cd a2, b2;  // right locals
};

// U ~ (a1 (x) b1) * exp(i(ta XX + tb YY + tc ZZ)) * (a2 (x) b2) up to phase.
KakResult kak_decompose(const Eigen::Matrix4cd& u) {
  const Eigen::Matrix4cd e = magic_basis();
  const cd det = u.determinant();
  const Eigen::Matrix4cd us = u * std::pow(det, -0.25);
  const Eigen::Matrix4cd m = e.adjoint() * us * e;
  const Eigen::Matrix4cd m2 = m.transpose() * m;
  Eigen::Matrix4d p;
  bool ok = false;
  for (double t : {0.31830988618, 0.7123889803, 1.2357, 0.0567, 1.9113}) {
    Eigen::Matrix4d b = m2.real() + t * m2.imag();
    b = 0.5 * (b + b.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(b);
    p = es.eigenvectors();
    Eigen::Matrix4cd d = p.transpose() * m2 * p;
    double off = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) off = std::max(off, std::abs(d(i, j)));
    if (off < 1e-9) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    throw NonUnitaryError("kak_decompose: diagonalization failed");
  }
  if (p.determinant() < 0) p.col(0) *= -1.0;
  const Eigen::Matrix4cd dm = p.transpose() * m2 * p;
  double th[4];
  for (int j = 0; j < 3; ++j) th[j] = std::arg(dm(j, j)) / 2.0;
  th[3] = -(th[0] + th[1] + th[2]);
  Eigen::Matrix4cd dh_inv = Eigen::Matrix4cd::Zero();
  for (int j = 0; j < 4; ++j) dh_inv(j, j) = std::exp(cd(0, -th[j]));
  const Eigen::Matrix4cd q1 = m * p.cast<cd>() * dh_inv;
  const Eigen::Matrix4cd l1 = e * q1 * e.adjoint();
  const Eigen::Matrix4cd l2 =
      e * p.transpose().cast<cd>() * e.adjoint();
  KakResult r;
  r.ta = (th[0] + th[1]) / 2.0;
  r.tb = (th[1] + th[3]) / 2.0;
  r.tc = (th[0] + th[3]) / 2.0;
  std::tie(r.a1, r.b1) = factor_local(l1);
  std::tie(r.a2, r.b2) = factor_local(l2);
  return r;
}

enum Axis { AX = 0, AY = 1, AZ = 2 };

// Appends, in operator order (leftmost factor first), gates realizing the
// single-qubit Clifford that conjugates Z to the given axis: Q Z Q^dag = axis.
void axis_frame(Axis axis, int q, std::vector<GateApplication>& ops) {
  if (axis == AZ) return;
  if (axis == AX) {
    ops.push_back(gate(GateKind::H, {q}));
  } else {
    // (S H) Z (S H)^dag = Y
    ops.push_back(gate(GateKind::S, {q}));
    ops.push_back(gate(GateKind::H, {q}));
  }
}

void axis_frame_dag(Axis axis, int q, std::vector<GateApplication>& ops) {
  if (axis == AZ) return;
  if (axis == AX) {
    ops.push_back(gate(GateKind::H, {q}));
  } else {
    ops.push_back(gate(GateKind::H, {q}));
    ops.push_back(gate(GateKind::Sdg, {q}));
  }
}

GateKind pauli_kind(Axis a) {
  return a == AX ? GateKind::X : a == AY ? GateKind::Y : GateKind::Z;
}

}  // namespace

Su4Decomposition decompose_su4(const Eigen::Matrix4cd& u, int q0, int q1) {
  const Eigen::Matrix4cd uerr =
      u.adjoint() * u - Eigen::Matrix4cd::Identity();
  if (uerr.cwiseAbs().maxCoeff() > 1e-10) {
    throw NonUnitaryError("decompose_su4: input is not unitary");
  }
  const KakResult kak = kak_decompose(u);

  // Operator-order gate list; reversed into time order at the end.
  std::vector<GateApplication> ops;
  int cnots = 0;
  const auto emit_local = [&](const Eigen::Matrix2cd& l, int q) {
    const ZyzDecomposition z = decompose_1q(l);
    if (std::abs(z.alpha) + std::abs(z.beta) + std::abs(z.gamma) < 1e-12)
      return;
    ops.push_back(gate(GateKind::U1q, {q}, {z.alpha, z.beta, z.gamma}));
  };
  const auto cnot = [&]() {
    ops.push_back(gate(GateKind::CNOT, {q0, q1}));
    ++cnots;
  };

  emit_local(kak.a1, q0);
  emit_local(kak.b1, q1);

  // Split each interaction angle t = k*(pi/2) + r with r in [-pi/4, pi/4];
  // the pi/2 multiples are local Pauli factors since exp(i pi/2 P(x)P) = iP(x)P.
  const double ts[3] = {kak.ta, kak.tb, kak.tc};
  double r[3];
  for (int i = 0; i < 3; ++i) {
    const long k = std::lround(ts[i] * 2.0 / kPi);
    r[i] = ts[i] - static_cast<double>(k) * kPi / 2.0;
    if (k % 2 != 0) {
      ops.push_back(gate(pauli_kind(static_cast<Axis>(i)), {q0}));
      ops.push_back(gate(pauli_kind(static_cast<Axis>(i)), {q1}));
    }
  }

  const double tol = 1e-9;
  const bool zero[3] = {std::abs(r[0]) < tol, std::abs(r[1]) < tol,
                        std::abs(r[2]) < tol};
  const int nz = (!zero[0]) + (!zero[1]) + (!zero[2]);

  if (nz == 0) {
    // purely local
  } else if (nz == 1 &&
             std::abs(std::abs(r[zero[0] ? (zero[1] ? 2 : 1) : 0]) -
                      kPi / 4.0) < tol) {
    // Locally a CNOT: exp(+-i pi/4 P(x)P), one entangling gate.
    const Axis ax = static_cast<Axis>(zero[0] ? (zero[1] ? 2 : 1) : 0);
    const bool neg = r[ax] < 0;
    // exp(i pi/4 ZZ) ~ (RZ(-pi/2) (x) RZ(-pi/2)) * CZ up to phase;
    // CZ = (I (x) H) CNOT (I (x) H); sign flip by conjugating with X/Z on q0.
    const GateKind flip =
        ax == AZ ? GateKind::X : GateKind::Z;  // anticommutes with the axis
    if (neg) ops.push_back(gate(flip, {q0}));
    axis_frame(ax, q0, ops);
    axis_frame(ax, q1, ops);
    ops.push_back(gate(GateKind::RZ, {q0}, {-kPi / 2}));
    ops.push_back(gate(GateKind::RZ, {q1}, {-kPi / 2}));
    ops.push_back(gate(GateKind::H, {q1}));
    cnot();
    ops.push_back(gate(GateKind::H, {q1}));
    axis_frame_dag(ax, q0, ops);
    axis_frame_dag(ax, q1, ops);
    if (neg) ops.push_back(gate(flip, {q0}));
  } else if (zero[0] || zero[1] || zero[2]) {
    // One vanishing axis: two CNOTs.  Conjugating by Q (x) Q permutes the
    // interaction axes without sign changes; move the zero axis onto YY and
    // use exp(i(a XX + c ZZ)) = CNOT (RX(-2a) (x) RZ(-2c)) CNOT.
    double a, c;
    int qk;  // 0: none, 1: S, 2: S H (frame Q applied to both qubits)
    if (zero[1]) {
      qk = 0;
      a = r[0];
      c = r[2];
    } else if (zero[0]) {
      qk = 1;  // Q = S maps X -> Y, so the XX zero lands on YY
      a = r[1];
      c = r[2];
    } else {
      qk = 2;  // Q = S H maps Z -> Y (X -> Z, Y -> X)
      a = r[1];
      c = r[0];
    }
    const auto frame = [&](bool dag) {
      for (int q : {q0, q1}) {
        if (qk == 1) {
          ops.push_back(gate(dag ? GateKind::Sdg : GateKind::S, {q}));
        } else if (qk == 2) {
          if (!dag) {
            ops.push_back(gate(GateKind::S, {q}));
            ops.push_back(gate(GateKind::H, {q}));
          } else {
            ops.push_back(gate(GateKind::H, {q}));
            ops.push_back(gate(GateKind::Sdg, {q}));
          }
        }
      }
    };
    frame(true);  // N = Q^dag N' Q with N' carrying the zero on YY
    cnot();
    ops.push_back(gate(GateKind::RX, {q0}, {-2.0 * a}));
    ops.push_back(gate(GateKind::RZ, {q1}, {-2.0 * c}));
    cnot();
    frame(false);
  } else {
    // Generic class: exact three-CNOT core,
    // N(a,b,c) = CNOT (I(x)H) RX(-2a)_0 RX(-2c)_1 CNOT RX(2b)_0
    //            (Sdg (x) S) CNOT (I (x) Sdg H).
    cnot();
    ops.push_back(gate(GateKind::H, {q1}));
    ops.push_back(gate(GateKind::RX, {q0}, {-2.0 * r[0]}));
    ops.push_back(gate(GateKind::RX, {q1}, {-2.0 * r[2]}));
    cnot();
    ops.push_back(gate(GateKind::RX, {q0}, {2.0 * r[1]}));
    ops.push_back(gate(GateKind::Sdg, {q0}));
    ops.push_back(gate(GateKind::S, {q1}));
    cnot();
    ops.push_back(gate(GateKind::Sdg, {q1}));
    ops.push_back(gate(GateKind::H, {q1}));
  }

  emit_local(kak.a2, q0);
  emit_local(kak.b2, q1);

  std::reverse(ops.begin(), ops.end());
  return Su4Decomposition{std::move(ops), cnots};
}

// ---------------------------------------------------------------------------
// Clifford synthesis.

std::vector<GateApplication> clifford_synthesis_gates(
    const CliffordTableau& T) {
  const int w = T.w;
  CliffordTableau c = T;
  std::vector<GateApplication> applied;
  const auto put = [&](GateKind k, std::vector<int> tg) {
    GateApplication g = gate(k, std::move(tg));
    c = tableau_apply_gate(std::move(c), g);
    applied.push_back(std::move(g));
  };

  for (int j = 0; j < w; ++j) {
    // Reduce the X_j image to +-X_j.
    {
      for (int k = j; k < w; ++k) {
        if (c.rows[j].x[k] && c.rows[j].z[k]) {
          put(GateKind::S, {k});
        } else if (!c.rows[j].x[k] && c.rows[j].z[k]) {
          put(GateKind::H, {k});
        }
      }
      int k0 = -1;
      for (int k = j; k < w; ++k) {
        if (c.rows[j].x[k]) {
          k0 = k;
          break;
        }
      }
      for (int k = k0 + 1; k < w; ++k) {
        if (c.rows[j].x[k]) put(GateKind::CNOT, {k0, k});
      }
      if (k0 != j) put(GateKind::SWAP, {k0, j});
    }
    // Reduce the Z_j image to +-Z_j; its qubit-j entry is Z or Y because it
    // must anticommute with the fixed X_j row.
    {
      for (int k = j + 1; k < w; ++k) {
        if (c.rows[w + j].x[k] && c.rows[w + j].z[k]) put(GateKind::S, {k});
        if (c.rows[w + j].x[k] && !c.rows[w + j].z[k]) put(GateKind::H, {k});
        if (c.rows[w + j].z[k]) put(GateKind::CNOT, {k, j});
      }
      if (c.rows[w + j].x[j]) {
        // Y residue at qubit j: H S H conjugates Y -> Z keeping X fixed.
        put(GateKind::H, {j});
        put(GateKind::S, {j});
        put(GateKind::H, {j});
      }
    }
    if (c.rows[j].sign) put(GateKind::Z, {j});
    if (c.rows[w + j].sign) put(GateKind::X, {j});
  }

  // The applied gates reduce T to the identity, so the synthesized circuit is
  // their inverses in reverse order.
  std::vector<GateApplication> out;
  out.reserve(applied.size());
  for (auto it = applied.rbegin(); it != applied.rend(); ++it) {
    GateApplication g = *it;
    if (g.kind == GateKind::S) g.kind = GateKind::Sdg;
    out.push_back(std::move(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lowering and compilation.

namespace {

// Expands SubroutineRefs recursively and lifts nested PermuteAll gates to the
// full register.
void expand_gate_into(const GateApplication& g, int width,
                      std::vector<GateApplication>& out) {
  if (g.kind != GateKind::SubroutineRef) {
    out.push_back(g);
    return;
  }
  const Circuit& body = *g.body;
  const auto remap = [&](const GateApplication& inner) {
    GateApplication h = inner;
    for (int& t : h.targets) t = g.targets[t];
    if (h.kind == GateKind::PermuteAll) {
      std::vector<double> lifted(width);
      for (int i = 0; i < width; ++i) lifted[i] = i;
      for (int i = 0; i < static_cast<int>(inner.params.size()); ++i) {
        lifted[g.targets[i]] =
            g.targets[static_cast<int>(inner.params[i])];
      }
      h.params = std::move(lifted);
      h.targets.clear();
    }
    return h;
  };
  for (const auto* part : {&body.prefix, &body.central, &body.postfix}) {
    for (const Layer& l : *part) {
      for (const GateApplication& inner : l.gates) {
        expand_gate_into(remap(inner), width, out);
      }
    }
  }
}

std::vector<GateApplication> expand_layers(const std::vector<Layer>& layers,
                                           int first, int last, int width) {
  std::vector<GateApplication> out;
  for (int i = first; i <= last; ++i) {
    for (const GateApplication& g : layers[i].gates) {
      expand_gate_into(g, width, out);
    }
  }
  return out;
}

struct Lowerer {
  const NativeGateSet& native;
  int width = 0;
  std::vector<GateApplication> out;

  void check_edge(int a, int b) {
    if (!native.allows_edge(a, b)) {
      throw ConnectivityViolationError(
          "two-qubit gate on absent edge (" + std::to_string(a) + "," +
          std::to_string(b) + ")");
    }
  }

  void emit_rz(int q, double t) {
    if (std::abs(t) < 1e-12) return;
    if (native.allows_oneq(GateKind::RZ)) {
      out.push_back(gate(GateKind::RZ, {q}, {t}));
    } else if (native.allows_oneq(GateKind::U1q)) {
      out.push_back(gate(GateKind::U1q, {q}, {t, 0.0, 0.0}));
    } else {
      throw NonNativeGateError("native set cannot express RZ");
    }
  }

  void emit_ry(int q, double t) {
    if (std::abs(t) < 1e-12) return;
    if (native.allows_oneq(GateKind::RY)) {
      out.push_back(gate(GateKind::RY, {q}, {t}));
    } else if (native.allows_oneq(GateKind::U1q)) {
      out.push_back(gate(GateKind::U1q, {q}, {0.0, t, 0.0}));
    } else if (native.allows_oneq(GateKind::RX)) {
      // RY(t) = RZ(pi/2) RX(t) RZ(-pi/2)
      emit_rz(q, -kPi / 2);
      out.push_back(gate(GateKind::RX, {q}, {t}));
      emit_rz(q, kPi / 2);
    } else if (native.allows_oneq(GateKind::H) &&
               native.allows_oneq(GateKind::S) &&
               native.allows_oneq(GateKind::Sdg)) {
      // RY(t) = (S H) RZ(t) (S H)^dag
      out.push_back(gate(GateKind::Sdg, {q}));
      out.push_back(gate(GateKind::H, {q}));
      emit_rz(q, t);
      out.push_back(gate(GateKind::H, {q}));
      out.push_back(gate(GateKind::S, {q}));
    } else {
      throw NonNativeGateError("native set cannot express RY");
    }
  }

  void emit_zyz(int q, const Eigen::Matrix2cd& u) {
    const ZyzDecomposition z = decompose_1q(u);
    emit_rz(q, z.gamma);
    emit_ry(q, z.beta);
    emit_rz(q, z.alpha);
  }

  void emit_cnot(int c, int t) {
    check_edge(c, t);
    if (native.allows_twoq(GateKind::CNOT)) {
      out.push_back(gate(GateKind::CNOT, {c, t}));
    } else if (native.allows_twoq(GateKind::CZ)) {
      lower_h(t);
      out.push_back(gate(GateKind::CZ, {c, t}));
      lower_h(t);
    } else {
      throw NonNativeGateError("native set has no CNOT or CZ");
    }
  }

  void lower_h(int q) {
    if (native.allows_oneq(GateKind::H)) {
      out.push_back(gate(GateKind::H, {q}));
    } else {
      emit_zyz(q, mat_h());
    }
  }

  void lower(const GateApplication& g) {
    switch (g.kind) {
      case GateKind::Id:
        out.push_back(g);
        return;
      case GateKind::X:
      case GateKind::Y:
      case GateKind::Z:
      case GateKind::H:
      case GateKind::S:
      case GateKind::Sdg:
      case GateKind::RX:
      case GateKind::RY:
      case GateKind::RZ:
      case GateKind::U1q:
        if (native.allows_oneq(g.kind)) {
          out.push_back(g);
        } else {
          emit_zyz(g.targets[0], one_qubit_unitary(g));
        }
        return;
      case GateKind::CNOT:
        if (native.allows_twoq(GateKind::CNOT)) {
          check_edge(g.targets[0], g.targets[1]);
          out.push_back(g);
        } else {
          emit_cnot(g.targets[0], g.targets[1]);
        }
        return;
      case GateKind::CZ:
        if (native.allows_twoq(GateKind::CZ)) {
          check_edge(g.targets[0], g.targets[1]);
          out.push_back(g);
        } else {
          // CZ = (I (x) H) CNOT (I (x) H)
          lower_h(g.targets[1]);
          emit_cnot(g.targets[0], g.targets[1]);
          lower_h(g.targets[1]);
        }
        return;
      case GateKind::SWAP:
        if (native.allows_twoq(GateKind::SWAP)) {
          check_edge(g.targets[0], g.targets[1]);
          out.push_back(g);
        } else {
          emit_cnot(g.targets[0], g.targets[1]);
          emit_cnot(g.targets[1], g.targets[0]);
          emit_cnot(g.targets[0], g.targets[1]);
        }
        return;
      case GateKind::SU4: {
        if (native.allows_twoq(GateKind::SU4)) {
          check_edge(g.targets[0], g.targets[1]);
          out.push_back(g);
          return;
        }
        check_edge(g.targets[0], g.targets[1]);
        const Su4Decomposition d =
            decompose_su4(two_qubit_unitary(g), g.targets[0], g.targets[1]);
        for (const GateApplication& h : d.gates) lower(h);
        return;
      }
      case GateKind::PermuteAll: {
        // Settle each position with transpositions; rem[p] is the destination
        // of the content currently at position p.
        std::vector<int> rem(g.params.size());
        for (size_t i = 0; i < g.params.size(); ++i) {
          rem[i] = static_cast<int>(g.params[i]);
        }
        for (int i = 0; i < static_cast<int>(rem.size()); ++i) {
          while (rem[i] != i) {
            const int j = rem[i];
            lower(gate(GateKind::SWAP, {i, j}));
            std::swap(rem[i], rem[j]);
          }
        }
        return;
      }
      case GateKind::SubroutineRef: {
        std::vector<GateApplication> flat;
        expand_gate_into(g, width, flat);
        for (const GateApplication& h : flat) lower(h);
        return;
      }
    }
    throw NonNativeGateError("unhandled gate kind");
  }
};

bool same_targets(const GateApplication& a, const GateApplication& b) {
  return a.targets == b.targets;
}

bool inverse_pair(const GateApplication& a, const GateApplication& b) {
  if (a.kind == b.kind && same_targets(a, b)) {
    switch (a.kind) {
      case GateKind::X:
      case GateKind::Y:
      case GateKind::Z:
      case GateKind::H:
      case GateKind::CNOT:
      case GateKind::CZ:
        return true;
      default:
        break;
    }
  }
  if (a.kind == GateKind::SWAP && b.kind == GateKind::SWAP &&
      a.targets.size() == 2 && b.targets.size() == 2) {
    return (a.targets == b.targets) ||
           (a.targets[0] == b.targets[1] && a.targets[1] == b.targets[0]);
  }
  if (((a.kind == GateKind::S && b.kind == GateKind::Sdg) ||
       (a.kind == GateKind::Sdg && b.kind == GateKind::S)) &&
      same_targets(a, b)) {
    return true;
  }
  return false;
}

bool touches(const GateApplication& g, const GateApplication& h) {
  for (int t : g.targets) {
    for (int u : h.targets) {
      if (t == u) return true;
    }
  }
  return false;
}

// Adjacent-inverse cancellation and rotation merging on a flat gate list.
void cancel_pass(std::vector<GateApplication>& gs) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < gs.size(); ++i) {
      if (gs[i].kind == GateKind::Id) continue;
      for (size_t j = i + 1; j < gs.size(); ++j) {
        if (gs[j].kind == GateKind::Id) continue;
        if (!touches(gs[i], gs[j])) continue;
        if (inverse_pair(gs[i], gs[j])) {
          gs.erase(gs.begin() + j);
          gs.erase(gs.begin() + i);
          changed = true;
        } else if (gs[i].kind == gs[j].kind && same_targets(gs[i], gs[j]) &&
                   (gs[i].kind == GateKind::RX ||
                    gs[i].kind == GateKind::RY ||
                    gs[i].kind == GateKind::RZ)) {
          const double t = gs[i].params[0] + gs[j].params[0];
          gs.erase(gs.begin() + j);
          if (std::abs(std::remainder(t, 4.0 * kPi)) < 1e-12) {
            gs.erase(gs.begin() + i);
          } else {
            gs[i].params[0] = t;
          }
          changed = true;
        }
        break;  // only the adjacent gate on these qubits is a candidate
      }
      if (changed) break;
    }
  }
}

// ASAP packing of a flat gate list into layers.
std::vector<Layer> relayer(int width, const std::vector<GateApplication>& gs,
                           std::optional<int> max_parallel_twoq) {
  std::vector<Layer> layers;
  std::vector<int> frontier(width, 0);
  std::vector<int> twoq_count;
  for (const GateApplication& g : gs) {
    int at = 0;
    for (int t : g.targets) at = std::max(at, frontier[t]);
    const bool is2q = g.targets.size() == 2;
    if (is2q && max_parallel_twoq) {
      while (at < static_cast<int>(twoq_count.size()) &&
             twoq_count[at] >= *max_parallel_twoq) {
        ++at;
      }
    }
    while (static_cast<int>(layers.size()) <= at) {
      layers.emplace_back();
      twoq_count.push_back(0);
    }
    layers[at].gates.push_back(g);
    if (is2q) ++twoq_count[at];
    for (int t : g.targets) frontier[t] = at + 1;
  }
  return layers;
}

std::vector<Layer> lower_block(const std::vector<GateApplication>& flat,
                               const NativeGateSet& native, int width,
                               bool cancel) {
  Lowerer lw{native, width, {}};
  for (const GateApplication& g : flat) lw.lower(g);
  if (cancel) cancel_pass(lw.out);
  return relayer(width, lw.out, native.max_parallel_twoq);
}

bool body_is_parameter_free_clifford(const Circuit& body) {
  for (const auto* part : {&body.prefix, &body.central, &body.postfix}) {
    for (const Layer& l : *part) {
      for (const GateApplication& g : l.gates) {
        if (g.kind == GateKind::SubroutineRef) {
          if (!body_is_parameter_free_clifford(*g.body)) return false;
        } else if (!is_clifford_kind(g.kind)) {
          return false;
        }
      }
    }
  }
  return true;
}

void check_native_verbatim(const GateApplication& g,
                           const NativeGateSet& native) {
  if (g.kind == GateKind::Id) return;
  if (is_one_qubit_kind(g.kind)) {
    if (!native.allows_oneq(g.kind)) {
      throw NonNativeGateError(std::string("non-native gate '") +
                               gate_kind_name(g.kind) + "' under policy none");
    }
    return;
  }
  if (is_two_qubit_kind(g.kind)) {
    if (!native.allows_twoq(g.kind)) {
      throw NonNativeGateError(std::string("non-native gate '") +
                               gate_kind_name(g.kind) + "' under policy none");
    }
    if (!native.allows_edge(g.targets[0], g.targets[1])) {
      throw ConnectivityViolationError("two-qubit gate on absent edge");
    }
    return;
  }
  throw NonNativeGateError(std::string("non-native gate '") +
                           gate_kind_name(g.kind) + "' under policy none");
}

// Literal expansion of one layer for policy None: parameter-free Clifford
// subroutines are spliced in verbatim; everything else must be native.
std::vector<Layer> expand_layer_verbatim(const Layer& l, int width,
                                         const NativeGateSet& native) {
  std::vector<Layer> block(1);
  for (const GateApplication& g : l.gates) {
    if (g.kind == GateKind::SubroutineRef) {
      if (!body_is_parameter_free_clifford(*g.body)) {
        throw NonNativeGateError(
            "subroutine with non-Clifford body under policy none");
      }
      std::vector<GateApplication> flat;
      expand_gate_into(g, width, flat);
      // Keep the body's own sequencing: one expanded gate per sub-layer slot,
      // packed ASAP among the subroutine's qubits.
      std::vector<Layer> sub = relayer(width, flat, std::nullopt);
      for (size_t i = 0; i < sub.size(); ++i) {
        if (block.size() <= i) block.emplace_back();
        for (GateApplication& h : sub[i].gates) {
          check_native_verbatim(h, native);
          block[i].gates.push_back(std::move(h));
        }
      }
    } else {
      check_native_verbatim(g, native);
      block[0].gates.push_back(g);
    }
  }
  return block;
}

}  // namespace

Circuit clifford_synthesis(const CliffordTableau& T,
                           const NativeGateSet& native) {
  const bool has_s =
      native.allows_oneq(GateKind::S) || native.allows_oneq(GateKind::Sdg);
  const bool has_2q = native.allows_twoq(GateKind::CNOT) ||
                      native.allows_twoq(GateKind::CZ);
  if (!native.allows_oneq(GateKind::H) || !has_s || (T.w > 1 && !has_2q)) {
    throw NonGeneratingGateSetError(
        "native set does not generate the Clifford group");
  }
  std::vector<GateApplication> gs = clifford_synthesis_gates(T);
  std::vector<GateApplication> rewritten;
  const auto emit = [&](GateKind k, std::vector<int> tg) {
    rewritten.push_back(gate(k, std::move(tg)));
  };
  const auto emit_s = [&](int q, bool dagger) {
    const GateKind want = dagger ? GateKind::Sdg : GateKind::S;
    const GateKind other = dagger ? GateKind::S : GateKind::Sdg;
    if (native.allows_oneq(want)) {
      emit(want, {q});
    } else {
      emit(other, {q});
      emit(other, {q});
      emit(other, {q});
    }
  };
  const auto emit_cnot = [&](int c, int t) {
    if (native.allows_twoq(GateKind::CNOT)) {
      emit(GateKind::CNOT, {c, t});
    } else {
      emit(GateKind::H, {t});
      emit(GateKind::CZ, {c, t});
      emit(GateKind::H, {t});
    }
  };
  for (const GateApplication& g : gs) {
    switch (g.kind) {
      case GateKind::H:
        emit(GateKind::H, {g.targets[0]});
        break;
      case GateKind::S:
        emit_s(g.targets[0], false);
        break;
      case GateKind::Sdg:
        emit_s(g.targets[0], true);
        break;
      case GateKind::Z:
        if (native.allows_oneq(GateKind::Z)) {
          emit(GateKind::Z, {g.targets[0]});
        } else {
          emit_s(g.targets[0], false);
          emit_s(g.targets[0], false);
        }
        break;
      case GateKind::X:
        if (native.allows_oneq(GateKind::X)) {
          emit(GateKind::X, {g.targets[0]});
        } else {
          emit(GateKind::H, {g.targets[0]});
          emit_s(g.targets[0], false);
          emit_s(g.targets[0], false);
          emit(GateKind::H, {g.targets[0]});
        }
        break;
      case GateKind::CNOT:
        emit_cnot(g.targets[0], g.targets[1]);
        break;
      case GateKind::SWAP:
        if (native.allows_twoq(GateKind::SWAP)) {
          emit(GateKind::SWAP, {g.targets[0], g.targets[1]});
        } else {
          emit_cnot(g.targets[0], g.targets[1]);
          emit_cnot(g.targets[1], g.targets[0]);
          emit_cnot(g.targets[0], g.targets[1]);
        }
        break;
      default:
        throw NonGeneratingGateSetError("unexpected synthesized kind");
    }
  }
  Circuit out = make_circuit(
      T.w, {}, relayer(T.w, rewritten, native.max_parallel_twoq), {});
  out.metadata.family = "clifford_synthesis";
  out.metadata.shape_w = T.w;
  out.metadata.shape_d = static_cast<int>(out.central.size());
  return out;
}

Circuit compile(const Circuit& c, const CompilationPolicy& policy,
                const NativeGateSet& native) {
  Circuit out;
  out.width = c.width;
  out.metadata = c.metadata;

  const int d = static_cast<int>(c.central.size());
  const auto barrier_at = [&](int i) -> std::uint8_t {
    return i < static_cast<int>(c.barriers.size()) ? c.barriers[i] : 0;
  };

  switch (policy.variant) {
    case PolicyVariant::None: {
      std::vector<std::uint8_t> new_barriers;
      new_barriers.push_back(barrier_at(0));
      for (const auto* part : {&c.prefix, &c.central, &c.postfix}) {
        std::vector<Layer>* dest = part == &c.prefix    ? &out.prefix
                                   : part == &c.central ? &out.central
                                                        : &out.postfix;
        for (size_t i = 0; i < part->size(); ++i) {
          std::vector<Layer> block =
              expand_layer_verbatim((*part)[i], c.width, native);
          for (Layer& l : block) {
            dest->push_back(std::move(l));
            if (part == &c.central) new_barriers.push_back(0);
          }
          if (part == &c.central) {
            new_barriers.back() = barrier_at(static_cast<int>(i) + 1);
          }
        }
      }
      out.barriers = std::move(new_barriers);
      break;
    }
    case PolicyVariant::PerLayer: {
      std::vector<std::uint8_t> new_barriers;
      new_barriers.push_back(barrier_at(0));
      for (const auto* part : {&c.prefix, &c.central, &c.postfix}) {
        std::vector<Layer>* dest = part == &c.prefix    ? &out.prefix
                                   : part == &c.central ? &out.central
                                                        : &out.postfix;
        for (size_t i = 0; i < part->size(); ++i) {
          std::vector<GateApplication> flat;
          for (const GateApplication& g : (*part)[i].gates) {
            expand_gate_into(g, c.width, flat);
          }
          std::vector<Layer> block = lower_block(flat, native, c.width, false);
          for (Layer& l : block) {
            dest->push_back(std::move(l));
            if (part == &c.central) new_barriers.push_back(0);
          }
          if (part == &c.central) {
            new_barriers.back() = barrier_at(static_cast<int>(i) + 1);
          }
        }
      }
      out.barriers = std::move(new_barriers);
      break;
    }
    case PolicyVariant::PerSegment: {
      const std::vector<Segment> segs = segment_by_barriers(c);
      if (!c.prefix.empty()) {
        out.prefix = lower_block(
            expand_layers(c.prefix, 0, static_cast<int>(c.prefix.size()) - 1,
                          c.width),
            native, c.width, true);
      }
      std::vector<std::vector<Layer>> blocks(segs.size());
#pragma omp parallel for schedule(dynamic)
      for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        blocks[s] = lower_block(
            expand_layers(c.central, segs[s].first, segs[s].last, c.width),
            native, c.width, true);
      }
      std::vector<std::uint8_t> new_barriers;
      new_barriers.push_back(barrier_at(0));
      for (size_t s = 0; s < blocks.size(); ++s) {
        const bool was_empty = blocks[s].empty();
        for (Layer& l : blocks[s]) {
          out.central.push_back(std::move(l));
          new_barriers.push_back(0);
        }
        const std::uint8_t flag = barrier_at(segs[s].last + 1);
        // A fully cancelled segment keeps its boundary merged with the
        // previous one.
        new_barriers.back() =
            was_empty ? std::max(new_barriers.back(), flag) : flag;
      }
      out.barriers = std::move(new_barriers);
      if (!c.postfix.empty()) {
        out.postfix = lower_block(
            expand_layers(c.postfix, 0, static_cast<int>(c.postfix.size()) - 1,
                          c.width),
            native, c.width, true);
      }
      break;
    }
    case PolicyVariant::Free: {
      std::vector<GateApplication> flat;
      if (!c.prefix.empty()) {
        auto f = expand_layers(c.prefix, 0,
                               static_cast<int>(c.prefix.size()) - 1, c.width);
        flat.insert(flat.end(), f.begin(), f.end());
      }
      if (d > 0) {
        auto f = expand_layers(c.central, 0, d - 1, c.width);
        flat.insert(flat.end(), f.begin(), f.end());
      }
      if (!c.postfix.empty()) {
        auto f = expand_layers(c.postfix, 0,
                               static_cast<int>(c.postfix.size()) - 1, c.width);
        flat.insert(flat.end(), f.begin(), f.end());
      }
      out.central = lower_block(flat, native, c.width, true);
      out.barriers.assign(out.central.size() + 1, 0);
      if (!out.barriers.empty()) {
        out.barriers.front() = barrier_at(0);
        out.barriers.back() = barrier_at(d);
      }
      break;
    }
  }

  out.metadata.extra["policy"] = policy_name(policy.variant);
  out.metadata.extra["physical_depth"] =
      std::to_string(out.central.size());
  out.metadata.shape_d = c.metadata.shape_d;
  return out;
}

int physical_depth(const Circuit& c) {
  return static_cast<int>(c.central.size());
}

DepthBreakdown physical_depth_breakdown(const Circuit& c) {
  return DepthBreakdown{static_cast<int>(c.prefix.size()),
                        static_cast<int>(c.central.size()),
                        static_cast<int>(c.postfix.size())};
}

}  // namespace vb
