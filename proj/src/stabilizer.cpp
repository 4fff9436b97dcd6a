#include "vb/stabilizer.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>
#include <utility>

namespace vb {

namespace {

// Number of Y factors (x&z positions) in a row.
int y_count(const PauliRow& p) {
  int n = 0;
  for (std::size_t i = 0; i < p.x.size(); ++i) n += p.x[i] & p.z[i];
  return n;
}

// Raw form: value = i^phase * prod_j X_j^{x_j} Z_j^{z_j} (phase mod 4).
// A Hermitian row (x, z, sign) has raw phase 2*sign + |Y| mod 4.
struct RawPauli {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> z;
  int phase = 0;

  explicit RawPauli(int w) : x(w, 0), z(w, 0) {}

  void multiply(const PauliRow& r) {
    int cross = 0;
    for (std::size_t i = 0; i < x.size(); ++i) cross += z[i] & r.x[i];
    phase = (phase + 2 * r.sign + y_count(r) + 2 * cross) % 4;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] ^= r.x[i];
      z[i] ^= r.z[i];
    }
  }

  PauliRow to_hermitian() const {
    PauliRow out(static_cast<int>(x.size()));
    out.x = x;
    out.z = z;
    const int p = ((phase - y_count(out)) % 4 + 4) % 4;
    assert(p % 2 == 0);
    out.sign = static_cast<std::uint8_t>(p / 2);
    return out;
  }
};

std::vector<int> permutation_of(const GateApplication& g) {
  std::vector<int> perm;
  perm.reserve(g.params.size());
  for (double p : g.params) perm.push_back(static_cast<int>(std::llround(p)));
  return perm;
}

}  // namespace

PauliRow pauli_multiply(const PauliRow& a, const PauliRow& b) {
  RawPauli acc(static_cast<int>(a.x.size()));
  acc.multiply(a);
  acc.multiply(b);
  return acc.to_hermitian();
}

void conjugate_rows(std::vector<PauliRow>& rows, const GateApplication& g) {
  auto cnot = [&rows](int c, int t) {
    for (auto& r : rows) {
      r.sign ^= r.x[c] & r.z[t] & (r.x[t] ^ r.z[c] ^ 1);
      r.x[t] ^= r.x[c];
      r.z[c] ^= r.z[t];
    }
  };
  auto hadamard = [&rows](int q) {
    for (auto& r : rows) {
      r.sign ^= r.x[q] & r.z[q];
      std::swap(r.x[q], r.z[q]);
    }
  };
  auto phase_s = [&rows](int q) {
    for (auto& r : rows) {
      r.sign ^= r.x[q] & r.z[q];
      r.z[q] ^= r.x[q];
    }
  };

  switch (g.kind) {
    case GateKind::Id:
      break;
    case GateKind::H:
      hadamard(g.targets[0]);
      break;
    case GateKind::S:
      phase_s(g.targets[0]);
      break;
    case GateKind::Sdg: {
      const int q = g.targets[0];
      for (auto& r : rows) {
        r.sign ^= r.x[q] & (r.z[q] ^ 1);
        r.z[q] ^= r.x[q];
      }
      break;
    }
    case GateKind::X: {
      const int q = g.targets[0];
      for (auto& r : rows) r.sign ^= r.z[q];
      break;
    }
    case GateKind::Z: {
      const int q = g.targets[0];
      for (auto& r : rows) r.sign ^= r.x[q];
      break;
    }
    case GateKind::Y: {
      const int q = g.targets[0];
      for (auto& r : rows) r.sign ^= r.x[q] ^ r.z[q];
      break;
    }
    case GateKind::CNOT:
      cnot(g.targets[0], g.targets[1]);
      break;
    case GateKind::CZ:
      hadamard(g.targets[1]);
      cnot(g.targets[0], g.targets[1]);
      hadamard(g.targets[1]);
      break;
    case GateKind::SWAP: {
      const int a = g.targets[0];
      const int b = g.targets[1];
      for (auto& r : rows) {
        std::swap(r.x[a], r.x[b]);
        std::swap(r.z[a], r.z[b]);
      }
      break;
    }
    case GateKind::PermuteAll: {
      const auto perm = permutation_of(g);
      for (auto& r : rows) {
        std::vector<std::uint8_t> nx(r.x.size()), nz(r.z.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
          nx[perm[i]] = r.x[i];
          nz[perm[i]] = r.z[i];
        }
        r.x = std::move(nx);
        r.z = std::move(nz);
      }
      break;
    }
    default:
      throw UnsupportedGateError(std::string("non-Clifford gate kind: ") +
                                 gate_kind_name(g.kind));
  }
}

CliffordTableau tableau_identity(int w) {
  CliffordTableau t;
  t.w = w;
  t.rows.assign(2 * w, PauliRow(w));
  for (int i = 0; i < w; ++i) {
    t.rows[i].x[i] = 1;
    t.rows[w + i].z[i] = 1;
  }
  return t;
}

CliffordTableau tableau_apply_gate(CliffordTableau T,
                                   const GateApplication& g) {
  conjugate_rows(T.rows, g);
  return T;
}

PauliRow tableau_image(const CliffordTableau& T, const PauliRow& p) {
  RawPauli acc(T.w);
  acc.phase = (2 * p.sign + y_count(p)) % 4;
  for (int j = 0; j < T.w; ++j) {
    if (p.x[j]) acc.multiply(T.rows[j]);
    if (p.z[j]) acc.multiply(T.rows[T.w + j]);
  }
  return acc.to_hermitian();
}

CliffordTableau tableau_compose(const CliffordTableau& A,
                                const CliffordTableau& B) {
  if (A.w != B.w) throw WidthMismatchError("tableau width mismatch");
  CliffordTableau out;
  out.w = A.w;
  out.rows.reserve(2 * A.w);
  for (const auto& row : B.rows) out.rows.push_back(tableau_image(A, row));
  return out;
}

namespace {

int symplectic_product(const PauliRow& a, const PauliRow& b) {
  int s = 0;
  for (std::size_t i = 0; i < a.x.size(); ++i)
    s ^= (a.x[i] & b.z[i]) ^ (a.z[i] & b.x[i]);
  return s;
}

}  // namespace

bool tableau_is_symplectic(const CliffordTableau& T) {
  const int w = T.w;
  for (int i = 0; i < 2 * w; ++i) {
    for (int j = i; j < 2 * w; ++j) {
      const int want = (j == i + w && i < w) ? 1 : 0;
      if (symplectic_product(T.rows[i], T.rows[j]) != want) return false;
    }
  }
  return true;
}

CliffordTableau tableau_inverse(const CliffordTableau& T) {
  const int w = T.w;
  // Symplectic inverse: Minv = Omega M^T Omega with Omega swapping the x and
  // z halves; Minv[i][j] = M[sigma(j)][sigma(i)].
  auto bit = [&](int row, int col) -> std::uint8_t {
    const auto& r = T.rows[row];
    return col < w ? r.x[col] : r.z[col - w];
  };
  auto sigma = [&](int i) { return i < w ? i + w : i - w; };

  CliffordTableau a0;
  a0.w = w;
  a0.rows.assign(2 * w, PauliRow(w));
  for (int i = 0; i < 2 * w; ++i) {
    for (int j = 0; j < 2 * w; ++j) {
      const std::uint8_t v = bit(sigma(j), sigma(i));
      if (j < w)
        a0.rows[i].x[j] = v;
      else
        a0.rows[i].z[j - w] = v;
    }
  }

  // Fix phases: a0 composed with T is a Pauli-frame map c with phase vector q;
  // c is an involution, so the true inverse is c composed with a0.
  const CliffordTableau c = tableau_compose(a0, T);
  CliffordTableau frame = tableau_identity(w);
  for (int i = 0; i < 2 * w; ++i) frame.rows[i].sign = c.rows[i].sign;
  return tableau_compose(frame, a0);
}

namespace {

// 2m-bit vectors in (x|z) layout for the symplectic Gram-Schmidt sampler.
using BitVec = std::vector<std::uint8_t>;

int symp(const BitVec& a, const BitVec& b) {
  const std::size_t w = a.size() / 2;
  int s = 0;
  for (std::size_t i = 0; i < w; ++i)
    s ^= (a[i] & b[w + i]) ^ (a[w + i] & b[i]);
  return s;
}

void xor_into(BitVec& a, const BitVec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] ^= b[i];
}

bool is_zero(const BitVec& a) {
  return std::all_of(a.begin(), a.end(), [](std::uint8_t v) { return v == 0; });
}

// Reduces the given spanning set to an independent basis (Gaussian
// elimination over F2).
std::vector<BitVec> independent_basis(std::vector<BitVec> vecs) {
  std::vector<BitVec> basis;
  std::vector<std::size_t> pivots;
  for (auto& v : vecs) {
    for (std::size_t k = 0; k < basis.size(); ++k)
      if (v[pivots[k]]) xor_into(v, basis[k]);
    std::size_t p = v.size();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i]) {
        p = i;
        break;
      }
    if (p == v.size()) continue;
    basis.push_back(v);
    pivots.push_back(p);
  }
  return basis;
}

}  // namespace

CliffordTableau random_clifford(int w, Rng& rng) {
  const int nn = 2 * w;
  std::vector<BitVec> basis;
  for (int i = 0; i < nn; ++i) {
    BitVec e(nn, 0);
    e[i] = 1;
    basis.push_back(std::move(e));
  }

  CliffordTableau t;
  t.w = w;
  t.rows.assign(nn, PauliRow(w));

  for (int pair = 0; pair < w; ++pair) {
    const std::size_t m2 = basis.size();
    // v: uniform nonzero element of the current subspace.
    BitVec v(nn, 0);
    do {
      v.assign(nn, 0);
      bool any = false;
      for (std::size_t k = 0; k < m2; ++k) {
        if (rng.next_u64() & 1) {
          xor_into(v, basis[k]);
          any = true;
        }
      }
      if (!any) continue;
    } while (is_zero(v));

    // u: uniform over {u in V : <v,u> = 1}.
    BitVec u0;
    for (const auto& b : basis)
      if (symp(v, b) == 1) {
        u0 = b;
        break;
      }
    assert(!u0.empty());
    BitVec x(nn, 0);
    for (std::size_t k = 0; k < m2; ++k)
      if (rng.next_u64() & 1) xor_into(x, basis[k]);
    BitVec u = x;
    if (symp(v, u) == 0) xor_into(u, u0);

    for (int i = 0; i < w; ++i) {
      t.rows[pair].x[i] = v[i];
      t.rows[pair].z[i] = v[w + i];
      t.rows[w + pair].x[i] = u[i];
      t.rows[w + pair].z[i] = u[w + i];
    }

    // Project the basis onto the symplectic complement of span(v, u).
    std::vector<BitVec> next;
    next.reserve(m2);
    for (const auto& b : basis) {
      BitVec nb = b;
      if (symp(b, u)) xor_into(nb, v);
      if (symp(b, v)) xor_into(nb, u);
      if (!is_zero(nb)) next.push_back(std::move(nb));
    }
    basis = independent_basis(std::move(next));
    assert(basis.size() == m2 - 2);
  }

  for (auto& row : t.rows) row.sign = static_cast<std::uint8_t>(rng.next_u64() & 1);
  return t;
}

namespace {

void walk_clifford_gates(const Circuit& c, std::vector<PauliRow>& rows,
                         const std::vector<int>& map) {
  auto remap = [&map, &rows](const GateApplication& g) {
    GateApplication out = g;
    for (auto& t : out.targets) t = map[t];
    if (g.kind == GateKind::PermuteAll) {
      // Remap a nested permutation onto the outer qubit labels.
      std::vector<double> params(rows[0].x.size());
      for (std::size_t i = 0; i < rows[0].x.size(); ++i)
        params[i] = static_cast<double>(i);
      const auto perm = permutation_of(g);
      for (std::size_t i = 0; i < perm.size(); ++i)
        params[map[i]] = static_cast<double>(map[perm[i]]);
      out.targets.clear();
      for (std::size_t i = 0; i < params.size(); ++i)
        out.targets.push_back(static_cast<int>(i));
      out.params = params;
    }
    return out;
  };

  auto do_layers = [&](const std::vector<Layer>& layers) {
    for (const auto& layer : layers) {
      for (const auto& g : layer.gates) {
        if (g.kind == GateKind::SubroutineRef) {
          std::vector<int> inner_map;
          inner_map.reserve(g.targets.size());
          for (int t : g.targets) inner_map.push_back(map[t]);
          walk_clifford_gates(*g.body, rows, inner_map);
        } else {
          conjugate_rows(rows, remap(g));
        }
      }
    }
  };
  do_layers(c.prefix);
  do_layers(c.central);
  do_layers(c.postfix);
}

}  // namespace

CliffordTableau tableau_of_circuit(const Circuit& c) {
  CliffordTableau t = tableau_identity(c.width);
  std::vector<int> map(c.width);
  for (int i = 0; i < c.width; ++i) map[i] = i;
  walk_clifford_gates(c, t.rows, map);
  return t;
}

StabilizerState::StabilizerState(int width) : w(width) {
  rows.assign(2 * w, PauliRow(w));
  for (int i = 0; i < w; ++i) {
    rows[i].x[i] = 1;        // destabilizer X_i
    rows[w + i].z[i] = 1;    // stabilizer Z_i
  }
}

void StabilizerState::apply(const GateApplication& g) {
  conjugate_rows(rows, g);
}

void StabilizerState::apply_circuit(const Circuit& c) {
  if (c.width != w) throw WidthMismatchError("circuit width mismatch");
  std::vector<int> map(w);
  for (int i = 0; i < w; ++i) map[i] = i;
  walk_clifford_gates(c, rows, map);
}

std::pair<bool, int> StabilizerState::peek_measure(int q) const {
  for (int p = w; p < 2 * w; ++p)
    if (rows[p].x[q]) return {false, 0};
  // Deterministic: accumulate stabilizers flagged by the destabilizers.
  RawPauli acc(w);
  for (int i = 0; i < w; ++i)
    if (rows[i].x[q]) acc.multiply(rows[w + i]);
  const PauliRow r = acc.to_hermitian();
  return {true, r.sign};
}

void StabilizerState::collapse(int q, int outcome) {
  int p = -1;
  for (int i = w; i < 2 * w; ++i)
    if (rows[i].x[q]) {
      p = i;
      break;
    }
  assert(p >= 0 && "collapse on a deterministic qubit");
  for (int i = 0; i < 2 * w; ++i) {
    if (i != p && rows[i].x[q]) rows[i] = pauli_multiply(rows[i], rows[p]);
  }
  rows[p - w] = rows[p];
  rows[p] = PauliRow(w);
  rows[p].z[q] = 1;
  rows[p].sign = static_cast<std::uint8_t>(outcome);
}

Distribution StabilizerState::measurement_distribution() const {
  Distribution dist;
  dist.width = w;

  struct Branch {
    StabilizerState state;
    std::uint64_t bits;
    double prob;
  };
  std::vector<Branch> frontier{{*this, 0, 1.0}};
  for (int q = 0; q < w; ++q) {
    std::vector<Branch> next;
    next.reserve(frontier.size());
    for (auto& br : frontier) {
      auto [det, outcome] = br.state.peek_measure(q);
      if (det) {
        br.bits |= static_cast<std::uint64_t>(outcome) << q;
        next.push_back(std::move(br));
      } else {
        for (int o = 0; o < 2; ++o) {
          Branch b2{br.state, br.bits | (static_cast<std::uint64_t>(o) << q),
                    br.prob * 0.5};
          b2.state.collapse(q, o);
          next.push_back(std::move(b2));
        }
      }
    }
    frontier = std::move(next);
  }
  for (const auto& br : frontier) dist.probs[br.bits] += br.prob;
  return dist;
}

Distribution stabilizer_distribution(const Circuit& c) {
  StabilizerState state(c.width);
  state.apply_circuit(c);
  return state.measurement_distribution();
}

}  // namespace vb
