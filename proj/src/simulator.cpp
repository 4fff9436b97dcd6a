#include "vb/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vb/gates.hpp"
#include "vb/stabilizer.hpp"

namespace vb {

namespace sv {

namespace {

// Index of the k-th basis state with qubit q forced to zero.
inline std::uint64_t insert_zero_bit(std::uint64_t k, int q) {
  const std::uint64_t low = k & ((std::uint64_t{1} << q) - 1);
  return ((k >> q) << (q + 1)) | low;
}

inline void kernel_1q(State& a, std::uint64_t i0, std::uint64_t i1,
                      const Eigen::Matrix2cd& m) {
  const auto a0 = a[i0];
  const auto a1 = a[i1];
  a[i0] = m(0, 0) * a0 + m(0, 1) * a1;
  a[i1] = m(1, 0) * a0 + m(1, 1) * a1;
}

inline void kernel_2q(State& a, std::uint64_t base, std::uint64_t m0,
                      std::uint64_t m1, const Eigen::Matrix4cd& m) {
  // Block index 2*b(q0) + b(q1); m0/m1 are the bit masks of q0/q1.
  const std::uint64_t idx[4] = {base, base | m1, base | m0, base | m0 | m1};
  std::complex<double> v[4];
  for (int k = 0; k < 4; ++k) v[k] = a[idx[k]];
  for (int r = 0; r < 4; ++r) {
    std::complex<double> acc = 0;
    for (int k = 0; k < 4; ++k) acc += m(r, k) * v[k];
    a[idx[r]] = acc;
  }
}

inline std::uint64_t permute_index(std::uint64_t x, int w,
                                   const std::vector<int>& perm) {
  std::uint64_t y = 0;
  for (int i = 0; i < w; ++i)
    if (x >> i & 1) y |= std::uint64_t{1} << perm[i];
  return y;
}

}  // namespace

void apply_one_qubit(State& a, int w, int q, const Eigen::Matrix2cd& m) {
  const std::int64_t half = std::int64_t{1} << (w - 1);
  const std::uint64_t mask = std::uint64_t{1} << q;
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < half; ++k) {
    const std::uint64_t i0 = insert_zero_bit(static_cast<std::uint64_t>(k), q);
    kernel_1q(a, i0, i0 | mask, m);
  }
}

void apply_two_qubit(State& a, int w, int q0, int q1,
                     const Eigen::Matrix4cd& m) {
  const std::int64_t quarter = std::int64_t{1} << (w - 2);
  const int lo = std::min(q0, q1);
  const int hi = std::max(q0, q1);
  const std::uint64_t m0 = std::uint64_t{1} << q0;
  const std::uint64_t m1 = std::uint64_t{1} << q1;
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < quarter; ++k) {
    const std::uint64_t base =
        insert_zero_bit(insert_zero_bit(static_cast<std::uint64_t>(k), lo), hi);
    kernel_2q(a, base, m0, m1, m);
  }
}

void apply_permutation(State& a, int w, const std::vector<int>& perm) {
  State out(a.size());
  const std::int64_t n = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < n; ++x)
    out[permute_index(static_cast<std::uint64_t>(x), w, perm)] = a[x];
  a = std::move(out);
}

namespace ref {

void apply_one_qubit(State& a, int w, int q, const Eigen::Matrix2cd& m) {
  const std::uint64_t half = std::uint64_t{1} << (w - 1);
  const std::uint64_t mask = std::uint64_t{1} << q;
  for (std::uint64_t k = 0; k < half; ++k) {
    const std::uint64_t i0 = insert_zero_bit(k, q);
    kernel_1q(a, i0, i0 | mask, m);
  }
}

void apply_two_qubit(State& a, int w, int q0, int q1,
                     const Eigen::Matrix4cd& m) {
  const std::uint64_t quarter = std::uint64_t{1} << (w - 2);
  const int lo = std::min(q0, q1);
  const int hi = std::max(q0, q1);
  const std::uint64_t m0 = std::uint64_t{1} << q0;
  const std::uint64_t m1 = std::uint64_t{1} << q1;
  for (std::uint64_t k = 0; k < quarter; ++k) {
    const std::uint64_t base = insert_zero_bit(insert_zero_bit(k, lo), hi);
    kernel_2q(a, base, m0, m1, m);
  }
}

void apply_permutation(State& a, int w, const std::vector<int>& perm) {
  State out(a.size());
  for (std::uint64_t x = 0; x < a.size(); ++x)
    out[permute_index(x, w, perm)] = a[x];
  a = std::move(out);
}

}  // namespace ref

}  // namespace sv

namespace {

std::vector<int> permutation_of(const GateApplication& g) {
  std::vector<int> perm;
  perm.reserve(g.params.size());
  for (double p : g.params) perm.push_back(static_cast<int>(std::llround(p)));
  return perm;
}

NoiseClass noise_class_of(const GateApplication& g) {
  if (g.kind == GateKind::Id) return NoiseClass::Idle;
  if (g.kind == GateKind::PermuteAll) return NoiseClass::None;
  if (is_one_qubit_kind(g.kind)) return NoiseClass::OneQubit;
  if (is_two_qubit_kind(g.kind)) return NoiseClass::TwoQubit;
  return NoiseClass::None;
}

void flatten_into(const Circuit& c, const std::vector<int>& map, int outer_w,
                  std::vector<FlatGate>& out) {
  auto do_layers = [&](const std::vector<Layer>& layers) {
    for (const auto& layer : layers) {
      for (const auto& g : layer.gates) {
        if (g.kind == GateKind::SubroutineRef) {
          if (!g.body)
            throw SimArgError("SubroutineRef '" + g.label + "' has no body");
          std::vector<int> inner;
          inner.reserve(g.targets.size());
          for (int t : g.targets) inner.push_back(map[t]);
          flatten_into(*g.body, inner, outer_w, out);
        } else if (g.kind == GateKind::PermuteAll) {
          // Lift a (possibly nested) permutation onto the outer register.
          std::vector<int> full(outer_w);
          for (int i = 0; i < outer_w; ++i) full[i] = i;
          const auto perm = permutation_of(g);
          for (std::size_t i = 0; i < perm.size(); ++i)
            full[map[i]] = map[perm[i]];
          GateApplication lifted;
          lifted.kind = GateKind::PermuteAll;
          for (int i = 0; i < outer_w; ++i) {
            lifted.targets.push_back(i);
            lifted.params.push_back(static_cast<double>(full[i]));
          }
          out.push_back({std::move(lifted), NoiseClass::None});
        } else {
          GateApplication remapped = g;
          for (auto& t : remapped.targets) t = map[t];
          out.push_back({std::move(remapped), noise_class_of(g)});
        }
      }
    }
  };
  do_layers(c.prefix);
  do_layers(c.central);
  do_layers(c.postfix);
}

bool all_clifford(const std::vector<FlatGate>& gates) {
  return std::all_of(gates.begin(), gates.end(), [](const FlatGate& fg) {
    return is_clifford_kind(fg.gate.kind);
  });
}

void apply_flat_gate(sv::State& a, int w, const GateApplication& g,
                     double angle_shift, bool parallel) {
  if (g.kind == GateKind::PermuteAll) {
    const auto perm = permutation_of(g);
    parallel ? sv::apply_permutation(a, w, perm)
             : sv::ref::apply_permutation(a, w, perm);
  } else if (is_one_qubit_kind(g.kind)) {
    if (g.kind == GateKind::Id) return;
    const auto m = one_qubit_unitary(
        g, is_rotation_kind(g.kind) ? angle_shift : 0.0);
    parallel ? sv::apply_one_qubit(a, w, g.targets[0], m)
             : sv::ref::apply_one_qubit(a, w, g.targets[0], m);
  } else {
    const auto m = two_qubit_unitary(g);
    parallel ? sv::apply_two_qubit(a, w, g.targets[0], g.targets[1], m)
             : sv::ref::apply_two_qubit(a, w, g.targets[0], g.targets[1], m);
  }
}

}  // namespace

std::vector<FlatGate> flatten(const Circuit& c) {
  std::vector<FlatGate> out;
  std::vector<int> map(c.width);
  for (int i = 0; i < c.width; ++i) map[i] = i;
  flatten_into(c, map, c.width, out);
  return out;
}

sv::State statevector(const Circuit& c, int width_cap) {
  if (c.width > width_cap)
    throw WidthCapError("width " + std::to_string(c.width) +
                        " exceeds dense cap " + std::to_string(width_cap));
  sv::State a(std::uint64_t{1} << c.width, 0.0);
  a[0] = 1.0;
  for (const auto& fg : flatten(c))
    apply_flat_gate(a, c.width, fg.gate, 0.0, true);
  return a;
}

Distribution ideal_distribution(const Circuit& c, int width_cap) {
  const auto gates = flatten(c);
  if (all_clifford(gates)) return stabilizer_distribution(c);
  const auto a = statevector(c, width_cap);
  Distribution dist;
  dist.width = c.width;
  for (std::uint64_t k = 0; k < a.size(); ++k) {
    const double p = std::norm(a[k]);
    if (p > 0) dist.probs[k] = p;
  }
  return dist;
}

namespace {

// One trajectory: statevector walk with coherent shifts, sampled Pauli
// insertions, one measurement sample, then readout flips.
std::uint64_t run_trajectory(const std::vector<FlatGate>& gates, int w,
                             const NoiseModel& noise, Rng& rng) {
  sv::State a(std::uint64_t{1} << w, 0.0);
  a[0] = 1.0;
  static const GateKind kPaulis1q[3] = {GateKind::X, GateKind::Y, GateKind::Z};

  for (const auto& fg : gates) {
    apply_flat_gate(a, w, fg.gate, noise.coherent_overrotation, false);
    double eps = 0.0;
    switch (fg.noise) {
      case NoiseClass::OneQubit:
        eps = noise.eps1;
        break;
      case NoiseClass::TwoQubit:
        eps = noise.eps2;
        break;
      case NoiseClass::Idle:
        eps = noise.eps_idle;
        break;
      case NoiseClass::None:
        break;
    }
    if (eps <= 0.0 || !rng.bernoulli(eps)) continue;
    if (fg.noise == NoiseClass::TwoQubit) {
      // Uniform non-identity two-qubit Pauli: index in [1, 16).
      const auto idx = 1 + rng.uniform_int(15);
      const int pa = static_cast<int>(idx % 4);
      const int pb = static_cast<int>(idx / 4);
      if (pa)
        apply_flat_gate(a, w, gate(kPaulis1q[pa - 1], {fg.gate.targets[0]}),
                        0.0, false);
      if (pb)
        apply_flat_gate(a, w, gate(kPaulis1q[pb - 1], {fg.gate.targets[1]}),
                        0.0, false);
    } else {
      const auto idx = rng.uniform_int(3);
      apply_flat_gate(a, w, gate(kPaulis1q[idx], {fg.gate.targets[0]}), 0.0,
                      false);
    }
  }

  // Sample one basis state.
  const double u = rng.uniform();
  double acc = 0.0;
  std::uint64_t sample = a.size() - 1;
  for (std::uint64_t k = 0; k < a.size(); ++k) {
    acc += std::norm(a[k]);
    if (u < acc) {
      sample = k;
      break;
    }
  }

  if (noise.eps_readout > 0.0) {
    for (int q = 0; q < w; ++q)
      if (rng.bernoulli(noise.eps_readout)) sample ^= std::uint64_t{1} << q;
  }
  return sample;
}

}  // namespace

OutcomeRecord sample_noisy(const Circuit& c, const NoiseModel& noise,
                           std::uint64_t shots, std::uint64_t seed,
                           int width_cap) {
  if (shots == 0) throw SimArgError("shot count must be positive");
  if (c.width > width_cap)
    throw WidthCapError("width " + std::to_string(c.width) +
                        " exceeds dense cap " + std::to_string(width_cap));
  const auto gates = flatten(c);

  std::vector<std::uint64_t> samples(shots);
  const std::int64_t n = static_cast<std::int64_t>(shots);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, "traj", {static_cast<std::uint64_t>(i)}));
    samples[i] = run_trajectory(gates, c.width, noise, rng);
  }

  OutcomeRecord rec;
  rec.width = c.width;
  rec.shots = shots;
  for (auto s : samples) ++rec.counts[s];
  return rec;
}

namespace {

using Mat = Eigen::MatrixXcd;

// rho <- U rho U^dag using statevector kernels on columns: first A = U rho,
// then rho = (U A^dag)^dag.
template <typename ApplyCols>
void conjugate_density(Mat& rho, ApplyCols&& apply_cols) {
  apply_cols(rho);
  Mat adj = rho.adjoint();
  apply_cols(adj);
  rho = adj.adjoint();
}

void apply_gate_columns(Mat& m, int w, const GateApplication& g,
                        double angle_shift) {
  const std::uint64_t dim = std::uint64_t{1} << w;
  sv::State col(dim);
  for (std::uint64_t c = 0; c < dim; ++c) {
    for (std::uint64_t r = 0; r < dim; ++r) col[r] = m(r, c);
    apply_flat_gate(col, w, g, angle_shift, false);
    for (std::uint64_t r = 0; r < dim; ++r) m(r, c) = col[r];
  }
}

void depolarize(Mat& rho, int w, const std::vector<int>& targets, double eps) {
  if (eps <= 0.0) return;
  static const GateKind kPaulis1q[3] = {GateKind::X, GateKind::Y, GateKind::Z};
  const int k = static_cast<int>(targets.size());
  const int n_paulis = (1 << (2 * k)) - 1;  // 3 or 15
  Mat mix = Mat::Zero(rho.rows(), rho.cols());
  for (int idx = 1; idx <= n_paulis; ++idx) {
    Mat term = rho;
    int rem = idx;
    for (int t = 0; t < k; ++t) {
      const int p = rem % 4;
      rem /= 4;
      if (p)
        conjugate_density(term, [&](Mat& m) {
          apply_gate_columns(m, w, gate(kPaulis1q[p - 1], {targets[t]}), 0.0);
        });
    }
    mix += term;
  }
  rho = (1.0 - eps) * rho + (eps / n_paulis) * mix;
}

}  // namespace

Distribution density_matrix_distribution(const Circuit& c,
                                         const NoiseModel& noise,
                                         int width_cap) {
  if (c.width > width_cap)
    throw WidthCapError("width " + std::to_string(c.width) +
                        " exceeds density-matrix cap " +
                        std::to_string(width_cap));
  const std::uint64_t dim = std::uint64_t{1} << c.width;
  Mat rho = Mat::Zero(dim, dim);
  rho(0, 0) = 1.0;

  for (const auto& fg : flatten(c)) {
    conjugate_density(rho, [&](Mat& m) {
      apply_gate_columns(m, c.width, fg.gate,
                         is_rotation_kind(fg.gate.kind)
                             ? noise.coherent_overrotation
                             : 0.0);
    });
    double eps = 0.0;
    switch (fg.noise) {
      case NoiseClass::OneQubit:
        eps = noise.eps1;
        break;
      case NoiseClass::TwoQubit:
        eps = noise.eps2;
        break;
      case NoiseClass::Idle:
        eps = noise.eps_idle;
        break;
      case NoiseClass::None:
        break;
    }
    if (eps > 0.0) depolarize(rho, c.width, fg.gate.targets, eps);
  }

  std::vector<double> p(dim);
  for (std::uint64_t k = 0; k < dim; ++k) p[k] = rho(k, k).real();

  // Readout: independent classical bit flips.
  if (noise.eps_readout > 0.0) {
    const double e = noise.eps_readout;
    for (int q = 0; q < c.width; ++q) {
      std::vector<double> next(dim);
      const std::uint64_t mask = std::uint64_t{1} << q;
      for (std::uint64_t k = 0; k < dim; ++k)
        next[k] = (1.0 - e) * p[k] + e * p[k ^ mask];
      p = std::move(next);
    }
  }

  Distribution dist;
  dist.width = c.width;
  for (std::uint64_t k = 0; k < dim; ++k)
    if (p[k] > 0) dist.probs[k] = p[k];
  return dist;
}

Eigen::MatrixXcd circuit_unitary(const Circuit& c, int width_cap) {
  if (c.width > width_cap)
    throw WidthCapError("width exceeds unitary cap");
  const std::uint64_t dim = std::uint64_t{1} << c.width;
  const auto gates = flatten(c);
  Eigen::MatrixXcd u(dim, dim);
  sv::State col(dim);
  for (std::uint64_t j = 0; j < dim; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    for (const auto& fg : gates) apply_flat_gate(col, c.width, fg.gate, 0.0, false);
    for (std::uint64_t i = 0; i < dim; ++i) u(i, j) = col[i];
  }
  return u;
}

Eigen::MatrixXcd layers_unitary(int width, const std::vector<Layer>& layers,
                                int width_cap) {
  Circuit c = make_circuit(width, {}, layers, {});
  return circuit_unitary(c, width_cap);
}

}  // namespace vb
