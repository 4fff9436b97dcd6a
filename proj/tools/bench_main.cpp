// Kernel benchmark: OpenMP statevector kernels against the serial reference.
//
// For each width, applies the same random gate workload through both kernel
// sets, reports wall time and speedup, and cross-checks the final states.

#include <chrono>
#include <complex>
#include <cstdio>
#include <vector>

#include <Eigen/Dense>

#include "vb/gates.hpp"
#include "vb/rng.hpp"
#include "vb/simulator.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Workload {
  std::vector<std::pair<int, Eigen::Matrix2cd>> oneq;
  std::vector<std::tuple<int, int, Eigen::Matrix4cd>> twoq;
  std::vector<std::vector<int>> perms;
};

Workload make_workload(int w, int n_oneq, int n_twoq, int n_perm,
                       vb::Rng& rng) {
  Workload wl;
  for (int i = 0; i < n_oneq; ++i)
    wl.oneq.emplace_back(static_cast<int>(rng.uniform_int(w)),
                         vb::random_u2(rng));
  for (int i = 0; i < n_twoq; ++i) {
    int a = static_cast<int>(rng.uniform_int(w));
    int b = static_cast<int>(rng.uniform_int(w - 1));
    if (b >= a) ++b;
    wl.twoq.emplace_back(a, b, vb::random_su4(rng));
  }
  for (int i = 0; i < n_perm; ++i) {
    std::vector<int> p(w);
    for (int q = 0; q < w; ++q) p[q] = q;
    for (int q = w - 1; q > 0; --q) {
      const int r = static_cast<int>(rng.uniform_int(q + 1));
      std::swap(p[q], p[r]);
    }
    wl.perms.push_back(p);
  }
  return wl;
}

template <typename One, typename Two, typename Perm>
double run_workload(vb::sv::State& a, int w, const Workload& wl, One one,
                    Two two, Perm perm) {
  const auto t0 = Clock::now();
  for (const auto& [q, m] : wl.oneq) one(a, w, q, m);
  for (const auto& [q0, q1, m] : wl.twoq) two(a, w, q0, q1, m);
  for (const auto& p : wl.perms) perm(a, w, p);
  return ms_since(t0);
}

}  // namespace

int main() {
  std::printf("%5s %10s %12s %12s %9s %12s\n", "width", "gates", "parallel",
              "serial", "speedup", "max |diff|");
  for (int w = 10; w <= 22; w += 3) {
    vb::Rng rng(vb::derive_seed(12345, "bench", {static_cast<std::uint64_t>(w)}));
    const int n_oneq = 64, n_twoq = 64, n_perm = 4;
    const Workload wl = make_workload(w, n_oneq, n_twoq, n_perm, rng);

    vb::sv::State base(std::size_t{1} << w, {0.0, 0.0});
    base[0] = 1.0;
    vb::sv::State a = base, b = base;

    const double tp = run_workload(a, w, wl, vb::sv::apply_one_qubit,
                                   vb::sv::apply_two_qubit,
                                   vb::sv::apply_permutation);
    const double ts = run_workload(b, w, wl, vb::sv::ref::apply_one_qubit,
                                   vb::sv::ref::apply_two_qubit,
                                   vb::sv::ref::apply_permutation);

    double max_diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      max_diff = std::max(max_diff, std::abs(a[i] - b[i]));

    std::printf("%5d %10d %10.2fms %10.2fms %8.2fx %12.3e\n", w,
                n_oneq + n_twoq + n_perm, tp, ts, ts / tp, max_diff);
    if (max_diff > 1e-10) {
      std::fprintf(stderr, "kernel mismatch at width %d\n", w);
      return 1;
    }
  }
  return 0;
}
