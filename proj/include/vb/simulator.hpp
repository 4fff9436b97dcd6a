#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vb/circuit.hpp"
#include "vb/distribution.hpp"
#include "vb/rng.hpp"

namespace vb {

struct WidthCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimArgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoiseModel {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps_idle = 0.0;
  double eps_readout = 0.0;
  double coherent_overrotation = 0.0;
};

struct OutcomeRecord {
  std::string circuit_id;
  int width = 0;
  std::uint64_t shots = 0;
  std::map<std::uint64_t, std::uint64_t> counts;
};

// Statevector gate kernels.  The default entry points run the OpenMP-parallel
// implementations; sv::ref holds the serial reference used by the tests and
// the kernel benchmark.  Two-qubit matrices act on basis index
// 2*b(q0) + b(q1).
namespace sv {

using State = std::vector<std::complex<double>>;

void apply_one_qubit(State& a, int w, int q, const Eigen::Matrix2cd& m);
void apply_two_qubit(State& a, int w, int q0, int q1,
                     const Eigen::Matrix4cd& m);
// perm[i] is the new position of qubit i.
void apply_permutation(State& a, int w, const std::vector<int>& perm);

namespace ref {
void apply_one_qubit(State& a, int w, int q, const Eigen::Matrix2cd& m);
void apply_two_qubit(State& a, int w, int q0, int q1,
                     const Eigen::Matrix4cd& m);
void apply_permutation(State& a, int w, const std::vector<int>& perm);
}  // namespace ref

}  // namespace sv

// A circuit flattened to a linear gate sequence with subroutines expanded and
// targets rewritten to the outer register.
enum class NoiseClass { OneQubit, TwoQubit, Idle, None };

struct FlatGate {
  GateApplication gate;
  NoiseClass noise = NoiseClass::None;
};

std::vector<FlatGate> flatten(const Circuit& c);

// Exact amplitudes of circuit applied to |0...0>.
sv::State statevector(const Circuit& c, int width_cap = 16);

// |amplitude|^2 distribution; Clifford-only circuits take the stabilizer fast
// path and may exceed the dense width cap.
Distribution ideal_distribution(const Circuit& c, int width_cap = 16);

// Monte Carlo Pauli-trajectory sampling under the noise model.  Trajectories
// are independent; trajectory i draws from Rng(derive_seed(seed, "traj", i)),
// so the result does not depend on the parallel schedule.
OutcomeRecord sample_noisy(const Circuit& c, const NoiseModel& noise,
                           std::uint64_t shots, std::uint64_t seed,
                           int width_cap = 16);

// Exact output distribution under the same noise semantics with depolarizing
// applied as the probability-weighted Pauli channel.  Verification oracle.
Distribution density_matrix_distribution(const Circuit& c,
                                         const NoiseModel& noise,
                                         int width_cap = 6);

// Dense unitary of a circuit (prefix, central, postfix all included).
Eigen::MatrixXcd circuit_unitary(const Circuit& c, int width_cap = 12);

// Dense unitary of a slice of layers on `width` qubits.
Eigen::MatrixXcd layers_unitary(int width, const std::vector<Layer>& layers,
                                int width_cap = 12);

}  // namespace vb
