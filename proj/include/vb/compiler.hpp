#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vb/circuit.hpp"
#include "vb/stabilizer.hpp"

namespace vb {

// Barrier/compilation policy.  Free allows whole-circuit recompilation,
// PerSegment optimizes only between adjacent barriers, PerLayer lowers each
// layer independently, None performs literal expansion only.
enum class PolicyVariant { Free, PerSegment, PerLayer, None };

struct CompilationPolicy {
  PolicyVariant variant = PolicyVariant::PerSegment;
};

const char* policy_name(PolicyVariant v);
std::optional<PolicyVariant> policy_from_name(const std::string& name);

struct NonNativeGateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConnectivityViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonGeneratingGateSetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonUnitaryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Target gate alphabet.  Absent edges means all-to-all connectivity; edges are
// unordered pairs.  max_parallel_twoq caps two-qubit gates per output layer.
struct NativeGateSet {
  std::vector<GateKind> oneq;
  std::vector<GateKind> twoq;
  std::optional<std::vector<std::pair<int, int>>> edges;
  std::optional<int> max_parallel_twoq;

  bool allows_oneq(GateKind k) const;
  bool allows_twoq(GateKind k) const;
  bool allows_edge(int a, int b) const;

  std::string to_json() const;
  static NativeGateSet from_json(const std::string& text);
};

// {RZ, RX, H, S, Sdg, X} + {CNOT, CZ}, all-to-all.
NativeGateSet default_native_gate_set();

// Inclusive range of central-layer indices forming one barrier-delimited
// segment.
struct Segment {
  int first = 0;
  int last = -1;
};

// Partition of the central layers split exactly at interior true barriers.
std::vector<Segment> segment_by_barriers(const Circuit& c);

// U = exp(i*phase) * RZ(alpha) * RY(beta) * RZ(gamma), max-entry error 1e-10.
struct ZyzDecomposition {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double phase = 0.0;
};

ZyzDecomposition decompose_1q(const Eigen::Matrix2cd& u);

// Gate sequence (time order, targets q0/q1) equal to u up to global phase
// within 1e-8 max-entry error, using at most three CNOTs.
struct Su4Decomposition {
  std::vector<GateApplication> gates;
  int cnot_count = 0;
};

Su4Decomposition decompose_su4(const Eigen::Matrix4cd& u, int q0 = 0,
                               int q1 = 1);

// Gate list over {H, S, Sdg, X, Z, CNOT, SWAP} whose tableau equals T
// exactly, phases included.
std::vector<GateApplication> clifford_synthesis_gates(const CliffordTableau& T);

// Same, rewritten into the native alphabet and packed into layers.  Requires
// a Clifford-generating discrete set (H, S or Sdg, CNOT or CZ).
Circuit clifford_synthesis(const CliffordTableau& T,
                           const NativeGateSet& native);

Circuit compile(const Circuit& c, const CompilationPolicy& policy,
                const NativeGateSet& native);

struct DepthBreakdown {
  int prefix = 0;
  int central = 0;
  int postfix = 0;
};

// Central layer count; the breakdown reports prefix/postfix separately.
int physical_depth(const Circuit& c);
DepthBreakdown physical_depth_breakdown(const Circuit& c);

}  // namespace vb
