#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vb {

enum class GateKind {
  Id,
  X,
  Y,
  Z,
  H,
  S,
  Sdg,
  RX,
  RY,
  RZ,
  U1q,
  CNOT,
  CZ,
  SWAP,
  SU4,
  PermuteAll,
  SubroutineRef,
};

const char* gate_kind_name(GateKind kind);
std::optional<GateKind> gate_kind_from_name(const std::string& name);

// Number of qubit targets a gate kind takes; PermuteAll and SubroutineRef are
// variable-arity and return -1.
int gate_arity(GateKind kind);

bool is_one_qubit_kind(GateKind kind);
bool is_two_qubit_kind(GateKind kind);
// Rotation-type gates carry real angle parameters (coherent over-rotation
// applies to these and only these).
bool is_rotation_kind(GateKind kind);
// Gate kinds representable in the Clifford tableau formalism.  Rotation kinds
// are excluded even at Clifford angles.
bool is_clifford_kind(GateKind kind);

struct Circuit;

struct GateApplication {
  GateKind kind = GateKind::Id;
  std::vector<int> targets;
  // Rotation angles (1 for RX/RY/RZ, 3 for U1q) or, for PermuteAll, the
  // permutation image of each qubit stored as integers.
  std::vector<double> params;
  // Row-major 4x4 unitary for SU4.  Basis convention: block index
  // 2*b(targets[0]) + b(targets[1]).
  std::vector<std::complex<double>> matrix;
  // SubroutineRef payload: a label plus a fully expanded body circuit whose
  // qubit j maps to targets[j].
  std::string label;
  std::shared_ptr<const Circuit> body;
};

struct Layer {
  std::vector<GateApplication> gates;
};

struct CircuitMetadata {
  std::string family;
  int shape_w = 0;
  int shape_d = 0;
  std::uint64_t seed = 0;
  int index = 0;
  std::map<std::string, std::string> extra;
};

// Layered circuit IR.  depth = central.size(); prefix/postfix layers hold
// state preparation and measurement-basis changes and never count toward the
// depth.  barriers has one flag per central-layer boundary, outer edges
// included, so barriers.size() == central.size() + 1.
struct Circuit {
  int width = 0;
  std::vector<Layer> prefix;
  std::vector<Layer> central;
  std::vector<Layer> postfix;
  std::vector<std::uint8_t> barriers;
  CircuitMetadata metadata;
};

struct Shape {
  int w = 0;
  int d = 0;
  bool operator==(const Shape&) const = default;
  bool operator<(const Shape& o) const {
    return w != o.w ? w < o.w : d < o.d;
  }
};

Shape shape(const Circuit& c);

struct Violation {
  std::string rule;
  int layer_index = -1;  // -1 when not tied to a specific layer
  std::string message;
};

// Returns all invariant violations; empty means the circuit is well formed.
std::vector<Violation> validate(const Circuit& c);

// Builds a circuit with all-false barriers sized to match central.
Circuit make_circuit(int width, std::vector<Layer> prefix,
                     std::vector<Layer> central, std::vector<Layer> postfix);

GateApplication gate(GateKind kind, std::vector<int> targets,
                     std::vector<double> params = {});
GateApplication su4_gate(int a, int b,
                         const std::vector<std::complex<double>>& matrix);
GateApplication permute_all_gate(const std::vector<int>& perm);
GateApplication subroutine_gate(std::string label, std::vector<int> targets,
                                std::shared_ptr<const Circuit> body);

// JSON text form per the normative circuit schema.
std::string serialize(const Circuit& c);

struct ParseError {
  std::string message;
};

// Throws ParseError with a field/position annotation on schema violations.
Circuit deserialize(const std::string& text);

}  // namespace vb
