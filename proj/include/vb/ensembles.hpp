#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vb/circuit.hpp"

namespace vb {

struct ShapeUnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnsembleArgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EnsembleVariant { Single, ExplicitList, Sampled };

// A benchmark circuit family instantiated at one shape.  Circuits with a
// definite ideal outcome record it per circuit in metadata.extra
// ["ideal_outcome"]; the family-level field is set when it is uniform across
// the family.
struct EnsembleSpec {
  EnsembleVariant variant = EnsembleVariant::Single;
  std::string family;
  Shape shape;
  std::vector<Circuit> circuits;
  std::string measure;  // description of the Sampled measure
  std::string family_rule;
  std::string compilation_policy;
  std::optional<std::string> ideal_outcome;
  std::uint64_t seed = 0;
  int k = 0;
  std::map<std::string, std::string> params;
};

// JSON manifest: family, shape, K, seed, parameters, family_rule,
// compilation_policy, and the embedded circuits.
std::string serialize_manifest(const EnsembleSpec& spec);
EnsembleSpec deserialize_manifest(const std::string& text);

// Quantum-volume style: per depth layer, a uniform random permutation of all
// qubits followed by Haar-random SU(4) blocks on consecutive pairs.
EnsembleSpec qv_ensemble(Shape shape, int k, std::uint64_t seed);

// d Clifford layers, the last being the inverse of the composition of the
// first d-1; barriers between every Clifford.
EnsembleSpec clifford_rb_ensemble(Shape shape, int k, std::uint64_t seed);

// Random stabilizer preparation, d i.i.d. Clifford-generator layers, and an
// inversion rotating the final stabilizer state to a known bitstring.
EnsembleSpec direct_rb_ensemble(Shape shape, int k, std::uint64_t seed,
                                double two_qubit_density = 0.25);

// Independent depth-d single-qubit Clifford RB on every qubit in parallel.
EnsembleSpec simultaneous_rb_ensemble(Shape shape, int k, std::uint64_t seed);

// d layers of X on every qubit; no compilation permitted.
EnsembleSpec rabi_ensemble(Shape shape);

// RY(pi/2) prefix, d layers of RZ(theta) (theta = 0 encodes idle),
// RY(-pi/2) postfix.
EnsembleSpec ramsey_ensemble(Shape shape, double theta);

// Nine circuits, one per (P,Q) in {X,Y,Z}^2: prepare the +1 eigenstate of P
// everywhere, idle for d layers, measure in the Q basis.
EnsembleSpec idle_tomography_ensemble(Shape shape);

// A germ is a short sequence of all-qubit gate layers; X and Y entries are
// emitted as RX(pi) / RY(pi) so coherent over-rotations act on them.
using Germ = std::vector<GateKind>;

std::vector<Germ> default_germ_set();

// For each germ and each of the 6 single-qubit Pauli fiducial pairs, repeat
// the germ floor(d/len) times; the realized depth is recorded in metadata.
// An explicitly empty germ set is an error.
EnsembleSpec germ_periodic_ensemble(Shape shape,
                                    const std::vector<Germ>& germ_set);
EnsembleSpec germ_periodic_ensemble(Shape shape);

// Hadamard prefix plus d Grover iterations (oracle + diffusion per layer).
// marked = nullopt draws k uniformly random marked states.
EnsembleSpec grover_ensemble(Shape shape,
                             std::optional<std::uint64_t> marked,
                             int k = 1, std::uint64_t seed = 0);

// d first-order Trotter steps of the transverse-field Ising chain
// H = -J sum Z_i Z_{i+1} - h sum X_i with time step dt.
EnsembleSpec trotter_ensemble(Shape shape, double J, double h, double dt);

}  // namespace vb
