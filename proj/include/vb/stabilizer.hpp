#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vb/circuit.hpp"
#include "vb/distribution.hpp"
#include "vb/rng.hpp"

namespace vb {

struct UnsupportedGateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WidthMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Hermitian Pauli on w qubits with an overall sign (-1)^sign.
struct PauliRow {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> z;
  std::uint8_t sign = 0;

  explicit PauliRow(int w = 0) : x(w, 0), z(w, 0) {}
  bool operator==(const PauliRow&) const = default;
};

// Product of two Hermitian Paulis; the result must again be Hermitian
// (guaranteed when the operands commute or the caller tracks usage as in the
// CHP rowsum, where products of stabilizer elements stay Hermitian).
PauliRow pauli_multiply(const PauliRow& a, const PauliRow& b);

// Conjugates each row in place by a Clifford gate.  Throws
// UnsupportedGateError for non-Clifford kinds.
void conjugate_rows(std::vector<PauliRow>& rows, const GateApplication& g);

// Clifford unitary as images of the generators: rows[i] = U X_i U^dag,
// rows[w+i] = U Z_i U^dag.  Global phase is not represented.
struct CliffordTableau {
  int w = 0;
  std::vector<PauliRow> rows;

  bool operator==(const CliffordTableau&) const = default;
};

CliffordTableau tableau_identity(int w);

// Tableau of g composed after T.
CliffordTableau tableau_apply_gate(CliffordTableau T, const GateApplication& g);

// Tableau of A after B (B acts first).
CliffordTableau tableau_compose(const CliffordTableau& A,
                                const CliffordTableau& B);

CliffordTableau tableau_inverse(const CliffordTableau& T);

// Image of an arbitrary Hermitian Pauli under the tableau's Clifford.
PauliRow tableau_image(const CliffordTableau& T, const PauliRow& p);

// True iff the binary symplectic condition holds on the tableau's rows.
bool tableau_is_symplectic(const CliffordTableau& T);

// Uniformly random element of the w-qubit Clifford group (modulo global
// phase): a uniformly sampled symplectic matrix via symplectic Gram-Schmidt
// plus independent uniform sign bits.
CliffordTableau random_clifford(int w, Rng& rng);

// Tableau of a Clifford-only circuit (SubroutineRefs expanded).
CliffordTableau tableau_of_circuit(const Circuit& c);

// Aaronson-Gottesman style stabilizer state: rows 0..w-1 destabilizers,
// rows w..2w-1 stabilizers.
struct StabilizerState {
  int w = 0;
  std::vector<PauliRow> rows;

  explicit StabilizerState(int width);

  void apply(const GateApplication& g);
  void apply_circuit(const Circuit& c);

  // Measurement of qubit q in the computational basis.
  // If the outcome is deterministic, returns {true, outcome} without change.
  // Otherwise returns {false, 0}; use collapse() to postselect a branch.
  std::pair<bool, int> peek_measure(int q) const;
  void collapse(int q, int outcome);

  // Exact computational-basis output distribution (uniform over an affine
  // subspace; support size is a power of two).
  Distribution measurement_distribution() const;
};

// Exact output distribution of a Clifford-only circuit on |0...0>.
Distribution stabilizer_distribution(const Circuit& c);

}  // namespace vb
