#pragma once

#include <string>
#include <vector>

#include "qbme/core.hpp"
#include "qbme/sampling.hpp"

namespace qbme::designs {

using core::Index;
using core::Unitary;

struct UnitarySet {
  Index d = 2;
  std::vector<Unitary> elements;
  std::string label;  // pauli | qubit-2design | clifford | custom
  int claimed_order = 1;
  Index size() const { return static_cast<Index>(elements.size()); }
};

// {I, X, Y, Z}, an exact 1-design.
UnitarySet pauli_group();

// Binary tetrahedral image in U(2): {P T^k} with T = (I - i(X+Y+Z))/2,
// the order-3 Clifford rotation X->Y->Z->X. 12 elements, exact 2-design.
UnitarySet qubit_2design();

// Closure of <H, S> modulo global phase; 24 elements, exact 3-design.
UnitarySet clifford_group_qubit();

// (1/|S|^2) sum_{U,V} |tr(U^dag V)|^(2t).
double frame_potential(const UnitarySet& s, int t);

// Haar value of the frame potential: sum over partitions of t with at most
// d rows of f_lambda^2 (hook length formula). Equals t! when t <= d; at
// d = 2 the sequence is the Catalan numbers 1, 2, 5, 14, ...
double haar_frame_potential(Index d, int t);

// Certifies the claimed design order: frame_potential(s, t) must equal the
// Haar value within tols().design_cert for every t <= claimed_order, and
// exceed it by at least 1e-3 at claimed_order + 1 (strictness). Throws
// CertificationFailed otherwise.
void certify(const UnitarySet& s);

const Unitary& sample_from_set(const UnitarySet& s, sampling::RngStream& rng);

// Lookup by CLI name: pauli | 2design | clifford.
const UnitarySet& named_set(const std::string& name);

// JSON import/export: {d, label, claimed_design_order, elements as nested
// [re, im]}. Import validates unitarity and runs certification.
UnitarySet set_from_json(const std::string& path);
void set_to_json(const UnitarySet& s, const std::string& path);

}  // namespace qbme::designs
