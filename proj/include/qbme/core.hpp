#pragma once

#include "qbme/errors.hpp"
#include "qbme/types.hpp"

namespace qbme::core {

// Checks Hermiticity, positive semidefiniteness and unit trace against the
// given tolerances. Throws NotHermitian / NotPSD / TraceNotOne with the
// measured deviation in the message.
DensityMatrix validate_density(const ComplexMatrix& m, const Tolerances& t);
DensityMatrix validate_density(const ComplexMatrix& m);

PureState validate_pure(const ComplexVector& a, const Tolerances& t);
PureState validate_pure(const ComplexVector& a);

Unitary validate_unitary(const ComplexMatrix& m, const Tolerances& t);
Unitary validate_unitary(const ComplexMatrix& m);

// Checks each effect Hermitian PSD and completeness sum = identity.
Povm validate_povm(Index d, std::vector<ComplexMatrix> effects,
                   const Tolerances& t);
Povm validate_povm(Index d, std::vector<ComplexMatrix> effects);

// Uhlmann fidelity F = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to
// [0, 1]. Qubit pairs use the closed form tr(rho sigma) + 2 sqrt(det rho det
// sigma).
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double infidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Unvalidated worker behind fidelity(); callers guarantee valid states.
double fidelity_mat(const ComplexMatrix& rho, const ComplexMatrix& sigma);

// Pure-state reduction <psi|sigma|psi>.
double fidelity_pure(const ComplexVector& psi, const ComplexMatrix& sigma);

// Hermitian square root with eigenvalue clamping: eigenvalues in [-psd, 0)
// are clamped to 0, anything below -psd throws NotPSD.
ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& h, const Tolerances& t);

double purity(const ComplexMatrix& rho);

RealVector validate_prob(const RealVector& p, const Tolerances& t);
RealVector validate_prob(const RealVector& p);

}  // namespace qbme::core
