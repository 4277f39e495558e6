#include "qbme/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qbme::core {

Tolerances& tols() {
  static Tolerances t;
  return t;
}

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

void check_finite_square(const ComplexMatrix& m, int d_cap) {
  if (m.rows() != m.cols())
    throw DimensionMismatch("matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected square");
  if (m.rows() < 1) throw InvalidArgument("empty matrix");
  if (m.rows() > d_cap)
    throw InvalidArgument("d = " + std::to_string(m.rows()) +
                          " exceeds the configured cap " +
                          std::to_string(d_cap));
  if (!m.allFinite()) throw InvalidArgument("matrix has non-finite entries");
}

}  // namespace

DensityMatrix validate_density(const ComplexMatrix& m, const Tolerances& t) {
  check_finite_square(m, t.d_cap);
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > t.hermitian)
    throw NotHermitian("max |M - M^dag| = " + num(herm));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -t.psd) throw NotPSD("min eigenvalue = " + num(min_eig));
  const double tr = m.trace().real();
  if (std::abs(tr - 1.0) > t.trace_one) throw TraceNotOne(num(tr));
  return DensityMatrix{m};
}

DensityMatrix validate_density(const ComplexMatrix& m) {
  return validate_density(m, tols());
}

PureState validate_pure(const ComplexVector& a, const Tolerances& t) {
  if (a.size() < 1) throw InvalidArgument("empty state vector");
  if (!a.allFinite()) throw InvalidArgument("state vector has non-finite entries");
  const double n = a.norm();
  if (std::abs(n - 1.0) > t.pure_norm)
    throw NotNormalized("norm = " + num(n));
  return PureState{a};
}

PureState validate_pure(const ComplexVector& a) {
  return validate_pure(a, tols());
}

Unitary validate_unitary(const ComplexMatrix& m, const Tolerances& t) {
  check_finite_square(m, t.d_cap);
  const Index d = m.rows();
  const double dev =
      (m.adjoint() * m - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > t.unitarity)
    throw NotUnitary("max |U^dag U - I| = " + num(dev));
  return Unitary{m};
}

Unitary validate_unitary(const ComplexMatrix& m) {
  return validate_unitary(m, tols());
}

Povm validate_povm(Index d, std::vector<ComplexMatrix> effects,
                   const Tolerances& t) {
  if (effects.empty()) throw InvalidArgument("POVM with no effects");
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (size_t i = 0; i < effects.size(); ++i) {
    const ComplexMatrix& e = effects[i];
    if (e.rows() != d || e.cols() != d)
      throw DimensionMismatch("effect " + std::to_string(i) + " is " +
                              std::to_string(e.rows()) + "x" +
                              std::to_string(e.cols()));
    const double herm = (e - e.adjoint()).cwiseAbs().maxCoeff();
    if (herm > t.hermitian)
      throw NotHermitian("effect " + std::to_string(i) +
                         ": max |E - E^dag| = " + num(herm));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(e, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -t.psd)
      throw NotPSD("effect " + std::to_string(i) +
                   ": min eigenvalue = " + num(min_eig));
    sum += e;
  }
  const double dev =
      (sum - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (dev > t.povm_completeness)
    throw InvalidArgument("effects sum deviates from identity by " + num(dev));
  return Povm{d, std::move(effects)};
}

Povm validate_povm(Index d, std::vector<ComplexMatrix> effects) {
  return validate_povm(d, std::move(effects), tols());
}

ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& h, const Tolerances& t) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  RealVector ev = es.eigenvalues();
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -t.psd) throw NotPSD("eigenvalue " + num(ev[i]));
    ev[i] = std::sqrt(std::max(0.0, ev[i]));
  }
  return es.eigenvectors() * ev.asDiagonal() *
         es.eigenvectors().adjoint();
}

double purity(const ComplexMatrix& rho) {
  return (rho * rho).trace().real();
}

double fidelity_pure(const ComplexVector& psi, const ComplexMatrix& sigma) {
  const double f = (psi.adjoint() * sigma * psi)(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

double fidelity_mat(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  const Index d = rho.rows();
  if (d == 1) return 1.0;
  if (d == 2) {
    // F = tr(rho sigma) + 2 sqrt(det rho det sigma) for qubits; determinants
    // under the noise floor are treated as exact zeros (see below).
    const double tr = (rho * sigma).trace().real();
    auto det_of = [](const ComplexMatrix& m) {
      const double det = m.determinant().real();
      return det > 1e-13 ? det : 0.0;
    };
    return std::clamp(tr + 2.0 * std::sqrt(det_of(rho) * det_of(sigma)), 0.0,
                      1.0);
  }
  // Zeroing eigenvalues under a relative noise floor keeps rank-deficient
  // inputs exact; otherwise sqrt turns O(eps) noise into O(sqrt(eps)) error.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> er(rho);
  RealVector ev = er.eigenvalues();
  const double floor_r = ev.maxCoeff() * 1e-13;
  for (Index i = 0; i < d; ++i)
    ev[i] = ev[i] > floor_r ? std::sqrt(ev[i]) : 0.0;
  const ComplexMatrix sr =
      er.eigenvectors() * ev.asDiagonal() * er.eigenvectors().adjoint();
  const ComplexMatrix inner = sr * sigma * sr;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(inner,
                                                  Eigen::EigenvaluesOnly);
  const double floor_i = es.eigenvalues().maxCoeff() * 1e-13;
  double s = 0.0;
  for (Index i = 0; i < d; ++i)
    if (es.eigenvalues()[i] > floor_i) s += std::sqrt(es.eigenvalues()[i]);
  return std::clamp(s * s, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.d() != sigma.d())
    throw DimensionMismatch("fidelity of " + std::to_string(rho.d()) +
                            "-dim and " + std::to_string(sigma.d()) +
                            "-dim states");
  return fidelity_mat(rho.m, sigma.m);
}

double infidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return 1.0 - fidelity(rho, sigma);
}

RealVector validate_prob(const RealVector& p, const Tolerances& t) {
  if (p.size() < 1) throw InvalidArgument("empty probability vector");
  if (p.minCoeff() < 0.0)
    throw NotNormalized("negative entry " + num(p.minCoeff()));
  const double s = p.sum();
  if (std::abs(s - 1.0) > t.prob_sum)
    throw NotNormalized("sum = " + num(s));
  return p;
}

RealVector validate_prob(const RealVector& p) {
  return validate_prob(p, tols());
}

}  // namespace qbme::core
