#include "doctest.h"
#include "oracles.hpp"
#include "qbme/core.hpp"
#include "qbme/sampling.hpp"

using namespace qbme;
using core::Complex;
using core::ComplexMatrix;
using core::ComplexVector;

namespace {

ComplexMatrix proj(const ComplexVector& v) { return v * v.adjoint(); }

ComplexVector basis_vec(int d, int k) {
  ComplexVector v = ComplexVector::Zero(d);
  v[k] = 1.0;
  return v;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("validate_density accepts the maximally mixed state") {
  const auto rho = core::validate_density(ComplexMatrix::Identity(2, 2) / 2.0);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.m);
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.5));
  CHECK(es.eigenvalues()[1] == doctest::Approx(0.5));
}

TEST_CASE("validate_density accepts a pure projector") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  CHECK_NOTHROW(core::validate_density(m));
}

TEST_CASE("validate_density names the violated invariant") {
  ComplexMatrix bad_trace = ComplexMatrix::Identity(2, 2) * 0.6;
  CHECK_THROWS_AS(core::validate_density(bad_trace), TraceNotOne);

  ComplexMatrix not_herm = ComplexMatrix::Identity(2, 2) / 2.0;
  not_herm(0, 1) = Complex(0.1, 0.0);
  CHECK_THROWS_AS(core::validate_density(not_herm), NotHermitian);

  ComplexMatrix not_psd(2, 2);
  not_psd << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(core::validate_density(not_psd), NotPSD);

  ComplexMatrix rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(core::validate_density(rect), DimensionMismatch);
}

TEST_CASE("validate_density enforces the dimension cap") {
  const int d = core::tols().d_cap + 1;
  ComplexMatrix m = ComplexMatrix::Identity(d, d) / double(d);
  CHECK_THROWS_AS(core::validate_density(m), InvalidArgument);
}

TEST_CASE("fidelity on known pairs") {
  const auto z0 = core::validate_density(proj(basis_vec(2, 0)));
  const auto z1 = core::validate_density(proj(basis_vec(2, 1)));
  const auto mixed =
      core::validate_density(ComplexMatrix::Identity(2, 2) / 2.0);
  CHECK(core::fidelity(z0, z0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(core::fidelity(z0, z1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(core::fidelity(z0, mixed) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(core::infidelity(z0, z0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(core::infidelity(z0, z1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(core::infidelity(z0, mixed) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fidelity matches the dense-eigensolver oracle") {
  sampling::RngStream rng(7, 0);
  for (int i = 0; i < 40; ++i) {
    const int d = 2 + (i % 4);
    const auto rho = sampling::ginibre_state(d, rng);
    const auto sigma = sampling::ginibre_state(d, rng);
    const double f = core::fidelity(rho, sigma);
    CHECK(std::abs(f - oracles::fidelity(rho.m, sigma.m)) < 1e-8);
    CHECK(std::abs(f - core::fidelity(sigma, rho)) < 1e-9);  // symmetry
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
}

TEST_CASE("fidelity is 1 only for effectively equal states") {
  sampling::RngStream rng(13, 0);
  for (int i = 0; i < 20; ++i) {
    const auto rho = sampling::ginibre_state(3, rng);
    const auto sigma = sampling::ginibre_state(3, rng);
    CHECK(core::fidelity(rho, rho) > 1.0 - 1e-9);
    if ((rho.m - sigma.m).norm() > 1e-6) CHECK(core::fidelity(rho, sigma) < 1.0);
  }
}

TEST_CASE("pure-state reduction of the Uhlmann formula") {
  sampling::RngStream rng(21, 0);
  for (int i = 0; i < 20; ++i) {
    const auto psi = sampling::haar_pure_state(4, rng);
    const auto sigma = sampling::ginibre_state(4, rng);
    const auto rho = core::validate_density(proj(psi.a));
    const double direct = core::fidelity_pure(psi.a, sigma.m);
    CHECK(std::abs(core::fidelity(rho, sigma) - direct) < 1e-9);
  }
}

TEST_CASE("qubit closed form agrees with the oracle for mixed pairs") {
  sampling::RngStream rng(34, 0);
  for (int i = 0; i < 50; ++i) {
    const auto rho = i % 2 ? sampling::ginibre_state(2, rng)
                           : sampling::fixed_rank_state(2, 1, rng);
    const auto sigma = sampling::ginibre_state(2, rng);
    CHECK(std::abs(core::fidelity(rho, sigma) -
                   oracles::fidelity(rho.m, sigma.m)) < 1e-8);
  }
}

TEST_CASE("fidelity rejects mismatched dimensions") {
  const auto a = core::validate_density(ComplexMatrix::Identity(2, 2) / 2.0);
  const auto b = core::validate_density(ComplexMatrix::Identity(3, 3) / 3.0);
  CHECK_THROWS_AS(core::fidelity(a, b), DimensionMismatch);
}

TEST_CASE("validate_povm checks completeness") {
  std::vector<ComplexMatrix> good = {ComplexMatrix::Identity(2, 2) * 0.6,
                                     ComplexMatrix::Identity(2, 2) * 0.4};
  CHECK_NOTHROW(core::validate_povm(2, good));
  std::vector<ComplexMatrix> bad = {ComplexMatrix::Identity(2, 2) * 0.6,
                                    ComplexMatrix::Identity(2, 2) * 0.6};
  CHECK_THROWS_AS(core::validate_povm(2, bad), InvalidArgument);
}

TEST_CASE("validate_pure and validate_prob") {
  ComplexVector v(2);
  v << 1.0, 0.0;
  CHECK_NOTHROW(core::validate_pure(v));
  v *= 1.1;
  CHECK_THROWS_AS(core::validate_pure(v), NotNormalized);

  Eigen::VectorXd p(3);
  p << 0.2, 0.3, 0.5;
  CHECK_NOTHROW(core::validate_prob(p));
  p[0] = -0.2;
  CHECK_THROWS_AS(core::validate_prob(p), NotNormalized);
}

TEST_CASE("matrix_sqrt_psd clamps the tolerated negative tail") {
  ComplexMatrix h(2, 2);
  h << 4.0, 0.0, 0.0, -0.5e-10;
  const ComplexMatrix s = core::matrix_sqrt_psd(h, core::tols());
  CHECK(s(0, 0).real() == doctest::Approx(2.0));
  CHECK(std::abs(s(1, 1)) < 1e-5);
  h(1, 1) = -1.0;
  CHECK_THROWS_AS(core::matrix_sqrt_psd(h, core::tols()), NotPSD);
}

}  // TEST_SUITE
