#include <cmath>
#include <memory>

#include "doctest.h"
#include "qbme/bayes.hpp"
#include "qbme/pgm.hpp"

using namespace qbme;
using core::Complex;
using core::ComplexMatrix;
using core::DensityMatrix;
using core::Ensemble;
using core::RealVector;

namespace {

std::shared_ptr<Ensemble> basis_ensemble(int d) {
  auto ens = std::make_shared<Ensemble>();
  ens->kind = "custom";
  ens->d = d;
  ens->prior = RealVector::Constant(d, 1.0 / d);
  for (int x = 0; x < d; ++x) {
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    m(x, x) = 1.0;
    ens->states.push_back(DensityMatrix{m});
  }
  return ens;
}

std::shared_ptr<Ensemble> zero_plus_ensemble() {
  auto ens = std::make_shared<Ensemble>();
  ens->kind = "custom";
  ens->d = 2;
  ens->prior = RealVector::Constant(2, 0.5);
  ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  ComplexMatrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  ens->states = {DensityMatrix{zero}, DensityMatrix{plus}};
  return ens;
}

std::shared_ptr<Ensemble> random_ensemble(const std::string& kind, int d,
                                          int L, std::uint64_t seed) {
  sampling::RngStream rng(seed, 0);
  return std::make_shared<Ensemble>(sampling::build_ensemble(kind, d, L, rng));
}

}  // namespace

TEST_SUITE("pgm") {

TEST_CASE("orthonormal ensemble gives the projective measurement") {
  const auto meas = pgm::build_pgm(basis_ensemble(3));
  CHECK(meas.support_rank == 3);
  for (int x = 0; x < 3; ++x) {
    ComplexMatrix proj = ComplexMatrix::Zero(3, 3);
    proj(x, x) = 1.0;
    CHECK((meas.effects[x] - proj).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(meas.residual.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single-state ensemble yields the support projector") {
  auto ens = std::make_shared<Ensemble>();
  ens->kind = "custom";
  ens->d = 3;
  ens->prior = RealVector::Constant(1, 1.0);
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  ens->states.push_back(DensityMatrix{m});
  const auto meas = pgm::build_pgm(ens);
  CHECK(meas.support_rank == 2);
  ComplexMatrix proj = ComplexMatrix::Zero(3, 3);
  proj(0, 0) = 1.0;
  proj(1, 1) = 1.0;
  CHECK((meas.effects[0] - proj).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((meas.residual - (ComplexMatrix::Identity(3, 3) - proj))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("random ensemble satisfies the POVM invariants") {
  const auto ens = random_ensemble("ginibre", 3, 5, 51);
  const auto meas = pgm::build_pgm(ens);
  ComplexMatrix sum = meas.residual;
  for (const auto& e : meas.effects) sum += e;
  CHECK((sum - ComplexMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-9);
  double tr = 0.0;
  for (const auto& e : meas.effects) tr += (e * meas.rho_out.m).trace().real();
  CHECK(std::abs(tr - 1.0) < 1e-9);
  for (const auto& s : ens->states)
    CHECK(std::abs((meas.residual * s.m).trace().real()) < 1e-9);
  for (const auto& e : meas.effects) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(e, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("rank-deficient pure ensembles keep a residual") {
  const auto ens = random_ensemble("pure-haar", 4, 3, 52);
  const auto meas = pgm::build_pgm(ens);
  CHECK(meas.support_rank == 3);
  ComplexMatrix sum = meas.residual;
  for (const auto& e : meas.effects) sum += e;
  CHECK((sum - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(meas.residual.cwiseAbs().maxCoeff() > 0.1);  // genuinely nonzero
  for (const auto& s : ens->states)
    CHECK(std::abs((meas.residual * s.m).trace().real()) < 1e-9);
}

TEST_CASE("pgm_posterior identities") {
  const auto basis = pgm::build_pgm(basis_ensemble(3));
  for (int x = 0; x < 3; ++x) {
    const auto p = pgm::pgm_posterior(basis, x);
    for (int a = 0; a < 3; ++a)
      CHECK(p[a] == doctest::Approx(a == x ? 1.0 : 0.0));
  }

  // brute-force Bayes on {|0><0|, |+><+|}: p(x|a) = tr(E_x rho_a)
  const auto zp = zero_plus_ensemble();
  const auto meas = pgm::build_pgm(zp);
  for (int x = 0; x < 2; ++x) {
    RealVector brute(2);
    double px = 0.0;
    for (int a = 0; a < 2; ++a) {
      brute[a] = 0.5 * (meas.effects[x] * zp->states[a].m).trace().real();
      px += brute[a];
    }
    brute /= px;
    const auto p = pgm::pgm_posterior(meas, x);
    CHECK((p - brute).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(p.sum() - 1.0) < 1e-10);
    CHECK(std::abs(px - zp->prior[x]) < 1e-10);  // marginal equals the prior
  }

  const auto rnd = pgm::build_pgm(random_ensemble("mixed-rank", 4, 7, 53));
  for (int x = 0; x < 7; ++x)
    CHECK(std::abs(pgm::pgm_posterior(rnd, x).sum() - 1.0) < 1e-10);
  CHECK_THROWS_AS(pgm::pgm_posterior(rnd, 7), OutcomeOutOfRange);
  CHECK_THROWS_AS(pgm::pgm_posterior(rnd, -1), OutcomeOutOfRange);
}

TEST_CASE("pgm_bayes_estimator matches the bayes module") {
  const auto basis = pgm::build_pgm(basis_ensemble(2));
  const auto est = pgm::pgm_bayes_estimator(basis, 1);
  ComplexMatrix proj = ComplexMatrix::Zero(2, 2);
  proj(1, 1) = 1.0;
  CHECK((est.m - proj).cwiseAbs().maxCoeff() < 1e-12);

  const auto ens = random_ensemble("ginibre", 3, 6, 54);
  const auto meas = pgm::build_pgm(ens);
  for (int x = 0; x < 6; ++x) {
    const auto direct = pgm::pgm_bayes_estimator(meas, x);
    CHECK_NOTHROW(core::validate_density(direct.m));
    bayes::Posterior post;
    post.ensemble = ens;
    post.weights = pgm::pgm_posterior(meas, x);
    post.update_count = 1;
    const auto cross = bayes::bayes_estimator(post);
    CHECK((direct.m - cross.m).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("petz recovery reproduces the posterior on ensemble states") {
  const auto ens = random_ensemble("ginibre", 4, 6, 55);
  const auto meas = pgm::build_pgm(ens);
  for (int x = 0; x < 6; ++x) {
    const auto pz = pgm::petz_recovery(meas, ens->states[x]);
    const auto post = pgm::pgm_posterior(meas, x);
    CHECK((pz.weights - post).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(pz.residual_mass < 1e-9);
    CHECK(std::abs(pz.weights.sum() - 1.0) < 1e-9);
  }
}

TEST_CASE("petz recovery point mass and prior fixed point") {
  const auto basis = pgm::build_pgm(basis_ensemble(3));
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(1, 1) = 1.0;
  const auto point = pgm::petz_recovery(basis, DensityMatrix{m});
  CHECK(point.weights[1] == doctest::Approx(1.0));
  CHECK(point.weights[0] == doctest::Approx(0.0));
  CHECK(point.weights[2] == doctest::Approx(0.0));

  const auto ens = random_ensemble("mixed-rank", 3, 8, 56);
  const auto rnd = pgm::build_pgm(ens);
  const auto back = pgm::petz_recovery(rnd, rnd.rho_out);
  CHECK((back.weights - ens->prior).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(
      pgm::petz_recovery(rnd,
                         DensityMatrix{ComplexMatrix::Identity(2, 2) / 2.0}),
      DimensionMismatch);
}

TEST_CASE("petz recovery from an ensemble builds its own pgm") {
  const auto ens = random_ensemble("ginibre", 2, 4, 57);
  const auto meas = pgm::build_pgm(ens);
  const auto a = pgm::petz_recovery(meas, ens->states[2]);
  const auto b = pgm::petz_recovery(*ens, ens->states[2]);
  CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("naive_vs_bayes trivial cases") {
  const auto basis = pgm::build_pgm(basis_ensemble(2));
  ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  sampling::RngStream rng(58, 0);
  const auto pairs = pgm::naive_vs_bayes(basis, DensityMatrix{zero}, rng, 50);
  REQUIRE(pairs.size() == 50);
  for (const auto& p : pairs) {
    CHECK(p.outcome == 0);
    CHECK(p.f_naive == doctest::Approx(1.0));
    CHECK(p.f_bayes == doctest::Approx(1.0));
  }

  auto single = std::make_shared<Ensemble>();
  single->kind = "custom";
  single->d = 2;
  single->prior = RealVector::Constant(1, 1.0);
  ComplexMatrix half = ComplexMatrix::Identity(2, 2) / 2.0;
  single->states.push_back(DensityMatrix{half});
  sampling::RngStream rng2(58, 1);
  const auto same = pgm::naive_vs_bayes(*single, DensityMatrix{zero}, rng2, 20);
  for (const auto& p : same) {
    CHECK(p.f_naive == doctest::Approx(p.f_bayes));
    CHECK(p.f_naive == doctest::Approx(0.5));
  }
}

TEST_CASE("bayes estimator beats the naive estimator on average") {
  const auto ens = random_ensemble("ginibre", 2, 50, 59);
  const auto meas = pgm::build_pgm(ens);
  sampling::RngStream rng(59, 1);
  const auto pairs = pgm::naive_vs_bayes_resampled(meas, rng, 400);
  REQUIRE(pairs.size() == 400);
  double naive = 0.0, bayes_mean = 0.0;
  for (const auto& p : pairs) {
    naive += p.f_naive;
    bayes_mean += p.f_bayes;
    CHECK(p.f_naive >= 0.0);
    CHECK(p.f_naive <= 1.0);
    CHECK(p.f_bayes >= 0.0);
    CHECK(p.f_bayes <= 1.0);
  }
  CHECK(bayes_mean / 400.0 > naive / 400.0);
}

TEST_CASE("identity corpus stays at machine precision") {
  const auto report = pgm::verify_identities(30, 60);
  CHECK(report.ensembles == 30);
  CHECK(report.max_posterior_dev <= 1e-10);
  CHECK(report.max_marginal_dev <= 1e-10);
  CHECK(report.max_petz_dev <= 1e-10);
}

TEST_CASE("degenerate ensembles are rejected") {
  auto ens = std::make_shared<Ensemble>();
  ens->kind = "custom";
  ens->d = 2;
  ens->prior = RealVector::Constant(1, 1.0);
  ens->states.push_back(DensityMatrix{ComplexMatrix::Zero(2, 2)});
  CHECK_THROWS_AS(pgm::build_pgm(ens), DegenerateEnsemble);
}

}  // TEST_SUITE
