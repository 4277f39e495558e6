#include "qbme/pgm.hpp"

#include <cmath>
#include <sstream>

#include "qbme/bayes.hpp"

namespace qbme::pgm {

using core::Complex;
using core::ComplexVector;

namespace {

double tr_prod(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a * b).trace().real();
}

struct Routes {
  RealVector bayes;    // p_a tr(E_x rho_a) / p(x)
  RealVector swapped;  // tr(E_a rho_x)
  double marginal_dev = 0.0;
};

Routes posterior_routes(const PgmMeasurement& pgm, Index x) {
  const Ensemble& ens = *pgm.ensemble;
  const Index L = ens.size();
  if (x < 0 || x >= L)
    throw OutcomeOutOfRange("x = " + std::to_string(x) + " of " +
                            std::to_string(L));
  Routes r;
  r.bayes.resize(L);
  r.swapped.resize(L);
  const ComplexMatrix& ex = pgm.effects[x];
  for (Index a = 0; a < L; ++a) {
    r.bayes[a] = ens.prior[a] * tr_prod(ex, ens.states[a].m);
    r.swapped[a] = tr_prod(pgm.effects[a], ens.states[x].m);
  }
  const double px = r.bayes.sum();
  if (!(px > 0.0))
    throw ZeroProbabilityOutcome("outcome " + std::to_string(x) +
                                 " has zero probability");
  r.bayes /= px;
  r.marginal_dev = std::abs(px - ens.prior[x]);
  return r;
}

}  // namespace

PgmMeasurement build_pgm(std::shared_ptr<const Ensemble> ens) {
  if (!ens || ens->size() < 1) throw InvalidArgument("empty ensemble");
  const auto& t = core::tols();
  const Index d = ens->d, L = ens->size();
  ComplexMatrix rho_out = ComplexMatrix::Zero(d, d);
  for (Index a = 0; a < L; ++a) rho_out += ens->prior[a] * ens->states[a].m;
  rho_out = ((rho_out + rho_out.adjoint()) / 2.0).eval();

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho_out);
  const RealVector& ev = es.eigenvalues();
  const double ev_max = ev.maxCoeff();
  if (!(ev_max > 0.0)) throw DegenerateEnsemble("rho_out has rank 0");
  const double cutoff = t.support_cutoff * ev_max;
  RealVector inv_root = RealVector::Zero(d);
  Index rank = 0;
  for (Index i = 0; i < d; ++i)
    if (ev[i] > cutoff) {
      inv_root[i] = 1.0 / std::sqrt(ev[i]);
      ++rank;
    }
  if (rank == 0) throw DegenerateEnsemble("rho_out has numerical rank 0");

  PgmMeasurement pgm;
  pgm.ensemble = std::move(ens);
  pgm.support_rank = rank;
  pgm.inv_sqrt =
      es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().adjoint();
  pgm.rho_out = DensityMatrix{rho_out};

  const Ensemble& e = *pgm.ensemble;
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  pgm.effects.reserve(L);
  for (Index a = 0; a < L; ++a) {
    ComplexMatrix ea =
        pgm.inv_sqrt * (e.prior[a] * e.states[a].m) * pgm.inv_sqrt;
    ea = ((ea + ea.adjoint()) / 2.0).eval();
    sum += ea;
    pgm.effects.push_back(std::move(ea));
  }
  pgm.residual = ComplexMatrix::Identity(d, d) - sum;
  pgm.residual = ((pgm.residual + pgm.residual.adjoint()) / 2.0).eval();

  for (Index a = 0; a < L; ++a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> ees(pgm.effects[a],
                                                     Eigen::EigenvaluesOnly);
    if (ees.eigenvalues().minCoeff() < -t.psd)
      throw NotPSD("PGM effect " + std::to_string(a) + ": min eigenvalue " +
                   std::to_string(ees.eigenvalues().minCoeff()));
    const double leak = tr_prod(pgm.residual, e.states[a].m);
    if (std::abs(leak) > t.povm_completeness) {
      std::ostringstream os;
      os << "residual effect reaches state " << a << ": tr(E_perp rho_a) = "
         << leak;
      throw IdentityViolated(os.str());
    }
  }
  return pgm;
}

RealVector pgm_posterior(const PgmMeasurement& pgm, Index x) {
  const auto& t = core::tols();
  const Routes r = posterior_routes(pgm, x);
  const double dev = (r.bayes - r.swapped).cwiseAbs().maxCoeff();
  if (dev > t.pgm_identity_error || r.marginal_dev > t.pgm_identity_error) {
    std::ostringstream os;
    os << "posterior routes disagree: max |Bayes - swapped| = " << dev
       << ", |p(x) - p_x| = " << r.marginal_dev;
    throw IdentityViolated(os.str());
  }
  RealVector p = r.bayes.cwiseMax(0.0);
  p /= p.sum();
  return p;
}

DensityMatrix pgm_bayes_estimator(const PgmMeasurement& pgm, Index x) {
  const RealVector p = pgm_posterior(pgm, x);
  const Ensemble& ens = *pgm.ensemble;
  ComplexMatrix m = ComplexMatrix::Zero(ens.d, ens.d);
  for (Index a = 0; a < ens.size(); ++a)
    if (p[a] != 0.0) m += p[a] * ens.states[a].m;
  m = ((m + m.adjoint()) / 2.0).eval();
  return DensityMatrix{m};
}

PetzResult petz_recovery(const PgmMeasurement& pgm,
                         const DensityMatrix& input) {
  const Ensemble& ens = *pgm.ensemble;
  if (input.d() != ens.d)
    throw DimensionMismatch("input d = " + std::to_string(input.d()) +
                            ", ensemble d = " + std::to_string(ens.d));
  PetzResult out;
  out.weights.resize(ens.size());
  for (Index a = 0; a < ens.size(); ++a)
    out.weights[a] = std::max(0.0, tr_prod(pgm.effects[a], input.m));
  out.residual_mass = std::max(0.0, tr_prod(pgm.residual, input.m));
  return out;
}

PetzResult petz_recovery(const Ensemble& ens, const DensityMatrix& input) {
  return petz_recovery(build_pgm(std::make_shared<Ensemble>(ens)), input);
}

namespace {

RealVector outcome_distribution(const PgmMeasurement& pgm,
                                const ComplexMatrix& rho0) {
  const Ensemble& ens = *pgm.ensemble;
  RealVector p(ens.size());
  for (Index x = 0; x < ens.size(); ++x)
    p[x] = std::max(0.0, tr_prod(pgm.effects[x], rho0));
  const double s = p.sum();
  if (!(s > 0.0))
    throw ZeroProbabilityOutcome("input state unreachable by the PGM");
  return p / s;
}

}  // namespace

std::vector<TrialPair> naive_vs_bayes(const PgmMeasurement& pgm,
                                      const DensityMatrix& rho0,
                                      sampling::RngStream& rng, int trials) {
  const Ensemble& ens = *pgm.ensemble;
  if (rho0.d() != ens.d)
    throw DimensionMismatch("rho0 d = " + std::to_string(rho0.d()) +
                            ", ensemble d = " + std::to_string(ens.d));
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  const RealVector p = outcome_distribution(pgm, rho0.m);
  std::vector<double> f_naive(ens.size(), -1.0), f_bayes(ens.size(), -1.0);
  std::vector<TrialPair> out;
  out.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    const Index x = sampling::inverse_transform_sample(p, rng);
    if (f_naive[x] < 0.0) {
      f_naive[x] = core::fidelity_mat(rho0.m, ens.states[x].m);
      f_bayes[x] = core::fidelity_mat(rho0.m, pgm_bayes_estimator(pgm, x).m);
    }
    out.push_back(TrialPair{t, x, f_naive[x], f_bayes[x]});
  }
  return out;
}

std::vector<TrialPair> naive_vs_bayes(const Ensemble& ens,
                                      const DensityMatrix& rho0,
                                      sampling::RngStream& rng, int trials) {
  return naive_vs_bayes(build_pgm(std::make_shared<Ensemble>(ens)), rho0, rng,
                        trials);
}

std::vector<TrialPair> naive_vs_bayes_resampled(const PgmMeasurement& pgm,
                                                sampling::RngStream& rng,
                                                int trials) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  const Ensemble& ens = *pgm.ensemble;
  std::vector<DensityMatrix> estimators(ens.size());
  std::vector<bool> have(ens.size(), false);
  std::vector<TrialPair> out;
  out.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    const DensityMatrix rho0 = sampling::ginibre_state(ens.d, rng);
    const RealVector p = outcome_distribution(pgm, rho0.m);
    const Index x = sampling::inverse_transform_sample(p, rng);
    if (!have[x]) {
      estimators[x] = pgm_bayes_estimator(pgm, x);
      have[x] = true;
    }
    out.push_back(TrialPair{t, x, core::fidelity_mat(rho0.m, ens.states[x].m),
                            core::fidelity_mat(rho0.m, estimators[x].m)});
  }
  return out;
}

IdentityReport verify_identities(int n_ensembles, std::uint64_t seed) {
  if (n_ensembles < 1) throw InvalidArgument("need at least one ensemble");
  static const char* kinds[] = {"pure-haar", "ginibre", "mixed-rank"};
  sampling::RngStream rng(seed, 0);
  IdentityReport rep;
  rep.ensembles = n_ensembles;
  for (int i = 0; i < n_ensembles; ++i) {
    const Index d = 2 + (i % 4);
    const Index L = 1 + (i % 20);
    auto ens = std::make_shared<Ensemble>(
        sampling::build_ensemble(kinds[i % 3], d, L, rng));
    const PgmMeasurement pgm = build_pgm(ens);
    for (Index x = 0; x < L; ++x) {
      const Routes r = posterior_routes(pgm, x);
      rep.max_posterior_dev =
          std::max(rep.max_posterior_dev,
                   (r.bayes - r.swapped).cwiseAbs().maxCoeff());
      rep.max_marginal_dev = std::max(rep.max_marginal_dev, r.marginal_dev);
      const PetzResult petz = petz_recovery(pgm, ens->states[x]);
      rep.max_petz_dev = std::max(
          rep.max_petz_dev, (petz.weights - r.bayes).cwiseAbs().maxCoeff());
    }
  }
  return rep;
}

}  // namespace qbme::pgm
