#pragma once

#include <memory>
#include <vector>

#include "qbme/core.hpp"
#include "qbme/sampling.hpp"

namespace qbme::pgm {

using core::ComplexMatrix;
using core::DensityMatrix;
using core::Ensemble;
using core::Index;
using core::RealVector;

struct PgmMeasurement {
  std::shared_ptr<const Ensemble> ensemble;
  DensityMatrix rho_out;                // sum_a p_a rho_a
  std::vector<ComplexMatrix> effects;   // E_x = R p_x rho_x R, R = rho_out^{-1/2}
  ComplexMatrix residual;               // E_perp = I - sum_x E_x
  ComplexMatrix inv_sqrt;               // R on the support
  Index support_rank = 0;
};

// Pseudo-inverse square root with relative eigenvalue cutoff
// tols().support_cutoff; throws DegenerateEnsemble when rho_out has rank 0.
PgmMeasurement build_pgm(std::shared_ptr<const Ensemble> ens);

// Posterior p(a|x) computed two ways: Bayes p_a tr(E_x rho_a) / p(x) and the
// swapped-index form tr(E_a rho_x). Disagreement beyond
// tols().pgm_identity_error throws IdentityViolated.
RealVector pgm_posterior(const PgmMeasurement& pgm, Index x);

// rho_hat = sum_a p(a|x) rho_a.
DensityMatrix pgm_bayes_estimator(const PgmMeasurement& pgm, Index x);

struct PetzResult {
  RealVector weights;         // p(a | input) = tr(E_a input)
  double residual_mass = 0.0; // tr(E_perp input)
};

// Petz recovery of the preparation channel evaluated on `input`: the
// classical output distribution over the register a.
PetzResult petz_recovery(const PgmMeasurement& pgm, const DensityMatrix& input);
PetzResult petz_recovery(const Ensemble& ens, const DensityMatrix& input);

struct TrialPair {
  int trial = 0;
  Index outcome = 0;
  double f_naive = 0.0;
  double f_bayes = 0.0;
};

// Per trial: sample x from p(x|rho0) = tr(E_x rho0), record
// (F(rho0, rho_x), F(rho0, rho_hat_B(x))).
std::vector<TrialPair> naive_vs_bayes(const PgmMeasurement& pgm,
                                      const DensityMatrix& rho0,
                                      sampling::RngStream& rng, int trials);
std::vector<TrialPair> naive_vs_bayes(const Ensemble& ens,
                                      const DensityMatrix& rho0,
                                      sampling::RngStream& rng, int trials);

// Fresh ginibre rho0 drawn per trial.
std::vector<TrialPair> naive_vs_bayes_resampled(const PgmMeasurement& pgm,
                                                sampling::RngStream& rng,
                                                int trials);

struct IdentityReport {
  double max_posterior_dev = 0.0;  // |Bayes - swapped-index| over all (a, x)
  double max_marginal_dev = 0.0;   // |p(x) - p_x|
  double max_petz_dev = 0.0;       // |petz(rho_x) - pgm_posterior(x)|
  int ensembles = 0;
};

// Random-ensemble corpus (d <= 5, L <= 20, kinds cycled) exercising the
// posterior identity, the marginal identity and the Petz equivalence.
IdentityReport verify_identities(int n_ensembles, std::uint64_t seed);

}  // namespace qbme::pgm
