#pragma once

#include <functional>
#include <memory>

#include "qbme/core.hpp"

namespace qbme::bayes {

using core::ComplexMatrix;
using core::DensityMatrix;
using core::Ensemble;
using core::Index;
using core::Povm;
using core::RealVector;
using core::Unitary;

struct Posterior {
  std::shared_ptr<const Ensemble> ensemble;
  RealVector weights;
  int update_count = 0;
};

Posterior make_prior(std::shared_ptr<const Ensemble> ens);

// d rank-1 effects from the columns of U.
Povm basis_povm(const Unitary& U);

// Born rule p(x) = tr(E_x rho); entries in [-1e-12, 0) clamped to 0.
RealVector likelihood(const Povm& povm, const DensityMatrix& rho);

// p(x) = sum_a w_a tr(E_x rho_a), computed both per-state and through the
// mean state tr(E_x rho_bar); the two routes must agree within 1e-10.
RealVector total_probability(const Povm& povm, const Ensemble& ens,
                             const RealVector& weights);

// weights *= p(x | a), renormalized; update_count incremented. Throws
// ZeroProbabilityOutcome when the observed outcome has no support.
Posterior bayes_update(const Posterior& post, const Povm& povm, Index outcome);

// rho_hat = sum_a w_a rho_a.
DensityMatrix bayes_estimator(const Posterior& post);

// sum_x tr(E_x rho_true) * infidelity(rho_true, estimator(x)).
double risk(const DensityMatrix& rho_true,
            const std::function<DensityMatrix(Index)>& estimator,
            const Povm& povm);

// Weighted mean of per-state risks.
double average_risk(const Ensemble& ens, const RealVector& weights,
                    const RealVector& risk_per_state);

}  // namespace qbme::bayes
