#include "qbme/bayes.hpp"

#include <cmath>
#include <sstream>

namespace qbme::bayes {

Posterior make_prior(std::shared_ptr<const Ensemble> ens) {
  if (!ens || ens->size() < 1) throw InvalidArgument("empty ensemble");
  Posterior p;
  p.ensemble = std::move(ens);
  p.weights = p.ensemble->prior;
  p.update_count = 0;
  return p;
}

Povm basis_povm(const Unitary& U) {
  core::validate_unitary(U.m);
  const Index d = U.d();
  std::vector<ComplexMatrix> effects;
  effects.reserve(d);
  for (Index x = 0; x < d; ++x) {
    const core::ComplexVector col = U.m.col(x);
    effects.push_back(col * col.adjoint());
  }
  return Povm{d, std::move(effects)};
}

RealVector likelihood(const Povm& povm, const DensityMatrix& rho) {
  if (povm.d != rho.d())
    throw DimensionMismatch("POVM d = " + std::to_string(povm.d) +
                            ", state d = " + std::to_string(rho.d()));
  RealVector p(povm.n_outcomes());
  for (Index x = 0; x < povm.n_outcomes(); ++x) {
    double v = (povm.effects[x] * rho.m).trace().real();
    if (v < 0.0) v = 0.0;
    p[x] = v;
  }
  return p;
}

RealVector total_probability(const Povm& povm, const Ensemble& ens,
                             const RealVector& weights) {
  if (povm.d != ens.d)
    throw DimensionMismatch("POVM d = " + std::to_string(povm.d) +
                            ", ensemble d = " + std::to_string(ens.d));
  if (weights.size() != ens.size())
    throw DimensionMismatch("weights length " + std::to_string(weights.size()) +
                            " vs ensemble size " + std::to_string(ens.size()));
  // route 1: per-state mixture of likelihoods
  RealVector p1 = RealVector::Zero(povm.n_outcomes());
  for (Index a = 0; a < ens.size(); ++a)
    if (weights[a] != 0.0)
      p1 += weights[a] * likelihood(povm, ens.states[a]);
  // route 2: Born rule on the mean state
  ComplexMatrix mean = ComplexMatrix::Zero(ens.d, ens.d);
  for (Index a = 0; a < ens.size(); ++a)
    if (weights[a] != 0.0) mean += weights[a] * ens.states[a].m;
  RealVector p2(povm.n_outcomes());
  for (Index x = 0; x < povm.n_outcomes(); ++x)
    p2[x] = std::max(0.0, (povm.effects[x] * mean).trace().real());
  const double dev = (p1 - p2).cwiseAbs().maxCoeff();
  if (dev > 1e-10) {
    std::ostringstream os;
    os << "total-probability routes disagree by " << dev;
    throw IdentityViolated(os.str());
  }
  return p2;
}

Posterior bayes_update(const Posterior& post, const Povm& povm,
                       Index outcome) {
  const Ensemble& ens = *post.ensemble;
  if (outcome < 0 || outcome >= povm.n_outcomes())
    throw OutcomeOutOfRange("outcome " + std::to_string(outcome) + " of " +
                            std::to_string(povm.n_outcomes()));
  if (povm.d != ens.d)
    throw DimensionMismatch("POVM d = " + std::to_string(povm.d) +
                            ", ensemble d = " + std::to_string(ens.d));
  const ComplexMatrix& e = povm.effects[outcome];
  RealVector w(ens.size());
  for (Index a = 0; a < ens.size(); ++a) {
    const double c = std::max(0.0, (e * ens.states[a].m).trace().real());
    w[a] = post.weights[a] * c;
  }
  const double m = w.maxCoeff();
  if (!(m > 0.0))
    throw ZeroProbabilityOutcome("outcome " + std::to_string(outcome) +
                                 " has zero probability under the posterior");
  w /= m;  // rescale before normalizing so tiny weights cannot flush to zero
  w /= w.sum();
  Posterior next;
  next.ensemble = post.ensemble;
  next.weights = std::move(w);
  next.update_count = post.update_count + 1;
  return next;
}

DensityMatrix bayes_estimator(const Posterior& post) {
  const Ensemble& ens = *post.ensemble;
  ComplexMatrix m = ComplexMatrix::Zero(ens.d, ens.d);
  for (Index a = 0; a < ens.size(); ++a)
    if (post.weights[a] != 0.0) m += post.weights[a] * ens.states[a].m;
  m = ((m + m.adjoint()) / 2.0).eval();
  return DensityMatrix{m};
}

double risk(const DensityMatrix& rho_true,
            const std::function<DensityMatrix(Index)>& estimator,
            const Povm& povm) {
  const RealVector p = likelihood(povm, rho_true);
  double r = 0.0;
  for (Index x = 0; x < povm.n_outcomes(); ++x) {
    if (p[x] == 0.0) continue;
    r += p[x] * core::infidelity(rho_true, estimator(x));
  }
  return r;
}

double average_risk(const Ensemble& ens, const RealVector& weights,
                    const RealVector& risk_per_state) {
  if (weights.size() != ens.size() || risk_per_state.size() != ens.size())
    throw DimensionMismatch("weights/risks length vs ensemble size " +
                            std::to_string(ens.size()));
  return weights.dot(risk_per_state);
}

}  // namespace qbme::bayes
