#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace qbme::core {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Numeric tolerances used by validators and certificates. One mutable global
// instance so a config file can tighten/loosen them uniformly.
struct Tolerances {
  double hermitian = 1e-10;         // max |M - M^dag| entry
  double psd = 1e-10;               // eigenvalues >= -psd
  double trace_one = 1e-10;         // |tr - 1|
  double pure_norm = 1e-12;         // | ||psi|| - 1 |
  double prob_sum = 1e-12;          // | sum p - 1 |
  double povm_completeness = 1e-9;  // entrywise |sum E_x - I|
  double unitarity = 1e-10;         // entrywise |U^dag U - I|
  double design_cert = 1e-8;        // |frame potential - Haar value|
  double pgm_identity = 1e-10;      // posterior route agreement (test level)
  double pgm_identity_error = 1e-8; // hard error threshold for the same
  double support_cutoff = 1e-12;    // relative eigenvalue cutoff, pseudo-inverse
  int d_cap = 64;                   // largest supported dimension
};

Tolerances& tols();

struct DensityMatrix {
  ComplexMatrix m;
  Index d() const { return m.rows(); }
};

struct PureState {
  ComplexVector a;
  Index d() const { return a.size(); }
};

struct Unitary {
  ComplexMatrix m;
  Index d() const { return m.rows(); }
};

struct Povm {
  Index d = 0;
  std::vector<ComplexMatrix> effects;
  Index n_outcomes() const { return static_cast<Index>(effects.size()); }
};

struct Ensemble {
  std::string kind;  // pure-haar | ginibre | mixed-rank | custom
  Index d = 0;
  std::vector<DensityMatrix> states;
  RealVector prior;
  // For pure ensembles, column a holds the state vector of states[a];
  // enables the O(d L) likelihood path. Empty otherwise.
  ComplexMatrix pure_vectors;
  bool is_pure = false;
  Index size() const { return static_cast<Index>(states.size()); }
};

}  // namespace qbme::core
