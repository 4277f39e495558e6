#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qbme/bayes.hpp"
#include "qbme/core.hpp"
#include "qbme/sampling.hpp"

namespace qbme::experiments {

using core::Ensemble;
using core::Index;
using core::RealVector;

struct ExperimentConfig {
  Index d = 2;
  Index L = 10000;
  Index N = 1;
  int I = 100;
  std::string kind = "pure-haar";  // pure-haar | ginibre | mixed-rank
  std::string source = "haar";     // haar | pauli | 2design | clifford
  std::uint64_t master_seed = 20250825ULL;
  int histogram_bins = 40;
  int workers = 0;  // 0 = hardware concurrency
};

void validate_config(const ExperimentConfig& cfg);

struct ExperimentRecord {
  std::uint64_t stream_index = 0;
  std::vector<Index> outcomes;  // x_1 .. x_N
  RealVector final_posterior;   // after all N updates
  double average_fidelity = 0.0;
  double wall_ms = 0.0;
};

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::int64_t> counts;
};

struct BatchSummary {
  std::vector<double> values;
  double mean = 0.0;
  double std_dev = 0.0;  // sample std, 0 when a single value
  Histogram histogram;
};

// One run of the sequential estimation loop: build the seeded ensemble, then
// for n = 1..N draw a basis, sample the outcome from the total distribution
// under the current posterior, and update. The reported average fidelity is
// the prior-weighted expectation over the LAST basis's outcomes of
// F(rho_a, rho_hat_B(x)), with rho_hat_B built from the posterior after the
// first N-1 updates.
ExperimentRecord run_experiment(const ExperimentConfig& cfg,
                                std::uint64_t stream_index);

// Same engine on a prebuilt ensemble (the rng continues the caller's stream).
ExperimentRecord run_experiment_on(const Ensemble& ens,
                                   const ExperimentConfig& cfg,
                                   sampling::RngStream& rng);

std::vector<ExperimentRecord> run_batch_records(const ExperimentConfig& cfg);
BatchSummary run_batch(const ExperimentConfig& cfg);

Histogram make_histogram(const std::vector<double>& values, int bins);
BatchSummary summarize(std::vector<double> values, int bins);

// Infidelity ceiling 1 - f(d, N), f = (d+3) C(N+d-1, N) / (d^N (d+1)^2),
// evaluated in log space (no overflow for any supported d, N).
double lemma1_bound(Index d, Index N);

// Exact single-shot average infidelity for the Haar pure-state prior:
// 1 - (d+3)/(d+1)^2.
double lemma2_value(Index d);

// C(N+d-1, N) with exact 64-bit arithmetic; throws on overflow.
std::uint64_t sym_subspace_dim(Index d, Index N);

struct CompareRow {
  std::string source;
  Index N = 0;
  double mean = 0.0;
  double std_dev = 0.0;
};

// Batch means for each (source, N) cell. Every cell reuses stream indices
// 0..I-1 of the same master seed, so cells are paired through identical
// ensembles.
std::vector<CompareRow> compare_sources(const ExperimentConfig& base,
                                        const std::vector<std::string>& sources,
                                        const std::vector<Index>& Ns);

// Prior-mean fidelity before any measurement (source-independent baseline).
double prior_average_fidelity(const Ensemble& ens);

}  // namespace qbme::experiments
