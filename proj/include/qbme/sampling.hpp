#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "qbme/core.hpp"

namespace qbme::sampling {

using core::ComplexMatrix;
using core::ComplexVector;
using core::DensityMatrix;
using core::Ensemble;
using core::Index;
using core::PureState;
using core::RealVector;
using core::Unitary;

// Deterministic per-experiment random stream. The generator is mt19937_64
// (bit-specified by the standard) seeded through a SplitMix64 mix of
// (master_seed, stream_index); uniforms and normals are produced by fixed
// in-house recipes so the byte sequence is identical on every platform.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t next_u64() { return gen_(); }
  double uniform();  // [0, 1)
  double normal();   // N(0, 1), Marsaglia polar

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t stream_index() const { return index_; }

 private:
  std::uint64_t master_ = 0;
  std::uint64_t index_ = 0;
  std::mt19937_64 gen_;
  double cache_ = 0.0;
  bool has_cache_ = false;
};

// d x d matrix of IID standard complex Gaussians (real and imaginary parts
// each N(0,1)), filled column-major.
ComplexMatrix ginibre_matrix(Index d, RngStream& rng);

// QR of a Ginibre matrix with the column phases fixed by diag(R)/|diag(R)|,
// giving exactly Haar measure. Resamples up to 3 times if any |R_jj| < 1e-14,
// then throws DegenerateQR.
Unitary haar_unitary(Index d, RngStream& rng);

// First column of haar_unitary(d).
PureState haar_pure_state(Index d, RngStream& rng);

// rho = G^dag G / tr(G^dag G); induced (Hilbert-Schmidt) measure.
DensityMatrix ginibre_state(Index d, RngStream& rng);

// V diag(lambda) V^dag with lambda = r normalized uniforms and V a d x r
// isometry from the phase-fixed QR of a d x r Ginibre block.
DensityMatrix fixed_rank_state(Index d, Index r, RngStream& rng);

// Smallest x with cumulative sum > u, u uniform in [0,1).
Index inverse_transform_sample(const RealVector& p, RngStream& rng);

// kind in {pure-haar, ginibre, mixed-rank}; uniform prior 1/L. mixed-rank
// assigns ranks 1..d round-robin so counts differ by at most one.
Ensemble build_ensemble(const std::string& kind, Index d, Index L,
                        RngStream& rng);

// JSON serialization: {kind, d, L, seed, states as nested [re, im], prior}.
// Doubles are written with shortest-round-trip precision so that
// load + save reproduces the file byte for byte.
void save_ensemble(const Ensemble& e, std::uint64_t seed,
                   const std::string& path);
Ensemble load_ensemble(const std::string& path);

}  // namespace qbme::sampling
