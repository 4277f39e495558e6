#include "qbme/sampling.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace qbme::sampling {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_(master_seed), index_(stream_index) {
  const std::uint64_t mixed = splitmix64(
      master_seed + 0x9E3779B97F4A7C15ULL * (stream_index + 1));
  gen_.seed(splitmix64(mixed ^ 0xD1B54A32D192ED03ULL));
}

double RngStream::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cache_) {
    has_cache_ = false;
    return cache_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cache_ = v * f;
  has_cache_ = true;
  return u * f;
}

ComplexMatrix ginibre_matrix(Index d, RngStream& rng) {
  if (d < 1) throw InvalidArgument("d must be >= 1");
  ComplexMatrix g(d, d);
  for (Index k = 0; k < d; ++k)
    for (Index j = 0; j < d; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(j, k) = core::Complex(re, im);
    }
  return g;
}

Unitary haar_unitary(Index d, RngStream& rng) {
  if (d < 1) throw InvalidArgument("d must be >= 1");
  for (int attempt = 0; attempt < 3; ++attempt) {
    const ComplexMatrix g = ginibre_matrix(d, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    const ComplexVector rdiag = qr.matrixQR().diagonal();
    if (rdiag.cwiseAbs().minCoeff() < 1e-14) continue;
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
    ComplexVector phases(d);
    for (Index j = 0; j < d; ++j) phases[j] = rdiag[j] / std::abs(rdiag[j]);
    return Unitary{q * phases.asDiagonal()};
  }
  throw DegenerateQR("|R_jj| < 1e-14 after 3 resamples, d = " +
                     std::to_string(d));
}

PureState haar_pure_state(Index d, RngStream& rng) {
  return PureState{haar_unitary(d, rng).m.col(0)};
}

DensityMatrix ginibre_state(Index d, RngStream& rng) {
  const ComplexMatrix g = ginibre_matrix(d, rng);
  ComplexMatrix rho = g.adjoint() * g;
  rho /= rho.trace().real();
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  return DensityMatrix{rho};
}

DensityMatrix fixed_rank_state(Index d, Index r, RngStream& rng) {
  if (r < 1 || r > d)
    throw RankOutOfRange("r = " + std::to_string(r) + " with d = " +
                         std::to_string(d));
  RealVector lambda(r);
  for (Index j = 0; j < r; ++j) {
    double u = rng.uniform();
    while (u == 0.0) u = rng.uniform();
    lambda[j] = u;
  }
  lambda /= lambda.sum();

  for (int attempt = 0; attempt < 3; ++attempt) {
    ComplexMatrix g(d, r);
    for (Index k = 0; k < r; ++k)
      for (Index j = 0; j < d; ++j) {
        const double re = rng.normal();
        const double im = rng.normal();
        g(j, k) = core::Complex(re, im);
      }
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    const ComplexVector rdiag = qr.matrixQR().diagonal().head(r);
    if (rdiag.cwiseAbs().minCoeff() < 1e-14) continue;
    ComplexMatrix v = qr.householderQ() * ComplexMatrix::Identity(d, r);
    for (Index j = 0; j < r; ++j)
      v.col(j) *= rdiag[j] / std::abs(rdiag[j]);
    ComplexMatrix rho = v * lambda.asDiagonal() * v.adjoint();
    rho = ((rho + rho.adjoint()) / 2.0).eval();
    return DensityMatrix{rho};
  }
  throw DegenerateQR("isometry QR degenerate after 3 resamples");
}

Index inverse_transform_sample(const RealVector& p, RngStream& rng) {
  core::validate_prob(p);
  const double u = rng.uniform();
  double cum = 0.0;
  for (Index x = 0; x < p.size(); ++x) {
    cum += p[x];
    if (u < cum) return x;
  }
  for (Index x = p.size() - 1; x >= 0; --x)
    if (p[x] > 0.0) return x;
  throw ZeroProbabilityOutcome("all-zero probability vector");
}

Ensemble build_ensemble(const std::string& kind, Index d, Index L,
                        RngStream& rng) {
  if (L < 1) throw InvalidArgument("L must be >= 1");
  if (d < 1 || d > core::tols().d_cap)
    throw InvalidArgument("d = " + std::to_string(d) + " out of range");
  Ensemble e;
  e.kind = kind;
  e.d = d;
  e.prior = RealVector::Constant(L, 1.0 / static_cast<double>(L));
  e.states.reserve(L);
  if (kind == "pure-haar") {
    e.is_pure = true;
    e.pure_vectors.resize(d, L);
    for (Index a = 0; a < L; ++a) {
      const PureState psi = haar_pure_state(d, rng);
      e.pure_vectors.col(a) = psi.a;
      e.states.push_back(DensityMatrix{psi.a * psi.a.adjoint()});
    }
  } else if (kind == "ginibre") {
    for (Index a = 0; a < L; ++a) e.states.push_back(ginibre_state(d, rng));
  } else if (kind == "mixed-rank") {
    for (Index a = 0; a < L; ++a)
      e.states.push_back(fixed_rank_state(d, (a % d) + 1, rng));
  } else {
    throw InvalidArgument("unknown ensemble kind '" + kind + "'");
  }
  return e;
}

void save_ensemble(const Ensemble& e, std::uint64_t seed,
                   const std::string& path) {
  nlohmann::json j;
  j["kind"] = e.kind;
  j["d"] = e.d;
  j["L"] = e.size();
  j["seed"] = seed;
  j["prior"] = std::vector<double>(e.prior.data(), e.prior.data() + e.prior.size());
  auto& states = j["states"];
  states = nlohmann::json::array();
  for (const auto& s : e.states) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < e.d; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Index c = 0; c < e.d; ++c)
        row.push_back({s.m(r, c).real(), s.m(r, c).imag()});
      rows.push_back(std::move(row));
    }
    states.push_back(std::move(rows));
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << j.dump() << "\n";
}

Ensemble load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument("malformed ensemble JSON: " + std::string(ex.what()));
  }
  Ensemble e;
  try {
    e.kind = j.at("kind").get<std::string>();
    e.d = j.at("d").get<Index>();
    const Index L = j.at("L").get<Index>();
    const auto& prior = j.at("prior");
    const auto& states = j.at("states");
    if (static_cast<Index>(prior.size()) != L ||
        static_cast<Index>(states.size()) != L)
      throw InvalidArgument("L does not match prior/states length");
    e.prior.resize(L);
    for (Index a = 0; a < L; ++a) e.prior[a] = prior[a].get<double>();
    core::validate_prob(e.prior);
    e.states.reserve(L);
    for (Index a = 0; a < L; ++a) {
      ComplexMatrix m(e.d, e.d);
      for (Index r = 0; r < e.d; ++r)
        for (Index c = 0; c < e.d; ++c) {
          const auto& cell = states.at(a).at(r).at(c);
          m(r, c) = core::Complex(cell.at(0).get<double>(),
                                  cell.at(1).get<double>());
        }
      e.states.push_back(core::validate_density(m));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument("malformed ensemble JSON: " + std::string(ex.what()));
  }
  if (e.kind == "pure-haar") {
    // recover state vectors so the fast likelihood path stays available
    e.pure_vectors.resize(e.d, e.size());
    e.is_pure = true;
    for (Index a = 0; a < e.size(); ++a) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(e.states[a].m);
      if (es.eigenvalues().maxCoeff() < 1.0 - 1e-9) {
        e.is_pure = false;
        break;
      }
      e.pure_vectors.col(a) = es.eigenvectors().col(e.d - 1);
    }
    if (!e.is_pure) e.pure_vectors.resize(0, 0);
  }
  return e;
}

}  // namespace qbme::sampling
