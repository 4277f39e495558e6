// Acceptance gate: eight end-to-end criteria, one pass/fail line each.
// Usage: qbme_acceptance [c1 .. c8 | all]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qbme/bayes.hpp"
#include "qbme/core.hpp"
#include "qbme/designs.hpp"
#include "qbme/experiments.hpp"
#include "qbme/pgm.hpp"
#include "qbme/sampling.hpp"

using namespace qbme;

namespace {

constexpr std::uint64_t kSeed = 20250825ULL;

// Regression floors frozen from the first validated run (seed 20250825):
// criterion 4 saw a Pauli-vs-Haar gap of 9.16e-2 at N=50 and 1.069e-1 at
// N=100; criterion 7 saw Bayes-minus-naive margins of 0.0787 (d=2) and
// 0.1304 (d=4). Floors are set at roughly half the observed values.
constexpr double kPauliGapFloor = 0.045;
constexpr double kBayesMarginFloor[2] = {0.04, 0.065};

struct Result {
  bool ok = true;
  std::string detail;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double sample_se(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= double(v.size());
  double s2 = 0.0;
  for (double x : v) s2 += (x - m) * (x - m);
  s2 /= double(v.size() - 1);
  return std::sqrt(s2 / double(v.size()));
}

experiments::ExperimentConfig base_config(long d, long N, long L,
                                          const std::string& kind,
                                          const std::string& source) {
  experiments::ExperimentConfig cfg;
  cfg.d = d;
  cfg.N = N;
  cfg.L = L;
  cfg.I = 100;
  cfg.kind = kind;
  cfg.source = source;
  cfg.master_seed = kSeed;
  return cfg;
}

// c1: pure-state prior, one measurement; batch mean fidelity must sit on the
// exact single-shot value (d+3)/(d+1)^2 within max(3 SE, 0.02).
Result criterion1() {
  Result r;
  std::ostringstream os;
  for (long d : {2L, 3L, 4L, 8L}) {
    const auto s =
        experiments::run_batch(base_config(d, 1, 10000, "pure-haar", "haar"));
    const double target = (d + 3.0) / ((d + 1.0) * (d + 1.0));
    const double se = sample_se(s.values);
    const double gate = std::max(3.0 * se, 0.02);
    const double delta = std::abs(s.mean - target);
    if (delta > gate) r.ok = false;
    os << " d=" << d << ": mean=" << num(s.mean) << " target=" << num(target)
       << " |diff|=" << num(delta) << " gate=" << num(gate);
  }
  r.detail = os.str();
  return r;
}

// c2: mean infidelity never exceeds the closed-form ceiling plus 3 SE.
Result criterion2() {
  Result r;
  std::ostringstream os;
  for (long d : {2L, 3L}) {
    for (long n : {1L, 2L, 5L, 10L}) {
      const auto s =
          experiments::run_batch(base_config(d, n, 10000, "pure-haar", "haar"));
      const double infid = 1.0 - s.mean;
      const double bound = experiments::lemma1_bound(d, n);
      const double se = sample_se(s.values);
      if (infid > bound + 3.0 * se) {
        r.ok = false;
        os << " VIOLATION";
      }
      os << " (d=" << d << ",N=" << n << "): infid=" << num(infid)
         << " ceiling=" << num(bound);
    }
  }
  r.detail = os.str();
  return r;
}

// c3: frame potentials of the shipped sets against exact pair-enumeration
// values; the whole table in under a second.
Result criterion3() {
  Result r;
  std::ostringstream os;
  const auto t0 = std::chrono::steady_clock::now();
  struct Row {
    const char* set;
    int t;
    double expect;
    double tol;
  };
  const Row rows[] = {
      {"pauli", 1, 1.0, 1e-10},   {"pauli", 2, 4.0, 1e-8},
      {"2design", 1, 1.0, 1e-8},  {"2design", 2, 2.0, 1e-8},
      {"2design", 3, 6.0, 1e-8},  {"clifford", 1, 1.0, 1e-8},
      {"clifford", 2, 2.0, 1e-8}, {"clifford", 3, 5.0, 1e-8},
  };
  for (const auto& row : rows) {
    const double fp =
        designs::frame_potential(designs::named_set(row.set), row.t);
    if (std::abs(fp - row.expect) > row.tol) {
      r.ok = false;
      os << " MISMATCH";
    }
    os << " " << row.set << "(t=" << row.t << ")=" << num(fp);
  }
  // one order above each claimed order the potential must exceed Haar
  for (const char* name : {"pauli", "2design", "clifford"}) {
    const auto& s = designs::named_set(name);
    const int t = s.claimed_order + 1;
    const double fp = designs::frame_potential(s, t);
    const double haar = designs::haar_frame_potential(s.d, t);
    if (fp <= haar + 1e-3) {
      r.ok = false;
      os << " NOT-STRICT " << name;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  os << " elapsed=" << num(secs) << "s";
  if (secs >= 1.0) {
    r.ok = false;
    os << " TOO-SLOW";
  }
  r.detail = os.str();
  return r;
}

// c4: at d=2 on a ginibre prior, 2-design and Clifford batch means track the
// Haar means within 0.02 at every N, and the Pauli mean falls strictly below
// the Haar mean once N is large (frozen gap floor from the first run).
Result criterion4() {
  Result r;
  std::ostringstream os;
  auto base = base_config(2, 1, 10000, "ginibre", "haar");
  const std::vector<std::string> sources = {"haar", "pauli", "2design",
                                            "clifford"};
  const std::vector<core::Index> Ns = {1, 10, 50, 100};
  const auto rows = experiments::compare_sources(base, sources, Ns);
  std::map<std::string, std::map<core::Index, double>> mean;
  for (const auto& row : rows) mean[row.source][row.N] = row.mean;

  for (const auto N : Ns) {
    const double h = mean["haar"][N];
    for (const std::string src : {"2design", "clifford"}) {
      const double gap = std::abs(mean[src][N] - h);
      if (gap > 0.02) {
        r.ok = false;
        os << " OFF-TRACK";
      }
      os << " |" << src << "-haar|(N=" << N << ")=" << num(gap);
    }
  }
  for (const auto N : {core::Index(50), core::Index(100)}) {
    const double gap = mean["haar"][N] - mean["pauli"][N];
    if (gap <= kPauliGapFloor) {
      r.ok = false;
      os << " PAULI-NOT-BELOW";
    }
    os << " haar-pauli(N=" << N << ")=" << num(gap);
  }
  r.detail = os.str();
  return r;
}

// c5: posterior route identity and marginal identity over a 100-ensemble
// corpus, both within 1e-10.
Result criterion5() {
  Result r;
  const auto rep = pgm::verify_identities(100, kSeed);
  std::ostringstream os;
  os << " ensembles=" << rep.ensembles
     << " max_posterior_dev=" << num(rep.max_posterior_dev)
     << " max_marginal_dev=" << num(rep.max_marginal_dev);
  if (rep.max_posterior_dev > 1e-10 || rep.max_marginal_dev > 1e-10)
    r.ok = false;
  r.detail = os.str();
  return r;
}

// c6: recovery-map readout equals the measurement posterior on every state
// of the same corpus, within 1e-10.
Result criterion6() {
  Result r;
  const auto rep = pgm::verify_identities(100, kSeed);
  std::ostringstream os;
  os << " ensembles=" << rep.ensembles
     << " max_petz_dev=" << num(rep.max_petz_dev);
  if (rep.max_petz_dev > 1e-10) r.ok = false;
  r.detail = os.str();
  return r;
}

// c7: with a fresh ginibre truth every trial, the posterior-mean readout
// beats the plain guess-the-source readout on average (frozen margin floor).
Result criterion7() {
  Result r;
  std::ostringstream os;
  int di = 0;
  for (long d : {2L, 4L}) {
    sampling::RngStream rng(kSeed, 0);
    auto ens = std::make_shared<core::Ensemble>(
        sampling::build_ensemble("ginibre", d, 1000, rng));
    const auto meas = pgm::build_pgm(ens);
    sampling::RngStream trial_rng(kSeed, 1);
    const auto pairs = pgm::naive_vs_bayes_resampled(meas, trial_rng, 1000);
    double mn = 0.0, mb = 0.0;
    for (const auto& p : pairs) {
      mn += p.f_naive;
      mb += p.f_bayes;
    }
    mn /= double(pairs.size());
    mb /= double(pairs.size());
    const double margin = mb - mn;
    if (margin < kBayesMarginFloor[di]) {
      r.ok = false;
      os << " BELOW-FLOOR";
    }
    os << " d=" << d << ": mean_naive=" << num(mn) << " mean_bayes=" << num(mb)
       << " margin=" << num(margin);
    ++di;
  }
  r.detail = os.str();
  return r;
}

// c8: property suites with no tuned numbers: state/POVM validity, the
// posterior martingale, the estimator eigenvalue hull, Haar moments, and the
// inverse-transform sampler.
Result criterion8() {
  Result r;
  std::ostringstream os;
  const auto& tol = core::tols();

  // 1000 random density objects validate
  {
    sampling::RngStream rng(kSeed, 10);
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      const long d = 2 + (i % 5);
      core::DensityMatrix rho;
      switch (i % 3) {
        case 0:
          rho = sampling::ginibre_state(d, rng);
          break;
        case 1: {
          const auto psi = sampling::haar_pure_state(d, rng);
          rho.m = psi.a * psi.a.adjoint();
          break;
        }
        default:
          rho = sampling::fixed_rank_state(d, 1 + (i % d), rng);
      }
      try {
        core::validate_density(rho.m, tol);
      } catch (const Error&) {
        ++bad;
      }
    }
    os << " bad_states=" << bad;
    if (bad != 0) r.ok = false;
  }

  // POVM completeness for 200 random measurement bases
  {
    sampling::RngStream rng(kSeed, 11);
    int bad = 0;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const long d = 2 + (i % 4);
      const auto u = sampling::haar_unitary(d, rng);
      const auto povm = bayes::basis_povm(u);
      try {
        core::validate_povm(povm.d, povm.effects, tol);
      } catch (const Error&) {
        ++bad;
      }
      core::ComplexMatrix sum = core::ComplexMatrix::Zero(d, d);
      for (const auto& e : povm.effects) sum += e;
      sum -= core::ComplexMatrix::Identity(d, d);
      worst = std::max(worst, sum.cwiseAbs().maxCoeff());
    }
    os << " bad_povms=" << bad << " max_completeness_dev=" << num(worst);
    if (bad != 0 || worst > 1e-10) r.ok = false;
  }

  // martingale: sum_x p(x) posterior(x) = prior
  {
    sampling::RngStream rng(kSeed, 12);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const long d = 2 + (rep % 2);
      const auto ens = std::make_shared<core::Ensemble>(
          sampling::build_ensemble("ginibre", d, 8, rng));
      const auto prior = bayes::make_prior(ens);
      const auto povm = bayes::basis_povm(sampling::haar_unitary(d, rng));
      const auto px = bayes::total_probability(povm, *ens, prior.weights);
      core::RealVector mix = core::RealVector::Zero(ens->size());
      for (core::Index x = 0; x < povm.n_outcomes(); ++x) {
        if (px[x] <= 0) continue;
        const auto post = bayes::bayes_update(prior, povm, x);
        mix += px[x] * post.weights;
      }
      worst = std::max(worst, (mix - prior.weights).cwiseAbs().maxCoeff());
    }
    os << " max_martingale_dev=" << num(worst);
    if (worst > 1e-10) r.ok = false;
  }

  // estimator eigenvalues stay inside the ensemble's eigenvalue hull
  {
    sampling::RngStream rng(kSeed, 13);
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const auto ens = std::make_shared<core::Ensemble>(
          sampling::build_ensemble("mixed-rank", 4, 10, rng));
      double min_state_eig = 1.0;
      for (const auto& s : ens->states) {
        Eigen::SelfAdjointEigenSolver<core::ComplexMatrix> es(s.m);
        min_state_eig = std::min(min_state_eig, es.eigenvalues().minCoeff());
      }
      auto post = bayes::make_prior(ens);
      for (int n = 0; n < 5; ++n) {
        const auto povm = bayes::basis_povm(sampling::haar_unitary(4, rng));
        const auto px = bayes::total_probability(povm, *ens, post.weights);
        const auto x = sampling::inverse_transform_sample(px, rng);
        post = bayes::bayes_update(post, povm, x);
      }
      const auto est = bayes::bayes_estimator(post);
      Eigen::SelfAdjointEigenSolver<core::ComplexMatrix> es(est.m);
      worst = std::max(worst, min_state_eig - es.eigenvalues().minCoeff());
    }
    os << " max_hull_dev=" << num(worst);
    if (worst > 1e-10) r.ok = false;
  }

  // Haar unitarity plus the first column moment E|U_00|^2 = 1/d
  {
    sampling::RngStream rng(kSeed, 14);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const auto u = sampling::haar_unitary(5, rng);
      worst = std::max(worst, (u.m.adjoint() * u.m -
                               core::ComplexMatrix::Identity(5, 5))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
    os << " max_unitarity_dev=" << num(worst);
    if (worst > 1e-10) r.ok = false;

    const int n = 10000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto u = sampling::haar_unitary(4, rng);
      acc += std::norm(u.m(0, 0));
    }
    acc /= n;
    // |U00|^2 is Beta(1, d-1) under Haar: mean 1/d, variance (d-1)/(d^2(d+1)).
    // At d=4 sigma = sqrt(3/80); allow 4 sigma of the sample mean.
    const double dev = std::abs(acc - 0.25);
    const double sigma = std::sqrt(3.0 / 80.0);
    os << " col_moment_dev=" << num(dev);
    if (dev > 4.0 * sigma / std::sqrt(double(n))) r.ok = false;
  }

  // inverse-transform sampler total-variation check
  {
    sampling::RngStream rng(kSeed, 15);
    core::RealVector p(3);
    p << 0.2, 0.3, 0.5;
    const int n = 100000;
    std::vector<double> freq(3, 0.0);
    for (int i = 0; i < n; ++i)
      freq[sampling::inverse_transform_sample(p, rng)] += 1.0;
    double tv = 0.0;
    for (int k = 0; k < 3; ++k) tv += std::abs(freq[k] / n - p[k]);
    tv *= 0.5;
    os << " sampler_tv=" << num(tv);
    if (tv > 0.01) r.ok = false;
  }

  r.detail = os.str();
  return r;
}

struct Criterion {
  const char* id;
  const char* title;
  Result (*fn)();
};

const Criterion kCriteria[] = {
    {"c1", "single-shot mean fidelity matches (d+3)/(d+1)^2", criterion1},
    {"c2", "mean infidelity stays below the closed-form ceiling", criterion2},
    {"c3", "frame potentials match exact enumeration values", criterion3},
    {"c4", "2-design and Clifford track Haar; Pauli lags at large N",
     criterion4},
    {"c5", "measurement posterior identities hold on a random corpus",
     criterion5},
    {"c6", "recovery-map readout equals the measurement posterior",
     criterion6},
    {"c7", "posterior-mean readout beats the naive readout", criterion7},
    {"c8", "property suites: states, POVMs, martingale, hull, moments,"
           " sampler",
     criterion8},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(argv[i]);
  const bool all = wanted.empty() || wanted.count("all") > 0;

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!all && wanted.count(c.id) == 0) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Result res;
    try {
      res = c.fn();
    } catch (const std::exception& ex) {
      res.ok = false;
      res.detail = std::string(" exception: ") + ex.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%s] criterion %s: %s (%.1fs)%s\n",
                res.ok ? "PASS" : "FAIL", c.id + 1, c.title, secs,
                res.detail.c_str());
    std::fflush(stdout);
    if (!res.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
