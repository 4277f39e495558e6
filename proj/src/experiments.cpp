#include "qbme/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "qbme/designs.hpp"

namespace qbme::experiments {

using core::Complex;
using core::ComplexMatrix;
using core::ComplexVector;

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.d < 2 || cfg.d > core::tols().d_cap)
    throw InvalidArgument("d = " + std::to_string(cfg.d) + " out of range");
  if (cfg.L < 1) throw InvalidArgument("L must be >= 1");
  if (cfg.N < 1) throw InvalidArgument("N must be >= 1");
  if (cfg.I < 1) throw InvalidArgument("I must be >= 1");
  if (cfg.histogram_bins < 1) throw InvalidArgument("bins must be >= 1");
  if (cfg.workers < 0) throw InvalidArgument("workers must be >= 0");
  if (cfg.kind != "pure-haar" && cfg.kind != "ginibre" &&
      cfg.kind != "mixed-rank")
    throw InvalidArgument("unknown ensemble kind '" + cfg.kind + "'");
  if (cfg.source != "haar") {
    if (cfg.source != "pauli" && cfg.source != "2design" &&
        cfg.source != "clifford")
      throw InvalidArgument("unknown measurement source '" + cfg.source + "'");
    if (cfg.d != 2)
      throw InvalidArgument("design source '" + cfg.source +
                            "' requires d = 2");
  }
}

namespace {

ComplexMatrix pack_states(const Ensemble& ens) {
  const Index d = ens.d, L = ens.size();
  ComplexMatrix s(d * d, L);
  for (Index a = 0; a < L; ++a)
    s.col(a) = Eigen::Map<const ComplexVector>(ens.states[a].m.data(), d * d);
  return s;
}

// Expectation over the final basis's outcomes of F(rho_a, rho_hat(x)), the
// ensemble state averaged under the current posterior w. Weighting by w
// rather than the prior is what makes the estimate improve with N: after the
// observed history the state is distributed as w, and the joint over
// (state, outcome) factorizes as w[a] * cond(x, a).
double final_average_pure(const Ensemble& ens, const RealVector& w,
                          const Eigen::ArrayXXd& cond) {
  const Index d = ens.d, L = ens.size();
  const ComplexMatrix& v = ens.pure_vectors;
  double avg = 0.0;
  for (Index x = 0; x < d; ++x) {
    RealVector wx = w.cwiseProduct(cond.row(x).matrix().transpose());
    const double s = wx.sum();
    if (!(s > 0.0)) continue;
    wx /= s;
    const ComplexMatrix rho_hat = (v * wx.asDiagonal()) * v.adjoint();
    const ComplexMatrix av = rho_hat * v;
    const RealVector f = v.conjugate()
                             .cwiseProduct(av)
                             .colwise()
                             .sum()
                             .real()
                             .transpose()
                             .cwiseMax(0.0);
    for (Index a = 0; a < L; ++a)
      avg += w[a] * cond(x, a) * std::min(1.0, f[a]);
  }
  return std::clamp(avg, 0.0, 1.0);
}

double final_average_generic(const Ensemble& ens, const ComplexMatrix& packed,
                             const RealVector& dets, const RealVector& w,
                             const ComplexMatrix& u) {
  const Index d = ens.d, L = ens.size();
  double avg = 0.0;
  for (Index x = 0; x < d; ++x) {
    const ComplexVector ux = u.col(x);
    const ComplexMatrix ex = ux * ux.adjoint();
    const RealVector cond =
        (packed.adjoint() * Eigen::Map<const ComplexVector>(ex.data(), d * d))
            .real()
            .cwiseMax(0.0);
    RealVector wx = w.cwiseProduct(cond);
    const double s = wx.sum();
    if (!(s > 0.0)) continue;
    wx /= s;
    const ComplexVector rh_vec = packed * wx;
    const ComplexMatrix rho_hat =
        Eigen::Map<const ComplexMatrix>(rh_vec.data(), d, d);
    if (d == 2) {
      // Same determinant noise floor as the core closed form: a stored
      // projector has det ~ 1e-17, which sqrt would turn into ~1e-9 bias.
      const double dh = rho_hat.determinant().real();
      const double det_hat = dh > 1e-13 ? dh : 0.0;
      const RealVector tr =
          (packed.adjoint() * rh_vec).real();
      for (Index a = 0; a < L; ++a) {
        const double f = std::clamp(
            tr[a] + 2.0 * std::sqrt(dets[a] * det_hat), 0.0, 1.0);
        avg += w[a] * cond[a] * f;
      }
    } else {
      for (Index a = 0; a < L; ++a) {
        if (cond[a] == 0.0 || w[a] == 0.0) continue;
        avg += w[a] * cond[a] *
               core::fidelity_mat(ens.states[a].m, rho_hat);
      }
    }
  }
  return std::clamp(avg, 0.0, 1.0);
}

}  // namespace

ExperimentRecord run_experiment_on(const Ensemble& ens,
                                   const ExperimentConfig& cfg,
                                   sampling::RngStream& rng) {
  const Index d = ens.d, L = ens.size(), N = cfg.N;
  if (N < 1) throw InvalidArgument("N must be >= 1");
  const bool pure = ens.is_pure && ens.pure_vectors.cols() == L;
  const designs::UnitarySet* set =
      cfg.source == "haar" ? nullptr : &designs::named_set(cfg.source);

  ComplexMatrix packed;
  RealVector dets;
  if (!pure) {
    packed = pack_states(ens);
    if (d == 2) {
      dets.resize(L);
      for (Index a = 0; a < L; ++a) {
        const double det = ens.states[a].m.determinant().real();
        dets[a] = det > 1e-13 ? det : 0.0;
      }
    }
  }

  ExperimentRecord rec;
  rec.outcomes.reserve(N);
  RealVector w = ens.prior;

  for (Index n = 1; n <= N; ++n) {
    const ComplexMatrix u = set ? designs::sample_from_set(*set, rng).m
                                : sampling::haar_unitary(d, rng).m;
    RealVector p(d);
    Eigen::ArrayXXd cond;  // pure path: p(x|a), d x L
    ComplexMatrix mean;    // generic path: posterior mean state
    if (pure) {
      cond = (u.adjoint() * ens.pure_vectors).cwiseAbs2().array();
      p = cond.matrix() * w;
    } else {
      const ComplexVector mv = packed * w;
      mean = Eigen::Map<const ComplexMatrix>(mv.data(), d, d);
      const ComplexMatrix mu = u.adjoint() * mean * u;
      p = mu.diagonal().real().cwiseMax(0.0);
    }
    if (n == N)
      rec.average_fidelity =
          pure ? final_average_pure(ens, w, cond)
               : final_average_generic(ens, packed, dets, w, u);

    const double ps = p.sum();
    if (!(ps > 0.0))
      throw ZeroProbabilityOutcome("total distribution sums to " +
                                   std::to_string(ps));
    p /= ps;
    const Index x = sampling::inverse_transform_sample(p, rng);
    rec.outcomes.push_back(x);

    RealVector c;
    if (pure) {
      c = cond.row(x).matrix().transpose();
    } else {
      const ComplexVector ux = u.col(x);
      const ComplexMatrix ex = ux * ux.adjoint();
      c = (packed.adjoint() * Eigen::Map<const ComplexVector>(ex.data(), d * d))
              .real()
              .cwiseMax(0.0);
    }
    w = w.cwiseProduct(c);
    const double m = w.maxCoeff();
    if (!(m > 0.0))
      throw ZeroProbabilityOutcome("posterior support vanished at shot " +
                                   std::to_string(n));
    w /= m;
    w /= w.sum();
  }

  rec.final_posterior = std::move(w);
  return rec;
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg,
                                std::uint64_t stream_index) {
  validate_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  sampling::RngStream rng(cfg.master_seed, stream_index);
  const Ensemble ens = sampling::build_ensemble(cfg.kind, cfg.d, cfg.L, rng);
  ExperimentRecord rec = run_experiment_on(ens, cfg, rng);
  rec.stream_index = stream_index;
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rec;
}

std::vector<ExperimentRecord> run_batch_records(const ExperimentConfig& cfg) {
  validate_config(cfg);
  int w = cfg.workers > 0
              ? cfg.workers
              : static_cast<int>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  w = std::min(w, cfg.I);
  std::vector<ExperimentRecord> recs(cfg.I);
  if (w == 1) {
    for (int i = 0; i < cfg.I; ++i)
      recs[i] = run_experiment(cfg, static_cast<std::uint64_t>(i));
    return recs;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.I) return;
      try {
        recs[i] = run_experiment(cfg, static_cast<std::uint64_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int i = 0; i < w; ++i) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return recs;
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw InvalidArgument("bins must be >= 1");
  if (values.empty()) throw InvalidArgument("no values to bin");
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b)
    h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
  h.edges[bins] = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
    idx = std::clamp(idx, 0, bins - 1);
    ++h.counts[idx];
  }
  return h;
}

BatchSummary summarize(std::vector<double> values, int bins) {
  BatchSummary s;
  const auto n = values.size();
  if (n == 0) throw InvalidArgument("no values to summarize");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  s.mean = mean;
  s.std_dev = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
  s.histogram = make_histogram(values, bins);
  s.values = std::move(values);
  return s;
}

BatchSummary run_batch(const ExperimentConfig& cfg) {
  const auto recs = run_batch_records(cfg);
  std::vector<double> values;
  values.reserve(recs.size());
  for (const auto& r : recs) values.push_back(r.average_fidelity);
  return summarize(std::move(values), cfg.histogram_bins);
}

double lemma1_bound(Index d, Index N) {
  if (d < 2) throw InvalidArgument("d must be >= 2");
  if (N < 1) throw InvalidArgument("N must be >= 1");
  const double dd = static_cast<double>(d), nn = static_cast<double>(N);
  const double logf = std::log(dd + 3.0) - 2.0 * std::log(dd + 1.0) +
                      std::lgamma(nn + dd) - std::lgamma(nn + 1.0) -
                      std::lgamma(dd) - nn * std::log(dd);
  return 1.0 - std::exp(logf);
}

double lemma2_value(Index d) {
  if (d < 1) throw InvalidArgument("d must be >= 1");
  const double dd = static_cast<double>(d);
  return 1.0 - (dd + 3.0) / ((dd + 1.0) * (dd + 1.0));
}

std::uint64_t sym_subspace_dim(Index d, Index N) {
  if (d < 1 || N < 0) throw InvalidArgument("need d >= 1, N >= 0");
  const std::uint64_t n = static_cast<std::uint64_t>(N + d - 1);
  std::uint64_t k = static_cast<std::uint64_t>(std::min<Index>(N, d - 1));
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i);
    acc /= i;
    if (acc > static_cast<unsigned __int128>(UINT64_MAX))
      throw InvalidArgument("binomial overflows 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

std::vector<CompareRow> compare_sources(const ExperimentConfig& base,
                                        const std::vector<std::string>& sources,
                                        const std::vector<Index>& Ns) {
  if (sources.empty() || Ns.empty())
    throw InvalidArgument("empty source/N grid");
  std::vector<CompareRow> rows;
  rows.reserve(sources.size() * Ns.size());
  for (const auto& src : sources)
    for (Index n : Ns) {
      ExperimentConfig cfg = base;
      cfg.source = src;
      cfg.N = n;
      const BatchSummary s = run_batch(cfg);
      rows.push_back(CompareRow{src, n, s.mean, s.std_dev});
    }
  return rows;
}

double prior_average_fidelity(const Ensemble& ens) {
  ComplexMatrix mean = ComplexMatrix::Zero(ens.d, ens.d);
  for (Index a = 0; a < ens.size(); ++a)
    mean += ens.prior[a] * ens.states[a].m;
  mean = ((mean + mean.adjoint()) / 2.0).eval();
  double avg = 0.0;
  for (Index a = 0; a < ens.size(); ++a)
    avg += ens.prior[a] * core::fidelity_mat(ens.states[a].m, mean);
  return avg;
}

}  // namespace qbme::experiments
