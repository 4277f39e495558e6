#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "qbme/bayes.hpp"
#include "qbme/core.hpp"
#include "qbme/designs.hpp"
#include "qbme/experiments.hpp"
#include "qbme/pgm.hpp"
#include "qbme/sampling.hpp"

namespace py = pybind11;
using namespace qbme;
using core::ComplexMatrix;
using core::ComplexVector;
using core::RealVector;

namespace {

core::DensityMatrix as_density(const ComplexMatrix& m) {
  return core::validate_density(m);
}

std::vector<ComplexMatrix> povm_effects(const ComplexMatrix& u) {
  return bayes::basis_povm(core::validate_unitary(u)).effects;
}

core::Povm povm_from(const std::vector<ComplexMatrix>& effects,
                     core::Index d) {
  return core::validate_povm(d, effects);
}

}  // namespace

PYBIND11_MODULE(_qbme, m) {
  m.doc() = "Bayesian mean estimation of quantum states: core numerics";
  m.attr("__version__") = QBME_VERSION;

  py::register_exception<Error>(m, "QbmeError");

  // --- sampling ------------------------------------------------------------
  py::class_<sampling::RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("master_seed"),
           py::arg("stream_index"))
      .def("uniform", &sampling::RngStream::uniform)
      .def("normal", &sampling::RngStream::normal)
      .def("next_u64", &sampling::RngStream::next_u64)
      .def_property_readonly("master_seed", &sampling::RngStream::master_seed)
      .def_property_readonly("stream_index",
                             &sampling::RngStream::stream_index);

  m.def("ginibre_matrix", &sampling::ginibre_matrix, py::arg("d"),
        py::arg("rng"));
  m.def(
      "haar_unitary",
      [](core::Index d, sampling::RngStream& rng) {
        return sampling::haar_unitary(d, rng).m;
      },
      py::arg("d"), py::arg("rng"));
  m.def(
      "haar_pure_state",
      [](core::Index d, sampling::RngStream& rng) {
        return sampling::haar_pure_state(d, rng).a;
      },
      py::arg("d"), py::arg("rng"));
  m.def(
      "ginibre_state",
      [](core::Index d, sampling::RngStream& rng) {
        return sampling::ginibre_state(d, rng).m;
      },
      py::arg("d"), py::arg("rng"));
  m.def(
      "fixed_rank_state",
      [](core::Index d, core::Index r, sampling::RngStream& rng) {
        return sampling::fixed_rank_state(d, r, rng).m;
      },
      py::arg("d"), py::arg("r"), py::arg("rng"));
  m.def("inverse_transform_sample", &sampling::inverse_transform_sample,
        py::arg("p"), py::arg("rng"));

  py::class_<core::Ensemble, std::shared_ptr<core::Ensemble>>(m, "Ensemble")
      .def_readonly("kind", &core::Ensemble::kind)
      .def_readonly("d", &core::Ensemble::d)
      .def_readonly("prior", &core::Ensemble::prior)
      .def_readonly("is_pure", &core::Ensemble::is_pure)
      .def_property_readonly("L", &core::Ensemble::size)
      .def_property_readonly("states",
                             [](const core::Ensemble& e) {
                               std::vector<ComplexMatrix> out;
                               out.reserve(e.states.size());
                               for (const auto& s : e.states)
                                 out.push_back(s.m);
                               return out;
                             })
      .def("__len__", &core::Ensemble::size);

  m.def("build_ensemble", &sampling::build_ensemble, py::arg("kind"),
        py::arg("d"), py::arg("L"), py::arg("rng"));
  m.def("save_ensemble", &sampling::save_ensemble, py::arg("ensemble"),
        py::arg("seed"), py::arg("path"));
  m.def("load_ensemble", &sampling::load_ensemble, py::arg("path"));

  // --- core ----------------------------------------------------------------
  m.def(
      "validate_density",
      [](const ComplexMatrix& rho) { return as_density(rho).m; },
      py::arg("rho"));
  m.def(
      "fidelity",
      [](const ComplexMatrix& rho, const ComplexMatrix& sigma) {
        return core::fidelity(as_density(rho), as_density(sigma));
      },
      py::arg("rho"), py::arg("sigma"));
  m.def(
      "infidelity",
      [](const ComplexMatrix& rho, const ComplexMatrix& sigma) {
        return core::infidelity(as_density(rho), as_density(sigma));
      },
      py::arg("rho"), py::arg("sigma"));
  m.def("purity", &core::purity, py::arg("rho"));

  // --- designs ---------------------------------------------------------
  m.def(
      "design_elements",
      [](const std::string& name) {
        std::vector<ComplexMatrix> out;
        for (const auto& u : designs::named_set(name).elements)
          out.push_back(u.m);
        return out;
      },
      py::arg("name"));
  m.def(
      "frame_potential",
      [](const std::string& name, int t) {
        return designs::frame_potential(designs::named_set(name), t);
      },
      py::arg("name"), py::arg("t"));
  m.def("haar_frame_potential", &designs::haar_frame_potential, py::arg("d"),
        py::arg("t"));

  // --- bayes -----------------------------------------------------------
  py::class_<bayes::Posterior>(m, "Posterior")
      .def_readonly("weights", &bayes::Posterior::weights)
      .def_readonly("update_count", &bayes::Posterior::update_count);

  m.def("make_prior", &bayes::make_prior, py::arg("ensemble"));
  m.def("basis_povm", &povm_effects, py::arg("unitary"));
  m.def(
      "likelihood",
      [](const std::vector<ComplexMatrix>& effects, const ComplexMatrix& rho) {
        const auto d = rho.rows();
        return bayes::likelihood(povm_from(effects, d), as_density(rho));
      },
      py::arg("effects"), py::arg("rho"));
  m.def(
      "total_probability",
      [](const std::vector<ComplexMatrix>& effects, const core::Ensemble& ens,
         const RealVector& weights) {
        return bayes::total_probability(povm_from(effects, ens.d), ens,
                                        weights);
      },
      py::arg("effects"), py::arg("ensemble"), py::arg("weights"));
  m.def(
      "bayes_update",
      [](const bayes::Posterior& post, const std::vector<ComplexMatrix>& effects,
         core::Index outcome) {
        return bayes::bayes_update(
            post, povm_from(effects, post.ensemble->d), outcome);
      },
      py::arg("posterior"), py::arg("effects"), py::arg("outcome"));
  m.def(
      "bayes_estimator",
      [](const bayes::Posterior& post) {
        return bayes::bayes_estimator(post).m;
      },
      py::arg("posterior"));

  // --- experiments -------------------------------------------------------
  py::class_<experiments::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init([](core::Index d, core::Index L, core::Index N, int I,
                       const std::string& kind, const std::string& source,
                       std::uint64_t master_seed, int histogram_bins,
                       int workers) {
             experiments::ExperimentConfig cfg;
             cfg.d = d;
             cfg.L = L;
             cfg.N = N;
             cfg.I = I;
             cfg.kind = kind;
             cfg.source = source;
             cfg.master_seed = master_seed;
             cfg.histogram_bins = histogram_bins;
             cfg.workers = workers;
             experiments::validate_config(cfg);
             return cfg;
           }),
           py::arg("d") = 2, py::arg("L") = 10000, py::arg("N") = 1,
           py::arg("I") = 100, py::arg("kind") = "pure-haar",
           py::arg("source") = "haar", py::arg("master_seed") = 20250825ULL,
           py::arg("histogram_bins") = 40, py::arg("workers") = 0)
      .def_readwrite("d", &experiments::ExperimentConfig::d)
      .def_readwrite("L", &experiments::ExperimentConfig::L)
      .def_readwrite("N", &experiments::ExperimentConfig::N)
      .def_readwrite("I", &experiments::ExperimentConfig::I)
      .def_readwrite("kind", &experiments::ExperimentConfig::kind)
      .def_readwrite("source", &experiments::ExperimentConfig::source)
      .def_readwrite("master_seed",
                     &experiments::ExperimentConfig::master_seed)
      .def_readwrite("histogram_bins",
                     &experiments::ExperimentConfig::histogram_bins)
      .def_readwrite("workers", &experiments::ExperimentConfig::workers);

  py::class_<experiments::ExperimentRecord>(m, "ExperimentRecord")
      .def_readonly("stream_index", &experiments::ExperimentRecord::stream_index)
      .def_readonly("outcomes", &experiments::ExperimentRecord::outcomes)
      .def_readonly("final_posterior",
                    &experiments::ExperimentRecord::final_posterior)
      .def_readonly("average_fidelity",
                    &experiments::ExperimentRecord::average_fidelity)
      .def_readonly("wall_ms", &experiments::ExperimentRecord::wall_ms);

  py::class_<experiments::Histogram>(m, "Histogram")
      .def_readonly("edges", &experiments::Histogram::edges)
      .def_readonly("counts", &experiments::Histogram::counts);

  py::class_<experiments::BatchSummary>(m, "BatchSummary")
      .def_readonly("values", &experiments::BatchSummary::values)
      .def_readonly("mean", &experiments::BatchSummary::mean)
      .def_readonly("std_dev", &experiments::BatchSummary::std_dev)
      .def_readonly("histogram", &experiments::BatchSummary::histogram);

  m.def("run_experiment", &experiments::run_experiment, py::arg("config"),
        py::arg("stream_index"));
  m.def("run_batch_records", &experiments::run_batch_records,
        py::arg("config"));
  m.def("run_batch", &experiments::run_batch, py::arg("config"));
  m.def("make_histogram", &experiments::make_histogram, py::arg("values"),
        py::arg("bins"));
  m.def("lemma1_bound", &experiments::lemma1_bound, py::arg("d"),
        py::arg("N"));
  m.def("lemma2_value", &experiments::lemma2_value, py::arg("d"));
  m.def("sym_subspace_dim", &experiments::sym_subspace_dim, py::arg("d"),
        py::arg("N"));

  py::class_<experiments::CompareRow>(m, "CompareRow")
      .def_readonly("source", &experiments::CompareRow::source)
      .def_readonly("N", &experiments::CompareRow::N)
      .def_readonly("mean", &experiments::CompareRow::mean)
      .def_readonly("std_dev", &experiments::CompareRow::std_dev);

  m.def("compare_sources", &experiments::compare_sources, py::arg("base"),
        py::arg("sources"), py::arg("Ns"));
  m.def("prior_average_fidelity", &experiments::prior_average_fidelity,
        py::arg("ensemble"));

  // --- pgm -------------------------------------------------------------
  py::class_<pgm::PgmMeasurement>(m, "PgmMeasurement")
      .def_readonly("effects", &pgm::PgmMeasurement::effects)
      .def_readonly("residual", &pgm::PgmMeasurement::residual)
      .def_readonly("support_rank", &pgm::PgmMeasurement::support_rank)
      .def_property_readonly(
          "rho_out",
          [](const pgm::PgmMeasurement& p) { return p.rho_out.m; });

  m.def("build_pgm", &pgm::build_pgm, py::arg("ensemble"));
  m.def("pgm_posterior", &pgm::pgm_posterior, py::arg("pgm"), py::arg("x"));
  m.def(
      "pgm_bayes_estimator",
      [](const pgm::PgmMeasurement& p, core::Index x) {
        return pgm::pgm_bayes_estimator(p, x).m;
      },
      py::arg("pgm"), py::arg("x"));
  m.def(
      "petz_recovery",
      [](const pgm::PgmMeasurement& p, const ComplexMatrix& input) {
        const auto res = pgm::petz_recovery(p, as_density(input));
        return py::make_tuple(res.weights, res.residual_mass);
      },
      py::arg("pgm"), py::arg("input"));

  py::class_<pgm::TrialPair>(m, "TrialPair")
      .def_readonly("trial", &pgm::TrialPair::trial)
      .def_readonly("outcome", &pgm::TrialPair::outcome)
      .def_readonly("f_naive", &pgm::TrialPair::f_naive)
      .def_readonly("f_bayes", &pgm::TrialPair::f_bayes);

  m.def(
      "naive_vs_bayes",
      [](const pgm::PgmMeasurement& p, const ComplexMatrix& rho0,
         sampling::RngStream& rng, int trials) {
        return pgm::naive_vs_bayes(p, as_density(rho0), rng, trials);
      },
      py::arg("pgm"), py::arg("rho0"), py::arg("rng"), py::arg("trials"));
  m.def("naive_vs_bayes_resampled", &pgm::naive_vs_bayes_resampled,
        py::arg("pgm"), py::arg("rng"), py::arg("trials"));

  py::class_<pgm::IdentityReport>(m, "IdentityReport")
      .def_readonly("max_posterior_dev",
                    &pgm::IdentityReport::max_posterior_dev)
      .def_readonly("max_marginal_dev", &pgm::IdentityReport::max_marginal_dev)
      .def_readonly("max_petz_dev", &pgm::IdentityReport::max_petz_dev)
      .def_readonly("ensembles", &pgm::IdentityReport::ensembles);

  m.def("verify_identities", &pgm::verify_identities, py::arg("n_ensembles"),
        py::arg("seed"));
}
