#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qbme/designs.hpp"
#include "qbme/experiments.hpp"
#include "qbme/io.hpp"
#include "qbme/pgm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qbme;

namespace {

constexpr const char* kVersion = "qbme 0.1.0";

// Raised during the load/validate phase, before any file is written.
struct ConfigError {
  std::string msg;
};

// ---------------------------------------------------------------------------
// config handling

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError{"cannot read config file: " + path};
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ConfigError{"malformed config JSON: " + std::string(ex.what())};
  }
  // a manifest doubles as a config: unwrap its resolved config block
  if (j.is_object() && j.contains("command") && j.contains("config"))
    j = j.at("config");
  if (!j.is_object()) throw ConfigError{"config must be a JSON object"};
  return j;
}

template <typename T>
void take(const json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw ConfigError{std::string("config key '") + key +
                      "': " + ex.what()};
  }
}

// scalar or array of positive integers
void take_grid(const json& j, const char* key, std::vector<long>& into) {
  if (!j.contains(key)) return;
  try {
    const auto& v = j.at(key);
    if (v.is_array())
      into = v.get<std::vector<long>>();
    else
      into = {v.get<long>()};
  } catch (const json::exception& ex) {
    throw ConfigError{std::string("config key '") + key +
                      "': " + ex.what()};
  }
}

void apply_tolerances(const json& j) {
  if (!j.contains("tolerances")) return;
  const json& t = j.at("tolerances");
  auto& tol = core::tols();
  take(t, "hermitian", tol.hermitian);
  take(t, "psd", tol.psd);
  take(t, "trace_one", tol.trace_one);
  take(t, "pure_norm", tol.pure_norm);
  take(t, "prob_sum", tol.prob_sum);
  take(t, "povm_completeness", tol.povm_completeness);
  take(t, "unitarity", tol.unitarity);
  take(t, "design_cert", tol.design_cert);
  take(t, "pgm_identity", tol.pgm_identity);
  take(t, "pgm_identity_error", tol.pgm_identity_error);
  take(t, "support_cutoff", tol.support_cutoff);
  take(t, "d_cap", tol.d_cap);
}

// ---------------------------------------------------------------------------
// manifest

class Manifest {
 public:
  Manifest(std::string command, json cfg, std::uint64_t seed,
           const fs::path& out_dir)
      : path_(out_dir / "manifest.json") {
    j_["command"] = std::move(command);
    j_["config"] = std::move(cfg);
    j_["master_seed"] = seed;
    j_["out_dir"] = out_dir.string();
    j_["tool_version"] = kVersion;
    j_["outputs"] = json::array();
  }

  void add_output(const std::string& name) { j_["outputs"].push_back(name); }

  void start() {
    j_["started_utc"] = io::iso8601_utc_now();
    write();
  }

  void finish() {
    j_["finished_utc"] = io::iso8601_utc_now();
    write();
  }

 private:
  void write() const {
    std::ofstream out(path_);
    if (!out) throw InvalidArgument("cannot write " + path_.string());
    out << j_.dump(2) << "\n";
  }

  json j_;
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + p.string());
  out << text;
}

// ---------------------------------------------------------------------------
// minimal SVG emitters (line chart, scatter, histogram bars)

constexpr int kW = 640, kH = 480;
constexpr double kL = 70, kR = 610, kT = 30, kB = 430;  // plot rectangle
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> pts;
};

void pad_range(double& lo, double& hi) {
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
}

std::string svg_open() {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
     << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
     << "\">\n<rect width=\"" << kW << "\" height=\"" << kH
     << "\" fill=\"white\"/>\n";
  return os.str();
}

std::string svg_axes(double xlo, double xhi, double ylo, double yhi,
                     const std::string& xlabel, const std::string& ylabel) {
  std::ostringstream os;
  os << "<line x1=\"" << kL << "\" y1=\"" << kB << "\" x2=\"" << kR
     << "\" y2=\"" << kB << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL
     << "\" y2=\"" << kB << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (kL + kR) / 2 << "\" y=\"" << kB + 35
     << "\" font-size=\"13\" text-anchor=\"middle\">" << xlabel
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << (kT + kB) / 2
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << (kT + kB) / 2 << ")\">" << ylabel << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xlo + k * (xhi - xlo) / 4.0;
    const double fy = ylo + k * (yhi - ylo) / 4.0;
    const double px = kL + k * (kR - kL) / 4.0;
    const double py = kB - k * (kB - kT) / 4.0;
    os << "<text x=\"" << coord(px) << "\" y=\"" << kB + 16
       << "\" font-size=\"11\" text-anchor=\"middle\">" << io::fmt12(fx).substr(0, 6)
       << "</text>\n";
    os << "<text x=\"" << kL - 6 << "\" y=\"" << coord(py + 4)
       << "\" font-size=\"11\" text-anchor=\"end\">" << io::fmt12(fy).substr(0, 6)
       << "</text>\n";
  }
  return os.str();
}

std::string svg_line_chart(const std::vector<Series>& series,
                           const std::string& xlabel,
                           const std::string& ylabel) {
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const auto& s : series)
    for (const auto& [x, y] : s.pts) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  pad_range(xlo, xhi);
  pad_range(ylo, yhi);
  auto px = [&](double x) { return kL + (x - xlo) / (xhi - xlo) * (kR - kL); };
  auto py = [&](double y) { return kB - (y - ylo) / (yhi - ylo) * (kB - kT); };

  std::ostringstream os;
  os << svg_open() << svg_axes(xlo, xhi, ylo, yhi, xlabel, ylabel);
  int ci = 0;
  for (const auto& s : series) {
    const char* color = kPalette[ci % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.pts)
      os << coord(px(x)) << "," << coord(py(y)) << " ";
    os << "\"/>\n";
    for (const auto& [x, y] : s.pts)
      os << "<circle cx=\"" << coord(px(x)) << "\" cy=\"" << coord(py(y))
         << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << kR - 90 << "\" y=\"" << kT + 16 * (ci + 1)
       << "\" font-size=\"12\" fill=\"" << color << "\">" << s.label
       << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_scatter(const std::vector<std::pair<double, double>>& pts,
                        const std::string& xlabel, const std::string& ylabel) {
  auto px = [&](double x) { return kL + x * (kR - kL); };
  auto py = [&](double y) { return kB - y * (kB - kT); };
  std::ostringstream os;
  os << svg_open() << svg_axes(0.0, 1.0, 0.0, 1.0, xlabel, ylabel);
  os << "<line x1=\"" << coord(px(0)) << "\" y1=\"" << coord(py(0))
     << "\" x2=\"" << coord(px(1)) << "\" y2=\"" << coord(py(1))
     << "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto& [x, y] : pts)
    os << "<circle cx=\"" << coord(px(x)) << "\" cy=\"" << coord(py(y))
       << "\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.5\"/>\n";
  os << "</svg>\n";
  return os.str();
}

std::string svg_histogram(const experiments::Histogram& h,
                          const std::string& xlabel) {
  const double xlo = h.edges.front(), xhi = h.edges.back();
  double yhi = 0;
  for (const auto c : h.counts) yhi = std::max(yhi, double(c));
  double ylo = 0, yhi_p = yhi;
  pad_range(ylo, yhi_p);
  ylo = 0;
  auto px = [&](double x) { return kL + (x - xlo) / (xhi - xlo) * (kR - kL); };
  auto py = [&](double y) { return kB - (y - ylo) / (yhi_p - ylo) * (kB - kT); };
  std::ostringstream os;
  os << svg_open() << svg_axes(xlo, xhi, ylo, yhi_p, xlabel, "count");
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double x0 = px(h.edges[b]), x1 = px(h.edges[b + 1]);
    const double y = py(double(h.counts[b]));
    os << "<rect x=\"" << coord(x0) << "\" y=\"" << coord(y) << "\" width=\""
       << coord(std::max(0.5, x1 - x0 - 1.0)) << "\" height=\""
       << coord(kB - y) << "\" fill=\"#1f77b4\" stroke=\"white\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// resolved options shared by the subcommands

struct Options {
  std::vector<long> ds = {2};
  std::vector<long> n_shots = {1};
  long L = 10000;
  int I = 100;
  std::string ensemble = "pure-haar";
  std::vector<std::string> sources = {"haar", "pauli", "2design", "clifford"};
  std::uint64_t seed = 20250825ULL;
  int bins = 40;
  int workers = 0;
  bool svg = false;
  fs::path out = "qbme_out";
  // pgm
  bool verify = false;
  int corpus_size = 100;
  std::string ensemble_file;
  int trials = 1000;
  std::string rho0 = "fresh";
  // bounds
  long d_min = 2, d_max = 8, n_min = 1, n_max = 10;
  // histogram
  std::string records_path;
};

experiments::ExperimentConfig cell_config(const Options& o, long d, long N,
                                          const std::string& source) {
  experiments::ExperimentConfig cfg;
  cfg.d = d;
  cfg.L = o.L;
  cfg.N = N;
  cfg.I = o.I;
  cfg.kind = o.ensemble;
  cfg.source = source;
  cfg.master_seed = o.seed;
  cfg.histogram_bins = o.bins;
  cfg.workers = o.workers;
  return cfg;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_run_haar(const Options& o) {
  try {
    for (long d : o.ds)
      for (long n : o.n_shots) experiments::validate_config(cell_config(o, d, n, "haar"));
  } catch (const Error& ex) {
    throw ConfigError{ex.what()};
  }

  json cfg_echo = {{"d", o.ds},           {"n_shots", o.n_shots},
                   {"L", o.L},            {"I", o.I},
                   {"ensemble", o.ensemble}, {"master_seed", o.seed},
                   {"bins", o.bins},      {"workers", o.workers},
                   {"svg", o.svg}};
  fs::create_directories(o.out);
  Manifest manifest("run-haar", cfg_echo, o.seed, o.out);
  std::vector<std::pair<long, long>> cells;
  for (long d : o.ds)
    for (long n : o.n_shots) {
      cells.emplace_back(d, n);
      manifest.add_output("records_d" + std::to_string(d) + "_N" +
                          std::to_string(n) + ".csv");
      manifest.add_output("summary_d" + std::to_string(d) + "_N" +
                          std::to_string(n) + ".json");
    }
  manifest.add_output("figure.csv");
  if (o.svg) manifest.add_output("figure.svg");
  manifest.start();

  std::ostringstream figure;
  figure << "d,N,mean_fidelity,std\n";
  std::map<long, Series> by_d;
  for (const auto& [d, n] : cells) {
    const auto cfg = cell_config(o, d, n, "haar");
    const auto records = experiments::run_batch_records(cfg);
    const std::string tag =
        "d" + std::to_string(d) + "_N" + std::to_string(n);
    write_text(o.out / ("records_" + tag + ".csv"), io::csv_records(records));

    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) values.push_back(r.average_fidelity);
    const auto s = experiments::summarize(values, o.bins);

    json edges = json::array(), counts = json::array();
    for (double e : s.histogram.edges) edges.push_back(io::round12(e));
    for (auto c : s.histogram.counts) counts.push_back(c);
    json summary = {
        {"mean", io::round12(s.mean)},
        {"std", io::round12(s.std_dev)},
        {"histogram", {{"edges", edges}, {"counts", counts}}},
        {"config",
         {{"d", d},
          {"N", n},
          {"L", o.L},
          {"I", o.I},
          {"ensemble", o.ensemble},
          {"source", "haar"},
          {"master_seed", o.seed},
          {"bins", o.bins},
          {"workers", o.workers}}},
        {"version", kVersion}};
    write_text(o.out / ("summary_" + tag + ".json"), summary.dump(2) + "\n");

    figure << d << "," << n << "," << io::fmt12(s.mean) << ","
           << io::fmt12(s.std_dev) << "\n";
    auto& series = by_d[d];
    series.label = "d=" + std::to_string(d);
    series.pts.emplace_back(double(n), s.mean);
    std::cout << "d=" << d << " N=" << n << " mean=" << io::fmt12(s.mean)
              << " std=" << io::fmt12(s.std_dev) << "\n";
  }
  write_text(o.out / "figure.csv", figure.str());
  if (o.svg) {
    std::vector<Series> series;
    for (auto& [d, s] : by_d) series.push_back(std::move(s));
    write_text(o.out / "figure.svg",
               svg_line_chart(series, "N", "average fidelity"));
  }
  manifest.finish();
  std::cout << cells.size() << " cell(s) written to " << o.out.string()
            << "\n";
  return 0;
}

int cmd_compare_designs(const Options& o) {
  try {
    for (const auto& src : o.sources)
      for (long n : o.n_shots)
        experiments::validate_config(cell_config(o, o.ds[0], n, src));
  } catch (const Error& ex) {
    throw ConfigError{ex.what()};
  }

  json cfg_echo = {{"d", o.ds[0]},          {"n_shots", o.n_shots},
                   {"L", o.L},              {"I", o.I},
                   {"ensemble", o.ensemble}, {"sources", o.sources},
                   {"master_seed", o.seed}, {"bins", o.bins},
                   {"workers", o.workers},  {"svg", o.svg}};
  fs::create_directories(o.out);
  Manifest manifest("compare-designs", cfg_echo, o.seed, o.out);
  manifest.add_output("compare.csv");
  if (o.svg) manifest.add_output("compare.svg");
  manifest.start();

  const auto base = cell_config(o, o.ds[0], o.n_shots[0], "haar");
  std::vector<core::Index> Ns(o.n_shots.begin(), o.n_shots.end());
  const auto rows = experiments::compare_sources(base, o.sources, Ns);

  std::ostringstream csv;
  csv << "source,N,mean,std\n";
  std::map<std::string, Series> by_source;
  for (const auto& r : rows) {
    csv << r.source << "," << r.N << "," << io::fmt12(r.mean) << ","
        << io::fmt12(r.std_dev) << "\n";
    auto& s = by_source[r.source];
    s.label = r.source;
    s.pts.emplace_back(double(r.N), r.mean);
    std::cout << r.source << " N=" << r.N << " mean=" << io::fmt12(r.mean)
              << " std=" << io::fmt12(r.std_dev) << "\n";
  }
  write_text(o.out / "compare.csv", csv.str());
  if (o.svg) {
    std::vector<Series> series;
    for (const auto& src : o.sources) series.push_back(by_source[src]);
    write_text(o.out / "compare.svg",
               svg_line_chart(series, "N", "average fidelity"));
  }
  manifest.finish();
  return 0;
}

int cmd_pgm(const Options& o) {
  if (o.verify) {
    if (o.corpus_size < 1) throw ConfigError{"corpus size must be >= 1"};
    json cfg_echo = {{"verify", true},
                     {"corpus_size", o.corpus_size},
                     {"master_seed", o.seed}};
    fs::create_directories(o.out);
    Manifest manifest("pgm", cfg_echo, o.seed, o.out);
    manifest.start();
    double worst = 0.0;
    try {
      const auto rep = pgm::verify_identities(o.corpus_size, o.seed);
      std::cout << "ensembles checked        " << rep.ensembles << "\n"
                << "max posterior deviation  "
                << io::fmt12(rep.max_posterior_dev) << "\n"
                << "max marginal deviation   "
                << io::fmt12(rep.max_marginal_dev) << "\n"
                << "max petz deviation       " << io::fmt12(rep.max_petz_dev)
                << "\n";
      worst = std::max({rep.max_posterior_dev, rep.max_marginal_dev,
                        rep.max_petz_dev});
    } catch (const Error& ex) {
      std::cerr << "identity verification failed: " << ex.what() << "\n";
      return 4;
    }
    manifest.finish();
    if (worst > core::tols().pgm_identity_error) {
      std::cerr << "identity deviation " << io::fmt12(worst)
                << " exceeds " << io::fmt12(core::tols().pgm_identity_error)
                << "\n";
      return 4;
    }
    return 0;
  }

  if (o.trials < 1) throw ConfigError{"trials must be >= 1"};
  if (o.rho0 != "fresh" && o.rho0 != "ensemble")
    throw ConfigError{"--rho0 must be 'fresh' or 'ensemble'"};
  core::Ensemble ens;
  if (!o.ensemble_file.empty()) {
    try {
      ens = sampling::load_ensemble(o.ensemble_file);
    } catch (const Error& ex) {
      throw ConfigError{ex.what()};
    }
  } else {
    try {
      experiments::validate_config(cell_config(o, o.ds[0], 1, "haar"));
    } catch (const Error& ex) {
      throw ConfigError{ex.what()};
    }
    sampling::RngStream rng(o.seed, 0);
    ens = sampling::build_ensemble(o.ensemble, o.ds[0], o.L, rng);
  }

  json cfg_echo = {{"d", ens.d},
                   {"L", ens.size()},
                   {"ensemble", ens.kind},
                   {"ensemble_file", o.ensemble_file},
                   {"trials", o.trials},
                   {"rho0", o.rho0},
                   {"master_seed", o.seed},
                   {"svg", o.svg}};
  fs::create_directories(o.out);
  Manifest manifest("pgm", cfg_echo, o.seed, o.out);
  manifest.add_output("scatter.csv");
  if (o.svg) manifest.add_output("scatter.svg");
  manifest.start();

  const auto meas =
      pgm::build_pgm(std::make_shared<core::Ensemble>(std::move(ens)));
  sampling::RngStream rng(o.seed, 1);
  std::vector<pgm::TrialPair> pairs;
  if (o.rho0 == "fresh") {
    pairs = pgm::naive_vs_bayes_resampled(meas, rng, o.trials);
  } else {
    const auto& e = *meas.ensemble;
    const core::Index pick = sampling::inverse_transform_sample(e.prior, rng);
    pairs = pgm::naive_vs_bayes(meas, e.states[pick], rng, o.trials);
  }

  std::ostringstream csv;
  csv << "trial,outcome,f_naive,f_bayes\n";
  double mean_naive = 0.0, mean_bayes = 0.0;
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : pairs) {
    csv << p.trial << "," << p.outcome << "," << io::fmt12(p.f_naive) << ","
        << io::fmt12(p.f_bayes) << "\n";
    mean_naive += p.f_naive;
    mean_bayes += p.f_bayes;
    pts.emplace_back(p.f_naive, p.f_bayes);
  }
  write_text(o.out / "scatter.csv", csv.str());
  if (o.svg)
    write_text(o.out / "scatter.svg",
               svg_scatter(pts, "naive fidelity", "Bayes fidelity"));
  manifest.finish();
  std::cout << "mean f_naive " << io::fmt12(mean_naive / pairs.size())
            << ", mean f_bayes " << io::fmt12(mean_bayes / pairs.size())
            << "\n";
  return 0;
}

int cmd_bounds(const Options& o) {
  if (o.d_min < 2 || o.d_max < o.d_min || o.d_max > 64)
    throw ConfigError{"d range must satisfy 2 <= d-min <= d-max <= 64"};
  if (o.n_min < 1 || o.n_max < o.n_min || o.n_max > 100000)
    throw ConfigError{"N range must satisfy 1 <= n-min <= n-max <= 100000"};

  json cfg_echo = {{"d_min", o.d_min},
                   {"d_max", o.d_max},
                   {"n_min", o.n_min},
                   {"n_max", o.n_max}};
  fs::create_directories(o.out);
  Manifest manifest("bounds", cfg_echo, o.seed, o.out);
  manifest.add_output("bounds.csv");
  manifest.start();

  std::ostringstream csv;
  csv << "d,N,lemma1_bound,lemma2_infidelity\n";
  std::cout << "d"
            << "\tN"
            << "\tlemma1_bound"
            << "\tlemma2_infidelity\n";
  for (long d = o.d_min; d <= o.d_max; ++d)
    for (long n = o.n_min; n <= o.n_max; ++n) {
      const double b1 = experiments::lemma1_bound(d, n);
      const double b2 = experiments::lemma2_value(d);
      csv << d << "," << n << "," << io::fmt12(b1) << "," << io::fmt12(b2)
          << "\n";
      std::cout << d << "\t" << n << "\t" << io::fmt12(b1) << "\t"
                << io::fmt12(b2) << "\n";
    }
  write_text(o.out / "bounds.csv", csv.str());
  manifest.finish();
  return 0;
}

int cmd_histogram(const Options& o) {
  if (o.bins < 1) throw ConfigError{"bins must be >= 1"};
  std::vector<double> values;
  try {
    values = io::read_avg_fidelity_csv(o.records_path);
  } catch (const Error& ex) {
    throw ConfigError{ex.what()};
  }

  json cfg_echo = {{"records", o.records_path}, {"bins", o.bins}};
  fs::create_directories(o.out);
  Manifest manifest("histogram", cfg_echo, o.seed, o.out);
  manifest.add_output("histogram.csv");
  if (o.svg) manifest.add_output("histogram.svg");
  manifest.start();

  const auto h = experiments::make_histogram(values, o.bins);
  write_text(o.out / "histogram.csv", io::csv_histogram(h));
  if (o.svg)
    write_text(o.out / "histogram.svg", svg_histogram(h, "average fidelity"));
  manifest.finish();
  std::cout << values.size() << " value(s) in " << o.bins << " bin(s)\n";
  return 0;
}

int cmd_gen_ensemble(const Options& o) {
  try {
    experiments::validate_config(cell_config(o, o.ds[0], 1, "haar"));
  } catch (const Error& ex) {
    throw ConfigError{ex.what()};
  }

  json cfg_echo = {{"d", o.ds[0]},
                   {"L", o.L},
                   {"ensemble", o.ensemble},
                   {"master_seed", o.seed}};
  fs::create_directories(o.out);
  Manifest manifest("gen-ensemble", cfg_echo, o.seed, o.out);
  manifest.add_output("ensemble.json");
  manifest.start();

  sampling::RngStream rng(o.seed, 0);
  const auto ens = sampling::build_ensemble(o.ensemble, o.ds[0], o.L, rng);
  sampling::save_ensemble(ens, o.seed, (o.out / "ensemble.json").string());
  manifest.finish();
  std::cout << "wrote " << (o.out / "ensemble.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// flag plumbing: defaults < config file < explicit flags

struct FlagValues {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;
  bool svg = false;
  long d = 2;
  std::vector<long> n_shots;
  long L = 0;
  int I = 0;
  std::string ensemble;
  std::vector<std::string> sources;
  int bins = 0;
  bool verify = false;
  int corpus_size = 0;
  std::string ensemble_file;
  int trials = 0;
  std::string rho0;
  long d_min = 0, d_max = 0, n_min = 0, n_max = 0;
  std::string records_path;
};

void add_common_flags(CLI::App* sub, FlagValues& f) {
  sub->add_option("--config", f.config_path, "JSON config (or a manifest)");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--workers", f.workers, "worker threads (0 = all cores)");
  sub->add_flag("--svg", f.svg, "also emit SVG plots");
}

bool given(const CLI::App* sub, const std::string& name) {
  const auto* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

Options resolve(CLI::App* sub, const FlagValues& f,
                const std::vector<const char*>& grid_keys) {
  Options o;
  if (given(sub, "--config")) {
    const json j = load_config(f.config_path);
    apply_tolerances(j);
    for (const char* key : grid_keys) {
      if (std::string(key) == "d") take_grid(j, "d", o.ds);
      if (std::string(key) == "n_shots") take_grid(j, "n_shots", o.n_shots);
    }
    take(j, "L", o.L);
    take(j, "I", o.I);
    take(j, "ensemble", o.ensemble);
    take(j, "sources", o.sources);
    take(j, "master_seed", o.seed);
    take(j, "bins", o.bins);
    take(j, "workers", o.workers);
    take(j, "svg", o.svg);
    take(j, "verify", o.verify);
    take(j, "corpus_size", o.corpus_size);
    take(j, "ensemble_file", o.ensemble_file);
    take(j, "trials", o.trials);
    take(j, "rho0", o.rho0);
    take(j, "d_min", o.d_min);
    take(j, "d_max", o.d_max);
    take(j, "n_min", o.n_min);
    take(j, "n_max", o.n_max);
    take(j, "records", o.records_path);
    std::string out_str;
    take(j, "out", out_str);
    if (!out_str.empty()) o.out = out_str;
  }
  if (given(sub, "--d")) o.ds = {f.d};
  if (given(sub, "--n-shots")) o.n_shots = f.n_shots;
  if (given(sub, "--L")) o.L = f.L;
  if (given(sub, "--I")) o.I = f.I;
  if (given(sub, "--ensemble")) o.ensemble = f.ensemble;
  if (given(sub, "--sources")) o.sources = f.sources;
  if (given(sub, "--seed")) o.seed = f.seed;
  if (given(sub, "--bins")) o.bins = f.bins;
  if (given(sub, "--workers")) o.workers = f.workers;
  if (given(sub, "--svg")) o.svg = f.svg;
  if (given(sub, "--verify")) o.verify = f.verify;
  if (given(sub, "--corpus-size")) o.corpus_size = f.corpus_size;
  if (given(sub, "--ensemble-file")) o.ensemble_file = f.ensemble_file;
  if (given(sub, "--trials")) o.trials = f.trials;
  if (given(sub, "--rho0")) o.rho0 = f.rho0;
  if (given(sub, "--d-min")) o.d_min = f.d_min;
  if (given(sub, "--d-max")) o.d_max = f.d_max;
  if (given(sub, "--n-min")) o.n_min = f.n_min;
  if (given(sub, "--n-max")) o.n_max = f.n_max;
  if (given(sub, "--records")) o.records_path = f.records_path;
  if (given(sub, "--out")) o.out = f.out;

  if (o.ds.empty() || o.n_shots.empty())
    throw ConfigError{"d and n_shots grids must be nonempty"};
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian mean estimation of quantum states: batch runner"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  FlagValues f;

  CLI::App* run = app.add_subcommand(
      "run-haar", "sequential Haar-basis estimation over a (d, N) grid");
  add_common_flags(run, f);
  run->add_option("--d", f.d, "dimension");
  run->add_option("--n-shots", f.n_shots, "number of sequential measurements")
      ->delimiter(',');
  run->add_option("--L", f.L, "ensemble size");
  run->add_option("--I", f.I, "experiments per batch");
  run->add_option("--ensemble", f.ensemble, "pure-haar | ginibre | mixed-rank");
  run->add_option("--bins", f.bins, "histogram bins");

  CLI::App* cmp = app.add_subcommand(
      "compare-designs", "design sources vs Haar at d=2 over an N grid");
  add_common_flags(cmp, f);
  cmp->add_option("--d", f.d, "dimension");
  cmp->add_option("--n-shots", f.n_shots, "N grid")->delimiter(',');
  cmp->add_option("--L", f.L, "ensemble size");
  cmp->add_option("--I", f.I, "experiments per batch");
  cmp->add_option("--ensemble", f.ensemble, "pure-haar | ginibre | mixed-rank");
  cmp->add_option("--sources", f.sources,
                  "subset of haar,pauli,2design,clifford")
      ->delimiter(',');
  cmp->add_option("--bins", f.bins, "histogram bins");

  CLI::App* pgmc = app.add_subcommand(
      "pgm", "pretty good measurement: identity checks or naive-vs-Bayes");
  add_common_flags(pgmc, f);
  pgmc->add_flag("--verify", f.verify, "run the identity corpus and exit");
  pgmc->add_option("--corpus-size", f.corpus_size, "ensembles in --verify");
  pgmc->add_option("--d", f.d, "dimension for generated ensembles");
  pgmc->add_option("--L", f.L, "ensemble size for generated ensembles");
  pgmc->add_option("--ensemble", f.ensemble,
                   "kind for generated ensembles");
  pgmc->add_option("--ensemble-file", f.ensemble_file,
                   "load the ensemble from JSON instead of generating");
  pgmc->add_option("--trials", f.trials, "scatter trials");
  pgmc->add_option("--rho0", f.rho0, "fresh | ensemble");

  CLI::App* bnd = app.add_subcommand("bounds", "closed-form risk bounds");
  add_common_flags(bnd, f);
  bnd->add_option("--d-min", f.d_min, "smallest dimension");
  bnd->add_option("--d-max", f.d_max, "largest dimension");
  bnd->add_option("--n-min", f.n_min, "smallest N");
  bnd->add_option("--n-max", f.n_max, "largest N");

  CLI::App* hist = app.add_subcommand(
      "histogram", "re-bin the avg_fidelity column of a records CSV");
  add_common_flags(hist, f);
  hist->add_option("--records", f.records_path, "records CSV path");
  hist->add_option("--bins", f.bins, "histogram bins");

  CLI::App* gen = app.add_subcommand(
      "gen-ensemble", "serialize a seeded ensemble for reuse");
  add_common_flags(gen, f);
  gen->add_option("--d", f.d, "dimension");
  gen->add_option("--L", f.L, "ensemble size");
  gen->add_option("--ensemble", f.ensemble, "pure-haar | ginibre | mixed-rank");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run_haar(resolve(run, f, {"d", "n_shots"}));
    if (cmp->parsed())
      return cmd_compare_designs(resolve(cmp, f, {"d", "n_shots"}));
    if (pgmc->parsed()) return cmd_pgm(resolve(pgmc, f, {"d"}));
    if (bnd->parsed()) return cmd_bounds(resolve(bnd, f, {}));
    if (hist->parsed()) return cmd_histogram(resolve(hist, f, {}));
    if (gen->parsed()) return cmd_gen_ensemble(resolve(gen, f, {"d"}));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.msg << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
