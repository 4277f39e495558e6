#include "qbme/designs.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qbme::designs {

using core::Complex;
using core::ComplexMatrix;

namespace {

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Canonical representative modulo global phase: rotate so the first entry
// with |u| > 1e-6 (column-major scan) is real positive, then round to 1e-9.
std::string phase_key(const ComplexMatrix& u) {
  const Eigen::Index d = u.rows();
  Complex phase(1, 0);
  for (Eigen::Index k = 0; k < d * d; ++k) {
    const Complex v = u(k % d, k / d);
    if (std::abs(v) > 1e-6) {
      phase = v / std::abs(v);
      break;
    }
  }
  std::ostringstream os;
  char buf[64];
  for (Eigen::Index k = 0; k < d * d; ++k) {
    Complex v = u(k % d, k / d) / phase;
    double re = std::round(v.real() * 1e9) / 1e9;
    double im = std::round(v.imag() * 1e9) / 1e9;
    if (re == 0.0) re = 0.0;  // normalize -0
    if (im == 0.0) im = 0.0;
    std::snprintf(buf, sizeof buf, "%.9f,%.9f;", re, im);
    os << buf;
  }
  return os.str();
}

// Partitions of t into at most d parts, hook length formula for f_lambda.
void partition_sum(int remaining, int max_part, int depth, int max_depth,
                   std::vector<int>& parts, double& acc) {
  if (remaining == 0) {
    double f = 1.0;
    const int t = [&] {
      int s = 0;
      for (int p : parts) s += p;
      return s;
    }();
    // f_lambda = t! / prod hooks
    for (int n = 2; n <= t; ++n) f *= n;
    for (size_t i = 0; i < parts.size(); ++i)
      for (int j = 0; j < parts[i]; ++j) {
        int arm = parts[i] - j - 1;
        int leg = 0;
        for (size_t k = i + 1; k < parts.size(); ++k)
          if (parts[k] > j) ++leg;
        f /= (arm + leg + 1);
      }
    acc += f * f;
    return;
  }
  if (depth == max_depth) return;
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    parts.push_back(p);
    partition_sum(remaining - p, p, depth + 1, max_depth, parts, acc);
    parts.pop_back();
  }
}

}  // namespace

double haar_frame_potential(Index d, int t) {
  if (t < 1) throw InvalidArgument("t must be >= 1");
  if (d < 1) throw InvalidArgument("d must be >= 1");
  std::vector<int> parts;
  double acc = 0.0;
  partition_sum(t, t, 0, static_cast<int>(d), parts, acc);
  return acc;
}

double frame_potential(const UnitarySet& s, int t) {
  if (t < 1) throw InvalidArgument("t must be >= 1");
  if (s.elements.empty()) throw InvalidArgument("empty unitary set");
  const Index n = s.size();
  double acc = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double a2 =
          std::norm((s.elements[i].m.adjoint() * s.elements[j].m).trace());
      acc += std::pow(a2, t);
    }
  return acc / (static_cast<double>(n) * static_cast<double>(n));
}

void certify(const UnitarySet& s) {
  const auto& t = core::tols();
  try {
    for (const auto& u : s.elements) core::validate_unitary(u.m, t);
  } catch (const Error& ex) {
    throw CertificationFailed(s.label + ": " + ex.what());
  }
  for (int k = 1; k <= s.claimed_order; ++k) {
    const double fp = frame_potential(s, k);
    const double haar = haar_frame_potential(s.d, k);
    if (std::abs(fp - haar) > t.design_cert) {
      std::ostringstream os;
      os << s.label << ": frame potential at t = " << k << " is " << fp
         << ", Haar value " << haar;
      throw CertificationFailed(os.str());
    }
  }
  const int above = s.claimed_order + 1;
  const double fp = frame_potential(s, above);
  const double haar = haar_frame_potential(s.d, above);
  if (fp < haar + 1e-3) {
    std::ostringstream os;
    os << s.label << ": frame potential at t = " << above << " is " << fp
       << ", expected > " << haar << " + 1e-3 (order not strict)";
    throw CertificationFailed(os.str());
  }
}

UnitarySet pauli_group() {
  UnitarySet s;
  s.d = 2;
  s.label = "pauli";
  s.claimed_order = 1;
  s.elements = {Unitary{ComplexMatrix::Identity(2, 2)}, Unitary{pauli_x()},
                Unitary{pauli_y()}, Unitary{pauli_z()}};
  certify(s);
  return s;
}

UnitarySet qubit_2design() {
  UnitarySet s;
  s.d = 2;
  s.label = "qubit-2design";
  s.claimed_order = 2;
  const ComplexMatrix t =
      (ComplexMatrix::Identity(2, 2) -
       Complex(0, 1) * (pauli_x() + pauli_y() + pauli_z())) /
      2.0;
  std::vector<ComplexMatrix> paulis = {ComplexMatrix::Identity(2, 2),
                                       pauli_x(), pauli_y(), pauli_z()};
  ComplexMatrix tk = ComplexMatrix::Identity(2, 2);
  for (int k = 0; k < 3; ++k) {
    for (const auto& p : paulis) s.elements.push_back(Unitary{p * tk});
    tk = (tk * t).eval();
  }
  certify(s);
  return s;
}

UnitarySet clifford_group_qubit() {
  UnitarySet s;
  s.d = 2;
  s.label = "clifford";
  s.claimed_order = 3;
  ComplexMatrix h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  ComplexMatrix sg(2, 2);
  sg << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(0, 1);

  std::set<std::string> seen;
  std::deque<ComplexMatrix> queue;
  auto push = [&](const ComplexMatrix& u) {
    const std::string key = phase_key(u);
    if (seen.insert(key).second) {
      s.elements.push_back(Unitary{u});
      queue.push_back(u);
    }
  };
  push(ComplexMatrix::Identity(2, 2));
  while (!queue.empty()) {
    const ComplexMatrix u = queue.front();
    queue.pop_front();
    push(h * u);
    push(sg * u);
  }
  certify(s);
  return s;
}

const Unitary& sample_from_set(const UnitarySet& s,
                               sampling::RngStream& rng) {
  if (s.elements.empty()) throw InvalidArgument("empty unitary set");
  Index i = static_cast<Index>(rng.uniform() * static_cast<double>(s.size()));
  if (i >= s.size()) i = s.size() - 1;
  return s.elements[i];
}

const UnitarySet& named_set(const std::string& name) {
  static const UnitarySet pauli = pauli_group();
  static const UnitarySet design2 = qubit_2design();
  static const UnitarySet clifford = clifford_group_qubit();
  if (name == "pauli") return pauli;
  if (name == "2design") return design2;
  if (name == "clifford") return clifford;
  throw InvalidArgument("unknown design set '" + name + "'");
}

UnitarySet set_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument("malformed unitary-set JSON: " +
                          std::string(ex.what()));
  }
  UnitarySet s;
  try {
    s.d = j.at("d").get<Index>();
    s.label = j.value("label", std::string("custom"));
    s.claimed_order = j.at("claimed_design_order").get<int>();
    for (const auto& el : j.at("elements")) {
      ComplexMatrix m(s.d, s.d);
      for (Index r = 0; r < s.d; ++r)
        for (Index c = 0; c < s.d; ++c)
          m(r, c) = Complex(el.at(r).at(c).at(0).get<double>(),
                            el.at(r).at(c).at(1).get<double>());
      s.elements.push_back(Unitary{m});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument("malformed unitary-set JSON: " +
                          std::string(ex.what()));
  }
  certify(s);
  return s;
}

void set_to_json(const UnitarySet& s, const std::string& path) {
  nlohmann::json j;
  j["d"] = s.d;
  j["label"] = s.label;
  j["claimed_design_order"] = s.claimed_order;
  auto& els = j["elements"];
  els = nlohmann::json::array();
  for (const auto& u : s.elements) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < s.d; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Index c = 0; c < s.d; ++c)
        row.push_back({u.m(r, c).real(), u.m(r, c).imag()});
      rows.push_back(std::move(row));
    }
    els.push_back(std::move(rows));
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << j.dump() << "\n";
}

}  // namespace qbme::designs
