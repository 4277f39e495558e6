#include "qbme/io.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "qbme/errors.hpp"

namespace qbme::io {

std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double round12(double x) {
  return std::strtod(fmt12(x).c_str(), nullptr);
}

std::string csv_records(const std::vector<experiments::ExperimentRecord>& recs) {
  std::ostringstream os;
  os << "stream_index,avg_fidelity,n_outcomes,wall_ms\n";
  for (const auto& r : recs)
    os << r.stream_index << "," << fmt12(r.average_fidelity) << ","
       << r.outcomes.size() << "," << fmt12(r.wall_ms) << "\n";
  return os.str();
}

std::string csv_histogram(const experiments::Histogram& h) {
  std::ostringstream os;
  os << "bin_lo,bin_hi,count\n";
  for (size_t b = 0; b < h.counts.size(); ++b)
    os << fmt12(h.edges[b]) << "," << fmt12(h.edges[b + 1]) << ","
       << h.counts[b] << "\n";
  return os.str();
}

std::vector<double> read_avg_fidelity_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty file: " + path);
  int col = -1;
  {
    std::istringstream hs(line);
    std::string field;
    for (int i = 0; std::getline(hs, field, ','); ++i)
      if (field == "avg_fidelity") col = i;
  }
  if (col < 0)
    throw InvalidArgument("no avg_fidelity column in " + path);
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    int i = 0;
    bool found = false;
    while (std::getline(ls, field, ',')) {
      if (i++ == col) {
        try {
          values.push_back(std::stod(field));
        } catch (const std::exception&) {
          throw InvalidArgument("bad avg_fidelity value '" + field + "'");
        }
        found = true;
        break;
      }
    }
    if (!found) throw InvalidArgument("short row in " + path);
  }
  if (values.empty()) throw InvalidArgument("no data rows in " + path);
  return values;
}

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace qbme::io
