#pragma once

#include <string>
#include <vector>

#include "qbme/experiments.hpp"

namespace qbme::io {

// 12 significant digits, the CLI's floating-point output convention.
std::string fmt12(double x);

// x rounded through its 12-significant-digit decimal representation, so JSON
// output carries the same value the CSVs print.
double round12(double x);

std::string csv_records(const std::vector<experiments::ExperimentRecord>& recs);
std::string csv_histogram(const experiments::Histogram& h);

// Parses a records CSV and extracts the avg_fidelity column; throws
// InvalidArgument when the column or any data row is missing.
std::vector<double> read_avg_fidelity_csv(const std::string& path);

std::string iso8601_utc_now();

}  // namespace qbme::io
