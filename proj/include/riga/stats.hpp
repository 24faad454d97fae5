#pragma once

#include <cstddef>
#include <span>

#include "json.hpp"

namespace riga::stats {

struct Summary {
  std::size_t n = 0;
  double mean = 0;
  /// Sample standard deviation (n - 1 denominator); 0 for n < 2.
  double stddev = 0;
  double min = 0;
  double p25 = 0;
  double median = 0;
  double p75 = 0;
  double max = 0;
};

/// Quantiles use linear interpolation between order statistics.
Summary summarize(std::span<const double> samples);

/// Empty samples serialize the moments as null.
nlohmann::ordered_json summary_to_json(const Summary& s);

double relative_error(double a, double b);

/// P(Z <= z) for a standard normal.
double normal_cdf(double z);

}  // namespace riga::stats
