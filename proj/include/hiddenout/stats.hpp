#pragma once

#include <span>
#include <vector>

namespace hiddenout {

/// Linear-interpolation quantile (Hyndman-Fan type 7) of an ascending range.
double quantile_sorted(std::span<const double> sorted, double p);

/// Same as quantile_sorted but sorts a copy first.
double quantile(std::vector<double> values, double p);

double median(std::vector<double> values);

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double iqr() const { return q3 - q1; }
};

FiveNumber five_number(std::vector<double> values);

}  // namespace hiddenout
