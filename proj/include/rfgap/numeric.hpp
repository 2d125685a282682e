#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace rfgap {

// Kahan compensated accumulator.  The prediction-equivalence checks compare
// two differently-ordered sums against a 1e-10 gate, so plain double
// accumulation over ~1e3 terms of magnitude ~1e2 is too sloppy; compensation
// keeps the error near one ulp of the result regardless of term count.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// Median with the fixed tie rule: even count -> mean of the two central
// values.  Takes a copy because it sorts.
double median(std::vector<double> v);

// Mean absolute deviation around a given center.
double mean_abs_deviation(const std::vector<double>& v, double center);

// Least-squares slope through the origin of y on x.
double slope_through_origin(const std::vector<double>& x,
                            const std::vector<double>& y);

}  // namespace rfgap
