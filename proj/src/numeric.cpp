#include "rfgap/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "rfgap/common.hpp"

namespace rfgap {

double median(std::vector<double> v) {
  RFGAP_REQUIRE(!v.empty(), "median of empty set");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double mean_abs_deviation(const std::vector<double>& v, double center) {
  RFGAP_REQUIRE(!v.empty(), "mean_abs_deviation of empty set");
  KahanSum s;
  for (double x : v) s.add(std::abs(x - center));
  return s.value() / double(v.size());
}

double slope_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
  RFGAP_REQUIRE(x.size() == y.size() && !x.empty(), "slope: mismatched or empty inputs");
  KahanSum xy, xx;
  for (size_t i = 0; i < x.size(); ++i) {
    xy.add(x[i] * y[i]);
    xx.add(x[i] * x[i]);
  }
  RFGAP_REQUIRE(xx.value() > 0.0, "slope: x is identically zero");
  return xy.value() / xx.value();
}

}  // namespace rfgap
