#pragma once

#include <vector>

namespace qcurv {

// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes: monotone data
// stay monotone between the knots. Outside the knots the end cubic is continued.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;

  const std::vector<double>& knots() const noexcept { return x_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

}  // namespace qcurv
