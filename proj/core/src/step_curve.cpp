#include "survcal/step_curve.hpp"

#include <algorithm>
#include <stdexcept>

namespace survcal {

StepCurve::StepCurve(std::vector<double> knots, std::vector<double> values,
                     double value_at_zero)
    : knots_(std::move(knots)), values_(std::move(values)), value_at_zero_(value_at_zero) {
  if (knots_.size() != values_.size()) {
    throw std::invalid_argument("StepCurve: knots/values size mismatch");
  }
  for (std::size_t j = 1; j < knots_.size(); ++j) {
    if (!(knots_[j] > knots_[j - 1])) {
      throw std::invalid_argument("StepCurve: knots must be strictly increasing");
    }
  }
}

double StepCurve::at(double t) const {
  // Index of the last knot <= t.
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return value_at_zero_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepCurve::at_left(double t) const {
  // Index of the last knot strictly < t.
  auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return value_at_zero_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepCurve::integral(double t) const {
  if (t <= 0.0) return 0.0;
  double area = 0.0;
  double prev = 0.0;
  double value = value_at_zero_;
  for (std::size_t j = 0; j < knots_.size() && knots_[j] < t; ++j) {
    if (knots_[j] > prev) {
      area += (knots_[j] - prev) * value;
      prev = knots_[j];
    }
    value = values_[j];
  }
  area += (t - prev) * value;
  return area;
}

}  // namespace survcal
