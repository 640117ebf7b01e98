#pragma once

#include <vector>

namespace survcal {

// Right-continuous piecewise-constant function of time. The curve equals
// value_at_zero left of the first knot and values[j] on [knots[j], knots[j+1]).
class StepCurve {
 public:
  StepCurve() = default;
  StepCurve(std::vector<double> knots, std::vector<double> values,
            double value_at_zero = 1.0);

  // Right-continuous evaluation.
  double at(double t) const;
  // Left limit: the value just before t.
  double at_left(double t) const;
  // Exact integral of the step function over [0, t] (closed-form sum over
  // knots, not a quadrature).
  double integral(double t) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  double value_at_zero() const { return value_at_zero_; }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  double value_at_zero_ = 1.0;
};

}  // namespace survcal
