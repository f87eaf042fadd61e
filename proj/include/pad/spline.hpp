#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pad/tensor.hpp"

namespace pad {

// A block of timestamped multivariate observations.
struct TimeSeriesWindow {
  std::vector<double> times;        // strictly increasing
  Tensor values;                    // n_obs x n_channels
  std::vector<bool> anomaly_flags;  // per observation; empty when unlabeled
  std::size_t window_index = 0;

  std::size_t n_obs() const noexcept { return times.size(); }
  std::size_t n_channels() const noexcept { return values.cols(); }
  bool labeled() const noexcept { return !anomaly_flags.empty(); }
  // 1 when any observation is flagged.
  int label() const noexcept;
};

// Throws InputError unless the window has >= 2 observations, strictly
// increasing times, and consistent value/flag lengths.
void validate_window(const TimeSeriesWindow& window);

// Piecewise cubic X(t) per channel. On [t_k, t_{k+1}] with s = t - t_k:
//   X(t) = a + b s + c s^2 + d s^3
class CubicSplinePath {
 public:
  CubicSplinePath() = default;

  std::size_t n_channels() const noexcept { return n_channels_; }
  std::size_t n_knots() const noexcept { return knots_.size(); }
  std::span<const double> knots() const noexcept { return knots_; }
  double t_first() const noexcept { return knots_.front(); }
  double t_last() const noexcept { return knots_.back(); }

  // Index k of the interval [t_k, t_{k+1}] holding t. Throws DomainError outside the domain.
  std::size_t interval(double t) const;

  void eval(double t, std::span<double> out) const;
  void eval_derivative(double t, std::span<double> out) const;
  void eval_second_derivative(double t, std::span<double> out) const;

  std::vector<double> eval(double t) const;
  std::vector<double> eval_derivative(double t) const;
  std::vector<double> eval_second_derivative(double t) const;

  // First derivative evaluated with the cubic of a given interval (one-sided at its ends).
  std::vector<double> derivative_from_interval(double t, std::size_t interval) const;

 private:
  friend CubicSplinePath fit_natural_cubic_spline(std::span<const double>, const Tensor&);

  struct Coeffs {
    double a, b, c, d;
  };
  const Coeffs& coeff(std::size_t interval, std::size_t channel) const {
    return coeffs_[interval * n_channels_ + channel];
  }

  std::vector<double> knots_;
  std::vector<Coeffs> coeffs_;  // (n_knots - 1) x n_channels
  std::size_t n_channels_ = 0;
};

// Natural cubic spline through every observation, channels fitted independently.
// Two knots give the linear interpolant.
CubicSplinePath fit_natural_cubic_spline(const TimeSeriesWindow& window);
CubicSplinePath fit_natural_cubic_spline(std::span<const double> times, const Tensor& values);

}  // namespace pad
