#include "pad/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pad/errors.hpp"

namespace pad {

int TimeSeriesWindow::label() const noexcept {
  return std::any_of(anomaly_flags.begin(), anomaly_flags.end(), [](bool f) { return f; }) ? 1
                                                                                           : 0;
}

namespace {

void validate_knots(std::span<const double> times, const Tensor& values) {
  if (times.size() < 2) {
    throw InputError("spline needs at least 2 observations, got " + std::to_string(times.size()));
  }
  if (values.rows() != times.size()) {
    throw InputError("value rows (" + std::to_string(values.rows()) + ") != timestamps (" +
                     std::to_string(times.size()) + ")");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InputError("timestamps must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

}  // namespace

void validate_window(const TimeSeriesWindow& window) {
  validate_knots(window.times, window.values);
  if (!window.anomaly_flags.empty() && window.anomaly_flags.size() != window.n_obs()) {
    throw InputError("anomaly flag count does not match observations");
  }
}

CubicSplinePath fit_natural_cubic_spline(const TimeSeriesWindow& window) {
  validate_window(window);
  return fit_natural_cubic_spline(window.times, window.values);
}

CubicSplinePath fit_natural_cubic_spline(std::span<const double> times, const Tensor& values) {
  validate_knots(times, values);
  const std::size_t n = times.size();
  const std::size_t channels = values.cols();

  CubicSplinePath path;
  path.knots_.assign(times.begin(), times.end());
  path.n_channels_ = channels;
  path.coeffs_.resize((n - 1) * channels);

  std::vector<double> h(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) h[k] = times[k + 1] - times[k];

  // Moments M_k = X''(t_k); natural boundary M_0 = M_{n-1} = 0. The interior
  // system is tridiagonal and identical for every channel, so the Thomas
  // forward sweep is factored once.
  const std::size_t m = n - 2;
  std::vector<double> diag(m), upper(m), lower(m), cprime(m), denom(m);
  for (std::size_t i = 0; i < m; ++i) {
    lower[i] = h[i];
    diag[i] = 2.0 * (h[i] + h[i + 1]);
    upper[i] = h[i + 1];
  }
  for (std::size_t i = 0; i < m; ++i) {
    denom[i] = diag[i] - (i ? lower[i] * cprime[i - 1] : 0.0);
    cprime[i] = upper[i] / denom[i];
  }

  std::vector<double> moments(n), rhs(m), dprime(m);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    for (std::size_t i = 0; i < m; ++i) {
      const double y0 = values(i, ch), y1 = values(i + 1, ch), y2 = values(i + 2, ch);
      rhs[i] = 6.0 * ((y2 - y1) / h[i + 1] - (y1 - y0) / h[i]);
    }
    for (std::size_t i = 0; i < m; ++i) {
      dprime[i] = (rhs[i] - (i ? lower[i] * dprime[i - 1] : 0.0)) / denom[i];
    }
    moments.assign(n, 0.0);
    for (std::size_t i = m; i-- > 0;) {
      moments[i + 1] = dprime[i] - (i + 1 < m ? cprime[i] * moments[i + 2] : 0.0);
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double y0 = values(k, ch), y1 = values(k + 1, ch);
      const double m0 = moments[k], m1 = moments[k + 1];
      auto& c = path.coeffs_[k * channels + ch];
      c.a = y0;
      c.b = (y1 - y0) / h[k] - h[k] * (2.0 * m0 + m1) / 6.0;
      c.c = 0.5 * m0;
      c.d = (m1 - m0) / (6.0 * h[k]);
    }
  }
  return path;
}

std::size_t CubicSplinePath::interval(double t) const {
  if (knots_.size() < 2) throw DomainError("evaluating an empty spline");
  if (!(t >= knots_.front() && t <= knots_.back())) {
    throw DomainError("t=" + std::to_string(t) + " outside spline domain [" +
                      std::to_string(knots_.front()) + ", " + std::to_string(knots_.back()) + "]");
  }
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const std::size_t idx = static_cast<std::size_t>(it - knots_.begin());
  return std::min(idx == 0 ? 0 : idx - 1, knots_.size() - 2);
}

void CubicSplinePath::eval(double t, std::span<double> out) const {
  const std::size_t k = interval(t);
  const double s = t - knots_[k];
  for (std::size_t ch = 0; ch < n_channels_; ++ch) {
    const auto& c = coeff(k, ch);
    out[ch] = c.a + s * (c.b + s * (c.c + s * c.d));
  }
}

void CubicSplinePath::eval_derivative(double t, std::span<double> out) const {
  const std::size_t k = interval(t);
  const double s = t - knots_[k];
  for (std::size_t ch = 0; ch < n_channels_; ++ch) {
    const auto& c = coeff(k, ch);
    out[ch] = c.b + s * (2.0 * c.c + 3.0 * s * c.d);
  }
}

void CubicSplinePath::eval_second_derivative(double t, std::span<double> out) const {
  const std::size_t k = interval(t);
  const double s = t - knots_[k];
  for (std::size_t ch = 0; ch < n_channels_; ++ch) {
    const auto& c = coeff(k, ch);
    out[ch] = 2.0 * c.c + 6.0 * s * c.d;
  }
}

std::vector<double> CubicSplinePath::eval(double t) const {
  std::vector<double> out(n_channels_);
  eval(t, out);
  return out;
}

std::vector<double> CubicSplinePath::eval_derivative(double t) const {
  std::vector<double> out(n_channels_);
  eval_derivative(t, out);
  return out;
}

std::vector<double> CubicSplinePath::eval_second_derivative(double t) const {
  std::vector<double> out(n_channels_);
  eval_second_derivative(t, out);
  return out;
}

std::vector<double> CubicSplinePath::derivative_from_interval(double t, std::size_t k) const {
  if (k + 1 >= knots_.size()) throw DomainError("interval index out of range");
  const double s = t - knots_[k];
  std::vector<double> out(n_channels_);
  for (std::size_t ch = 0; ch < n_channels_; ++ch) {
    const auto& c = coeff(k, ch);
    out[ch] = c.b + s * (2.0 * c.c + 3.0 * s * c.d);
  }
  return out;
}

}  // namespace pad
