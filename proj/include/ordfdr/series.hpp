#pragma once

// Input containers shared by every stopping rule: ordered p-values with
// optional ground truth, and ordered nonnegative test statistics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ordfdr {

/// Error raised for invalid inputs anywhere in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Label : unsigned char { null, nonnull };

inline std::string_view to_string(Label l) {
  return l == Label::null ? "null" : "nonnull";
}

inline Label parse_label(std::string_view s) {
  if (s == "null") return Label::null;
  if (s == "nonnull") return Label::nonnull;
  throw Error("unknown label '" + std::string(s) + "' (expected null or nonnull)");
}

using Labels = std::vector<Label>;

inline constexpr double kDefaultClampEpsilon = 1e-15;

/// Ordered p-values H_1..H_m. Construction validates the [0,1] range;
/// clamp() moves them into [eps, 1-eps] so every logarithm stays finite.
class PValueSeries {
 public:
  PValueSeries() = default;

  explicit PValueSeries(std::vector<double> values,
                        std::optional<Labels> labels = std::nullopt,
                        double clamp_epsilon = kDefaultClampEpsilon)
      : values_(std::move(values)), labels_(std::move(labels)), eps_(clamp_epsilon) {
    if (!(eps_ >= 0.0 && eps_ < 0.5)) throw Error("clamp epsilon must lie in [0, 0.5)");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double p = values_[i];
      if (!(p >= 0.0 && p <= 1.0))
        throw Error("p-value at index " + std::to_string(i + 1) + " outside [0,1]");
    }
    if (labels_ && labels_->size() != values_.size())
      throw Error("labels length does not match number of p-values");
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::optional<Labels>& labels() const noexcept { return labels_; }
  double clamp_epsilon() const noexcept { return eps_; }
  bool clamped() const noexcept { return clamped_; }

 private:
  friend PValueSeries clamp(PValueSeries series);

  std::vector<double> values_;
  std::optional<Labels> labels_;
  double eps_ = kDefaultClampEpsilon;
  bool clamped_ = false;
};

inline PValueSeries clamp(PValueSeries series) {
  const double lo = series.eps_;
  const double hi = 1.0 - series.eps_;
  for (double& p : series.values_) p = std::min(std::max(p, lo), hi);
  series.clamped_ = true;
  return series;
}

/// Ordered test statistics T_1..T_m >= 0.
class StatSeries {
 public:
  StatSeries() = default;

  explicit StatSeries(std::vector<double> values, std::optional<Labels> labels = std::nullopt)
      : values_(std::move(values)), labels_(std::move(labels)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double t = values_[i];
      if (!(std::isfinite(t) && t >= 0.0))
        throw Error("statistic at index " + std::to_string(i + 1) +
                    " must be finite and nonnegative");
    }
    if (labels_ && labels_->size() != values_.size())
      throw Error("labels length does not match number of statistics");
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::optional<Labels>& labels() const noexcept { return labels_; }

 private:
  std::vector<double> values_;
  std::optional<Labels> labels_;
};

}  // namespace ordfdr
