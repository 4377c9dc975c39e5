#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>

namespace cem {

/// Unnormalized log-probability of a match set, held as fixed-point with six
/// decimal digits. Sums of rule weights are exact, so equal-score ties and
/// the `>=` promotion test never depend on floating-point rounding.
class LogScore {
 public:
  static constexpr std::int64_t kUnitsPerOne = 1'000'000;

  constexpr LogScore() = default;

  static LogScore from_double(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("log-score must be finite");
    return LogScore(std::llround(value * static_cast<double>(kUnitsPerOne)));
  }
  static constexpr LogScore from_units(std::int64_t units) { return LogScore(units); }

  constexpr std::int64_t units() const { return units_; }
  double value() const { return static_cast<double>(units_) / static_cast<double>(kUnitsPerOne); }

  constexpr LogScore& operator+=(LogScore o) {
    units_ += o.units_;
    return *this;
  }
  constexpr LogScore& operator-=(LogScore o) {
    units_ -= o.units_;
    return *this;
  }
  friend constexpr LogScore operator+(LogScore a, LogScore b) { return a += b; }
  friend constexpr LogScore operator-(LogScore a, LogScore b) { return a -= b; }
  friend constexpr LogScore operator-(LogScore a) { return LogScore(-a.units_); }
  friend constexpr auto operator<=>(LogScore, LogScore) = default;

 private:
  constexpr explicit LogScore(std::int64_t units) : units_(units) {}
  std::int64_t units_ = 0;
};

}  // namespace cem
