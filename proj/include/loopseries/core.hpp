#pragma once

// Shared vocabulary for binary pairwise models: state encoding, small fixed
// size tables, the error hierarchy and a compensated accumulator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace loopseries {

/// Index 0 encodes the spin x = +1, index 1 encodes x = -1.
using Vec2 = std::array<double, 2>;
/// Pairwise table indexed [x_a][x_b] with the same encoding as Vec2.
using Table2 = std::array<std::array<double, 2>, 2>;

using NodeId = int;

constexpr int spin(int index) { return index == 0 ? 1 : -1; }
constexpr int flip(int index) { return 1 - index; }

inline Table2 transpose(const Table2& t) {
  return {{{t[0][0], t[1][0]}, {t[0][1], t[1][1]}}};
}

inline constexpr Table2 kIdentityTable{{{1.0, 0.0}, {0.0, 1.0}}};

// Errors. The CLI maps InputError -> 1, NotConverged -> 2,
// IdentityViolation -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public InputError {
 public:
  using InputError::InputError;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class IdentityViolation : public Error {
 public:
  using Error::Error;
};

/// Neumaier summation; order-sensitive only at the level of the final rounding.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double relative_error(double value, double reference) {
  const double scale = std::max(std::abs(reference), std::numeric_limits<double>::min());
  return std::abs(value - reference) / scale;
}

inline double sup_norm(const Vec2& v) { return std::max(std::abs(v[0]), std::abs(v[1])); }

}  // namespace loopseries
