#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace nlwave {

using Samples = std::vector<double>;
/// One sample array per component, all on the same grid.
using Field = std::vector<Samples>;

/// Values assumed outside the truncated domain: constants, except that a
/// positive `right_tail_rate` continues the last node's deviation from
/// `right` as e^{-rate * distance}. Fronts moving faster than their minimal
/// speed need that tail; a constant cuts it off.
struct FarField {
  double left = 0.0;
  double right = 0.0;
  double right_tail_rate = 0.0;

  /// Value `distance` beyond the last node, whose value is `last`.
  double right_value(double last, double distance) const {
    return right_tail_rate > 0.0 ? right + (last - right) * std::exp(-right_tail_rate * distance) : right;
  }
};

/// Uniform grid on [-L, L] with an odd node count centred on z = 0.
///
/// `ghost` is the number of nodes a convolution stencil may reach past
/// either end; it must cover the kernel's truncation radius.
struct Grid {
  double half_width = 0.0;
  double dx = 0.0;
  std::size_t n = 0;
  std::size_t ghost = 0;

  /// Builds the grid with ghost = ceil(truncation_radius / dx).
  static Grid make(double half_width, double dx, double truncation_radius);

  std::size_t center() const { return n / 2; }
  double z(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(center())) * dx;
  }
  Samples nodes() const;

  bool operator==(const Grid&) const = default;
};

}  // namespace nlwave
