#include "nlwave/grid.hpp"

#include <cmath>
#include <string>

#include "nlwave/errors.hpp"

namespace nlwave {

Grid Grid::make(double half_width, double dx, double truncation_radius) {
  if (!(dx > 0.0) || !(half_width > 0.0) || !std::isfinite(half_width))
    throw DomainError("grid needs L > 0 and dx > 0, got L=" + std::to_string(half_width) +
                      " dx=" + std::to_string(dx));
  if (!(truncation_radius >= 0.0) || !std::isfinite(truncation_radius))
    throw DomainError("grid needs a finite truncation radius");
  Grid g;
  g.dx = dx;
  const auto half = static_cast<std::size_t>(std::llround(half_width / dx));
  if (half < 2) throw DomainError("grid has fewer than five nodes");
  g.n = 2 * half + 1;
  g.half_width = static_cast<double>(half) * dx;
  // Guard against ceil(8.000000001) style round-up from representation error.
  g.ghost = static_cast<std::size_t>(std::ceil(truncation_radius / dx - 1e-9));
  return g;
}

Samples Grid::nodes() const {
  Samples out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = z(j);
  return out;
}

}  // namespace nlwave
