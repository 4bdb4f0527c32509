#pragma once

#include <cmath>
#include <vector>

namespace nlwave {

template <class F>
double romberg(F&& f, double a, double b, double rel_tol, int min_level, int max_level) {
  // The tolerance is relative to \int|f| so integrands with zero mean
  // (odd moments) still terminate.
  std::vector<double> prev, row;
  double h = (b - a) / 2.0;
  const double fa = f(a), fm = f(a + h), fb = f(b);
  double trap = h * (0.5 * fa + fm + 0.5 * fb);
  double trap_abs = h * (0.5 * std::abs(fa) + std::abs(fm) + 0.5 * std::abs(fb));
  prev.push_back(trap);
  std::size_t intervals = 2;
  constexpr std::size_t kMaxColumns = 8;
  for (int level = 1; level <= max_level; ++level) {
    double fresh = 0.0, fresh_abs = 0.0;
    for (std::size_t i = 0; i < intervals; ++i) {
      const double v = f(a + (2.0 * static_cast<double>(i) + 1.0) * h / 2.0);
      fresh += v;
      fresh_abs += std::abs(v);
    }
    h /= 2.0;
    intervals *= 2;
    trap = 0.5 * trap + h * fresh;
    trap_abs = 0.5 * trap_abs + h * fresh_abs;
    row.assign(1, trap);
    double factor = 1.0;
    for (std::size_t k = 1; k <= prev.size() && k < kMaxColumns; ++k) {
      factor *= 4.0;
      row.push_back(row[k - 1] + (row[k - 1] - prev[k - 1]) / (factor - 1.0));
    }
    const double best = row.back();
    const double last = prev.back();
    if (level >= min_level && std::abs(best - last) <= rel_tol * trap_abs) return best;
    prev.swap(row);
  }
  return prev.back();
}

}  // namespace nlwave
