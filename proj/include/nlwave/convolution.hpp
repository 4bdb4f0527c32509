#pragma once

#include <memory>
#include <span>
#include <vector>

#include "nlwave/grid.hpp"
#include "nlwave/kernels.hpp"

namespace nlwave {

enum class ConvolutionMethod { direct, fft };

/// Discrete J*u on a Grid with constant far-field extension.
///
/// Stencil weights are w_k = J(k dx) dx for |k| <= ceil(truncation/dx),
/// rescaled to sum to one so constants are reproduced exactly. The direct
/// path keeps relative accuracy in exponentially small tails; the FFT path
/// has an absolute error floor near machine epsilon times max|u|.
class Convolver {
 public:
  /// Throws GridMismatch when grid.ghost * dx does not cover the kernel.
  Convolver(const DispersalKernel& kernel, const Grid& grid);

  void apply(std::span<const double> field, FarField far_field, std::span<double> out,
             ConvolutionMethod method = ConvolutionMethod::direct) const;
  Samples apply(std::span<const double> field, FarField far_field,
                ConvolutionMethod method = ConvolutionMethod::direct) const;

  const Grid& grid() const { return grid_; }
  /// Weights for offsets -radius..radius.
  std::span<const double> weights() const { return weights_; }
  std::size_t radius() const { return radius_; }

 private:
  void apply_direct(std::span<const double> field, FarField ff, std::span<double> out) const;
  void apply_fft(std::span<const double> field, FarField ff, std::span<double> out) const;

  struct FftPlan;
  Grid grid_;
  std::size_t radius_ = 0;
  std::vector<double> weights_;
  std::shared_ptr<const FftPlan> fft_;
};

/// Free-function form: returns J*u (the caller subtracts u to get N[u]).
Samples convolve(const DispersalKernel& kernel, const Grid& grid, std::span<const double> field,
                 FarField far_field, ConvolutionMethod method = ConvolutionMethod::direct);

}  // namespace nlwave
