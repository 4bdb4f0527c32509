#include "nlwave/convolution.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <string>

#include "nlwave/errors.hpp"

namespace nlwave {

namespace {

// FFTW's planner is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

}  // namespace

struct Convolver::FftPlan {
  std::size_t size = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<std::complex<double>> kernel_hat;

  ~FftPlan() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

Convolver::Convolver(const DispersalKernel& kernel, const Grid& grid) : grid_(grid) {
  const double reach = kernel.truncation_radius();
  radius_ = static_cast<std::size_t>(std::ceil(reach / grid.dx - 1e-9));
  if (static_cast<double>(grid.ghost) * grid.dx < reach - 1e-9 * grid.dx)
    throw GridMismatch("ghost width " + std::to_string(grid.ghost) + " x dx=" + std::to_string(grid.dx) +
                       " does not cover truncation radius " + std::to_string(reach));
  weights_.resize(2 * radius_ + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i <= radius_; ++i) {
    const double w = kernel(static_cast<double>(i) * grid.dx) * grid.dx;
    weights_[radius_ + i] = w;
    weights_[radius_ - i] = w;
  }
  // Sum outward-in so the symmetric pairs accumulate identically.
  for (std::size_t i = radius_; i > 0; --i) sum += 2.0 * weights_[radius_ + i];
  sum += weights_[radius_];
  if (!(sum > 0.0)) throw GridMismatch("kernel is unresolved on this grid (dx too coarse)");
  for (double& w : weights_) w /= sum;

  auto plan = std::make_shared<FftPlan>();
  plan->size = next_pow2(grid.n + 4 * radius_ + 1);
  const std::size_t N = plan->size;
  auto real_buf = fftw_buffer<double>(N);
  auto spec_buf = fftw_buffer<fftw_complex>(N / 2 + 1);
  {
    std::lock_guard lock(planner_mutex());
    plan->forward = fftw_plan_dft_r2c_1d(static_cast<int>(N), real_buf.get(), spec_buf.get(), FFTW_ESTIMATE);
    plan->backward = fftw_plan_dft_c2r_1d(static_cast<int>(N), spec_buf.get(), real_buf.get(), FFTW_ESTIMATE);
  }
  // Kernel placed with its centre at index 0 (negative offsets wrap).
  std::fill(real_buf.get(), real_buf.get() + N, 0.0);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const auto offset = static_cast<long>(i) - static_cast<long>(radius_);
    real_buf[static_cast<std::size_t>((offset + static_cast<long>(N)) % static_cast<long>(N))] = weights_[i];
  }
  fftw_execute_dft_r2c(plan->forward, real_buf.get(), spec_buf.get());
  plan->kernel_hat.resize(N / 2 + 1);
  for (std::size_t i = 0; i < N / 2 + 1; ++i) plan->kernel_hat[i] = {spec_buf[i][0], spec_buf[i][1]};
  fft_ = std::move(plan);
}

void Convolver::apply(std::span<const double> field, FarField far_field, std::span<double> out,
                      ConvolutionMethod method) const {
  if (field.size() != grid_.n || out.size() != grid_.n)
    throw GridMismatch("field size " + std::to_string(field.size()) + " does not match grid size " +
                       std::to_string(grid_.n));
  if (method == ConvolutionMethod::fft)
    apply_fft(field, far_field, out);
  else
    apply_direct(field, far_field, out);
}

Samples Convolver::apply(std::span<const double> field, FarField far_field, ConvolutionMethod method) const {
  Samples out(grid_.n);
  apply(field, far_field, out, method);
  return out;
}

void Convolver::apply_direct(std::span<const double> field, FarField ff, std::span<double> out) const {
  const std::size_t n = grid_.n;
  const std::size_t r = radius_;
  const double* w = weights_.data() + r;  // w[-r..r]
  // Padded copy keeps the inner loop branch-free.
  thread_local std::vector<double> padded;
  padded.resize(n + 2 * r);
  std::fill(padded.begin(), padded.begin() + static_cast<long>(r), ff.left);
  std::copy(field.begin(), field.end(), padded.begin() + static_cast<long>(r));
  for (std::size_t k = 1; k <= r; ++k)
    padded[r + n - 1 + k] = ff.right_value(field[n - 1], static_cast<double>(k) * grid_.dx);
  const double* p = padded.data() + r;
  for (std::size_t j = 0; j < n; ++j) {
    const double* c = p + j;
    double acc = w[0] * c[0];
    for (std::size_t k = 1; k <= r; ++k) acc += w[k] * (c[k] + c[-static_cast<long>(k)]);
    out[j] = acc;
  }
}

void Convolver::apply_fft(std::span<const double> field, FarField ff, std::span<double> out) const {
  const std::size_t N = fft_->size;
  const std::size_t n = grid_.n;
  const std::size_t r = radius_;
  auto real_buf = fftw_buffer<double>(N);
  auto spec_buf = fftw_buffer<fftw_complex>(N / 2 + 1);
  // Extended signal: r nodes of left far field, the field, r nodes of right far field.
  std::fill(real_buf.get(), real_buf.get() + N, 0.0);
  for (std::size_t i = 0; i < r; ++i) real_buf[i] = ff.left;
  for (std::size_t i = 0; i < n; ++i) real_buf[r + i] = field[i];
  for (std::size_t i = 0; i < r; ++i)
    real_buf[r + n + i] = ff.right_value(field[n - 1], static_cast<double>(i + 1) * grid_.dx);
  fftw_execute_dft_r2c(fft_->forward, real_buf.get(), spec_buf.get());
  for (std::size_t i = 0; i < N / 2 + 1; ++i) {
    const std::complex<double> v{spec_buf[i][0], spec_buf[i][1]};
    const auto prod = v * fft_->kernel_hat[i];
    spec_buf[i][0] = prod.real();
    spec_buf[i][1] = prod.imag();
  }
  fftw_execute_dft_c2r(fft_->backward, spec_buf.get(), real_buf.get());
  const double scale = 1.0 / static_cast<double>(N);
  for (std::size_t j = 0; j < n; ++j) out[j] = real_buf[r + j] * scale;
}

Samples convolve(const DispersalKernel& kernel, const Grid& grid, std::span<const double> field,
                 FarField far_field, ConvolutionMethod method) {
  return Convolver(kernel, grid).apply(field, far_field, method);
}

}  // namespace nlwave
