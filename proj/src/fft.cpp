#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace xcorr::fft {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using fftw_buffer = std::unique_ptr<T[], FftwFree>;

template <class T>
fftw_buffer<T> allocate(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
  if (p == nullptr) throw std::bad_alloc();
  return fftw_buffer<T>(p);
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {
    if (plan_ == nullptr) throw std::runtime_error("fftw planning failed");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  fftw_plan get() const { return plan_; }

 private:
  fftw_plan plan_;
};

constexpr std::size_t kDirectTapLimit = 64;

}  // namespace

std::size_t fast_size(std::size_t n) {
  std::size_t best = 1;
  while (best < n) best *= 2;
  for (std::size_t p5 = 1; p5 <= best; p5 *= 5) {
    for (std::size_t p3 = p5; p3 <= best; p3 *= 3) {
      std::size_t m = p3;
      while (m < n) m *= 2;
      best = std::min(best, m);
    }
  }
  return best;
}

std::vector<std::complex<double>> forward_real(std::span<const double> input, std::size_t n) {
  if (input.size() > n) throw std::invalid_argument("fft size smaller than input");
  auto in = allocate<double>(n);
  auto out = allocate<fftw_complex>(n / 2 + 1);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(
        fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  }
  std::fill(in.get(), in.get() + n, 0.0);
  std::copy(input.begin(), input.end(), in.get());
  fftw_execute(plan->get());
  std::vector<std::complex<double>> result(n / 2 + 1);
  for (std::size_t j = 0; j < result.size(); ++j) result[j] = {out[j][0], out[j][1]};
  return result;
}

std::vector<double> filter(std::span<const double> taps, std::span<const double> signal,
                           std::size_t offset, std::size_t count) {
  const std::size_t L = taps.size();
  if (L == 0) return std::vector<double>(count, 0.0);
  if (offset + 1 < L || offset + count > signal.size())
    throw std::invalid_argument("filter window outside signal");
  std::vector<double> out(count, 0.0);
  if (L <= kDirectTapLimit) {
    for (std::size_t j = 0; j < count; ++j) {
      const double* s = signal.data() + j + offset;
      double acc = 0.0;
      for (std::size_t l = 0; l < L; ++l) acc += taps[l] * s[-static_cast<std::ptrdiff_t>(l)];
      out[j] = acc;
    }
    return out;
  }

  // Circular convolution of length n ≥ offset + count; since offset ≥ L − 1
  // none of the requested outputs wrap around.
  const std::size_t n = fast_size(std::max(offset + count, L));
  auto a = allocate<double>(n);
  auto b = allocate<double>(n);
  auto fa = allocate<fftw_complex>(n / 2 + 1);
  auto fb = allocate<fftw_complex>(n / 2 + 1);
  std::unique_ptr<Plan> pa, pb, inv;
  {
    std::lock_guard lock(planner_mutex());
    pa = std::make_unique<Plan>(
        fftw_plan_dft_r2c_1d(static_cast<int>(n), a.get(), fa.get(), FFTW_ESTIMATE));
    pb = std::make_unique<Plan>(
        fftw_plan_dft_r2c_1d(static_cast<int>(n), b.get(), fb.get(), FFTW_ESTIMATE));
    inv = std::make_unique<Plan>(
        fftw_plan_dft_c2r_1d(static_cast<int>(n), fa.get(), a.get(), FFTW_ESTIMATE));
  }
  std::fill(a.get(), a.get() + n, 0.0);
  std::fill(b.get(), b.get() + n, 0.0);
  std::copy(taps.begin(), taps.end(), a.get());
  const std::size_t used = std::min(n, signal.size());
  std::copy(signal.begin(), signal.begin() + static_cast<std::ptrdiff_t>(used), b.get());
  fftw_execute(pa->get());
  fftw_execute(pb->get());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n / 2 + 1; ++j) {
    const double re = fa[j][0] * fb[j][0] - fa[j][1] * fb[j][1];
    const double im = fa[j][0] * fb[j][1] + fa[j][1] * fb[j][0];
    fa[j][0] = re * scale;
    fa[j][1] = im * scale;
  }
  fftw_execute(inv->get());
  for (std::size_t j = 0; j < count; ++j) out[j] = a[j + offset];
  return out;
}

}  // namespace xcorr::fft
