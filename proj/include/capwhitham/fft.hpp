#pragma once

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

namespace capwhitham::fft {

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
using Buffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline Buffer allocate(std::size_t n) {
  return Buffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

// FFTW's planner is not thread-safe; execution with fresh arrays is. Plans
// are created once per size under a lock and reused for the process lifetime.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    Buffer in = allocate(n);
    Buffer out = allocate(n);
    fftw_plan plan = fftw_plan_dft_1d(n, in.get(), out.get(), sign, FFTW_ESTIMATE);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

inline std::vector<std::complex<double>> run(std::span<const std::complex<double>> data, int sign) {
  const auto n = data.size();
  Buffer in = allocate(n);
  Buffer out = allocate(n);
  std::memcpy(in.get(), data.data(), sizeof(fftw_complex) * n);
  fftw_execute_dft(PlanCache::instance().get(static_cast<int>(n), sign), in.get(), out.get());
  const auto* first = reinterpret_cast<const std::complex<double>*>(out.get());
  std::vector<std::complex<double>> result(first, first + n);
  return result;
}

}  // namespace detail

/// Unnormalised DFT: X_j = sum_n x_n exp(-2 pi i j n / N).
inline std::vector<std::complex<double>> forward(std::span<const std::complex<double>> data) {
  return detail::run(data, FFTW_FORWARD);
}

/// Unnormalised inverse DFT: x_n = sum_j X_j exp(+2 pi i j n / N).
inline std::vector<std::complex<double>> backward(std::span<const std::complex<double>> data) {
  return detail::run(data, FFTW_BACKWARD);
}

}  // namespace capwhitham::fft
