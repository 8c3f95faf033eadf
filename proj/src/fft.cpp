#include "hwlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace hwlab::fft {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new arrays is.
// Plans are built with FFTW_ESTIMATE so that the arithmetic (and hence every output bit)
// does not depend on timing measurements.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int dims[3] = {n, n, n};
    Eigen::Index total = 1;
    for (int d = 0; d < dim; ++d) total *= n;
    fftw_complex* in = fftw_alloc_complex(static_cast<size_t>(total));
    fftw_complex* out = fftw_alloc_complex(static_cast<size_t>(total));
    fftw_plan plan = fftw_plan_dft(dim, dims, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

Eigen::ArrayXcd execute(const Grid& grid, const Eigen::ArrayXcd& in, int sign) {
  fftw_plan plan = cache().get(grid.dim(), grid.points_per_axis(), sign);
  Eigen::ArrayXcd out(in.size());
  // fftw_execute_dft does not write to its input for out-of-place complex transforms.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  fftw_execute_dft(plan, src, reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

Eigen::ArrayXcd forward(const Grid& grid, const Eigen::ArrayXcd& values) {
  return execute(grid, values, FFTW_FORWARD);
}

Eigen::ArrayXcd inverse(const Grid& grid, const Eigen::ArrayXcd& spectrum) {
  Eigen::ArrayXcd out = execute(grid, spectrum, FFTW_BACKWARD);
  out /= static_cast<double>(grid.size());
  return out;
}

}  // namespace hwlab::fft
