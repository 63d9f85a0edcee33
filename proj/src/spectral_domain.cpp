#include "spectral_domain.hpp"

#include <algorithm>
#include <limits>

#include "xcorr/quadrature.hpp"

namespace xcorr::detail {

FrequencyDomain joint_domain(std::initializer_list<const Kernel*> kernels) {
  double band = std::numeric_limits<double>::infinity();
  double widest = 0.0;
  std::vector<double> extra;
  for (const Kernel* k : kernels) {
    if (auto b = k->band_limit()) band = std::min(band, *b);
    widest = std::max(widest, k->spectral_extent());
    auto bp = k->spectral_breakpoints();
    extra.insert(extra.end(), bp.begin(), bp.end());
  }
  FrequencyDomain d;
  d.extent = std::isfinite(band) ? band : widest;
  d.points = quad::symmetric_partition(d.extent, extra);
  return d;
}

}  // namespace xcorr::detail
