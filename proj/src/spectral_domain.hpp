#pragma once

// Integration ranges for frequency-domain integrals involving kernel transforms.

#include <initializer_list>
#include <vector>

#include "xcorr/kernel.hpp"

namespace xcorr::detail {

struct FrequencyDomain {
  double extent = 0.0;          // integrate over [−extent, extent]
  std::vector<double> points;   // sorted partition including the ends
};

/// Range for an integrand that is a product of the given transforms: the
/// tightest band limit if any factor is band-limited, otherwise the widest
/// spectral extent (beyond which every factor's tail is negligible).
FrequencyDomain joint_domain(std::initializer_list<const Kernel*> kernels);

}  // namespace xcorr::detail
