#include "xcorr/quadrature.hpp"

namespace xcorr::quad {

std::vector<double> symmetric_partition(double extent, std::span<const double> extra) {
  std::vector<double> pts{-extent, 0.0, extent};
  for (double p = 1.0; p < extent; p *= 2.0) {
    pts.push_back(p);
    pts.push_back(-p);
  }
  for (double e : extra) {
    if (e > -extent && e < extent) pts.push_back(e);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace xcorr::quad
