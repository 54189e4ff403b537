#include "selcrb/kernels/kernels.hpp"

namespace selcrb::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += a[i] * b[i];
  return s;
}

void affine(const double* mean, double sigma, const double* w, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = mean[i] + sigma * w[i];
}

} // namespace selcrb::kernels::scalar
