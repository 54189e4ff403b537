#include "selcrb/kernels/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace selcrb::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i)
    s += a[i] * b[i];
  return s;
}

void affine(const double* mean, double sigma, const double* w, double* out, std::size_t n) {
  const float64x2_t s = vdupq_n_f64(sigma);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(mean + i), s, vld1q_f64(w + i)));
  for (; i < n; ++i)
    out[i] = mean[i] + sigma * w[i];
}

} // namespace selcrb::kernels::neon

#endif
