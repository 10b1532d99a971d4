#include <arm_neon.h>

#include <cstddef>
#include <numbers>

#include "dnp/simd/lineshape_kernels.hpp"

namespace dnp::simd::detail {

namespace {

constexpr std::size_t lanes = 2;

inline float64x2_t lorentz_recip(float64x2_t x, float64x2_t c, float64x2_t gsq, float64x2_t& d) {
  d = vsubq_f64(x, c);
  return vdivq_f64(vdupq_n_f64(1.0), vfmaq_f64(gsq, d, d));
}

void evaluate(std::span<const double> x, const DoubletShape& s, std::span<double> out) {
  const double k1 = s.area_1 * std::numbers::inv_pi * s.hwhm_1;
  const double k2 = s.area_2 * std::numbers::inv_pi * s.hwhm_2;
  const double g1sq = s.hwhm_1 * s.hwhm_1;
  const double g2sq = s.hwhm_2 * s.hwhm_2;
  const float64x2_t vc1 = vdupq_n_f64(s.center_1), vc2 = vdupq_n_f64(s.center_2);
  const float64x2_t vg1 = vdupq_n_f64(g1sq), vg2 = vdupq_n_f64(g2sq);
  const float64x2_t vb = vdupq_n_f64(s.baseline);

  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + lanes <= n; i += lanes) {
    const float64x2_t vx = vld1q_f64(x.data() + i);
    float64x2_t d1, d2;
    const float64x2_t r1 = lorentz_recip(vx, vc1, vg1, d1);
    const float64x2_t r2 = lorentz_recip(vx, vc2, vg2, d2);
    vst1q_f64(out.data() + i, vfmaq_n_f64(vfmaq_n_f64(vb, r1, k1), r2, k2));
  }
  for (; i < n; ++i) {
    const double d1 = x[i] - s.center_1;
    const double d2 = x[i] - s.center_2;
    out[i] = s.baseline + k1 / (d1 * d1 + g1sq) + k2 / (d2 * d2 + g2sq);
  }
}

void jacobian(std::span<const double> x, const DoubletShape& s, const JacobianColumns& j) {
  const double k1 = s.area_1 * std::numbers::inv_pi;
  const double k2 = s.area_2 * std::numbers::inv_pi;
  const double g1sq = s.hwhm_1 * s.hwhm_1;
  const double g2sq = s.hwhm_2 * s.hwhm_2;
  const float64x2_t vc1 = vdupq_n_f64(s.center_1), vc2 = vdupq_n_f64(s.center_2);
  const float64x2_t vg1 = vdupq_n_f64(g1sq), vg2 = vdupq_n_f64(g2sq);

  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + lanes <= n; i += lanes) {
    const float64x2_t vx = vld1q_f64(x.data() + i);
    float64x2_t d1, d2;
    const float64x2_t r1 = lorentz_recip(vx, vc1, vg1, d1);
    const float64x2_t r2 = lorentz_recip(vx, vc2, vg2, d2);
    const float64x2_t r1sq = vmulq_f64(r1, r1);
    const float64x2_t r2sq = vmulq_f64(r2, r2);
    vst1q_f64(j.d_area_1.data() + i, vmulq_n_f64(r1, std::numbers::inv_pi * s.hwhm_1));
    vst1q_f64(j.d_area_2.data() + i, vmulq_n_f64(r2, std::numbers::inv_pi * s.hwhm_2));
    vst1q_f64(j.d_center_1.data() + i, vmulq_f64(vmulq_n_f64(d1, 2.0 * k1 * s.hwhm_1), r1sq));
    vst1q_f64(j.d_center_2.data() + i, vmulq_f64(vmulq_n_f64(d2, 2.0 * k2 * s.hwhm_2), r2sq));
    vst1q_f64(j.d_hwhm_1.data() + i, vmulq_f64(vmulq_n_f64(vsubq_f64(vmulq_f64(d1, d1), vg1), k1), r1sq));
    vst1q_f64(j.d_hwhm_2.data() + i, vmulq_f64(vmulq_n_f64(vsubq_f64(vmulq_f64(d2, d2), vg2), k2), r2sq));
    vst1q_f64(j.d_baseline.data() + i, vdupq_n_f64(1.0));
  }
  for (; i < n; ++i) {
    const double d1 = x[i] - s.center_1;
    const double d2 = x[i] - s.center_2;
    const double r1 = 1.0 / (d1 * d1 + g1sq);
    const double r2 = 1.0 / (d2 * d2 + g2sq);
    j.d_area_1[i] = std::numbers::inv_pi * s.hwhm_1 * r1;
    j.d_area_2[i] = std::numbers::inv_pi * s.hwhm_2 * r2;
    j.d_center_1[i] = 2.0 * k1 * s.hwhm_1 * d1 * r1 * r1;
    j.d_center_2[i] = 2.0 * k2 * s.hwhm_2 * d2 * r2 * r2;
    j.d_hwhm_1[i] = k1 * (d1 * d1 - g1sq) * r1 * r1;
    j.d_hwhm_2[i] = k2 * (d2 * d2 - g2sq) * r2 * r2;
    j.d_baseline[i] = 1.0;
  }
}

double residual(std::span<const double> y, std::span<const double> model, std::span<double> r) {
  const std::size_t n = y.size();
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + lanes <= n; i += lanes) {
    const float64x2_t d = vsubq_f64(vld1q_f64(y.data() + i), vld1q_f64(model.data() + i));
    vst1q_f64(r.data() + i, d);
    acc = vfmaq_f64(acc, d, d);
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) {
    r[i] = y[i] - model[i];
    sum += r[i] * r[i];
  }
  return sum;
}

}  // namespace

const LineshapeKernels& neon_kernels() {
  static constexpr LineshapeKernels table{"neon", evaluate, jacobian, residual};
  return table;
}

}  // namespace dnp::simd::detail
