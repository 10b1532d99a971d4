// Built with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cstddef>
#include <numbers>

#include "dnp/simd/lineshape_kernels.hpp"

namespace dnp::simd::detail {

namespace {

constexpr std::size_t lanes = 4;

inline __m256d lorentz_recip(__m256d x, __m256d c, __m256d gsq, __m256d& d) {
  d = _mm256_sub_pd(x, c);
  return _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_fmadd_pd(d, d, gsq));
}

void evaluate(std::span<const double> x, const DoubletShape& s, std::span<double> out) {
  const double k1 = s.area_1 * std::numbers::inv_pi * s.hwhm_1;
  const double k2 = s.area_2 * std::numbers::inv_pi * s.hwhm_2;
  const double g1sq = s.hwhm_1 * s.hwhm_1;
  const double g2sq = s.hwhm_2 * s.hwhm_2;
  const __m256d vc1 = _mm256_set1_pd(s.center_1), vc2 = _mm256_set1_pd(s.center_2);
  const __m256d vg1 = _mm256_set1_pd(g1sq), vg2 = _mm256_set1_pd(g2sq);
  const __m256d vk1 = _mm256_set1_pd(k1), vk2 = _mm256_set1_pd(k2);
  const __m256d vb = _mm256_set1_pd(s.baseline);

  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + lanes <= n; i += lanes) {
    const __m256d vx = _mm256_loadu_pd(x.data() + i);
    __m256d d1, d2;
    const __m256d r1 = lorentz_recip(vx, vc1, vg1, d1);
    const __m256d r2 = lorentz_recip(vx, vc2, vg2, d2);
    const __m256d v = _mm256_fmadd_pd(vk2, r2, _mm256_fmadd_pd(vk1, r1, vb));
    _mm256_storeu_pd(out.data() + i, v);
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
  const __m256d vc1 = _mm256_set1_pd(s.center_1), vc2 = _mm256_set1_pd(s.center_2);
  const __m256d vg1 = _mm256_set1_pd(g1sq), vg2 = _mm256_set1_pd(g2sq);
  const __m256d va1 = _mm256_set1_pd(std::numbers::inv_pi * s.hwhm_1);
  const __m256d va2 = _mm256_set1_pd(std::numbers::inv_pi * s.hwhm_2);
  const __m256d vc1k = _mm256_set1_pd(2.0 * k1 * s.hwhm_1);
  const __m256d vc2k = _mm256_set1_pd(2.0 * k2 * s.hwhm_2);
  const __m256d vk1 = _mm256_set1_pd(k1), vk2 = _mm256_set1_pd(k2);
  const __m256d one = _mm256_set1_pd(1.0);

  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + lanes <= n; i += lanes) {
    const __m256d vx = _mm256_loadu_pd(x.data() + i);
    __m256d d1, d2;
    const __m256d r1 = lorentz_recip(vx, vc1, vg1, d1);
    const __m256d r2 = lorentz_recip(vx, vc2, vg2, d2);
    const __m256d r1sq = _mm256_mul_pd(r1, r1);
    const __m256d r2sq = _mm256_mul_pd(r2, r2);
    _mm256_storeu_pd(j.d_area_1.data() + i, _mm256_mul_pd(va1, r1));
    _mm256_storeu_pd(j.d_area_2.data() + i, _mm256_mul_pd(va2, r2));
    _mm256_storeu_pd(j.d_center_1.data() + i, _mm256_mul_pd(_mm256_mul_pd(vc1k, d1), r1sq));
    _mm256_storeu_pd(j.d_center_2.data() + i, _mm256_mul_pd(_mm256_mul_pd(vc2k, d2), r2sq));
    _mm256_storeu_pd(j.d_hwhm_1.data() + i, _mm256_mul_pd(_mm256_mul_pd(vk1, _mm256_fmsub_pd(d1, d1, vg1)), r1sq));
    _mm256_storeu_pd(j.d_hwhm_2.data() + i, _mm256_mul_pd(_mm256_mul_pd(vk2, _mm256_fmsub_pd(d2, d2, vg2)), r2sq));
    _mm256_storeu_pd(j.d_baseline.data() + i, one);
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
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + lanes <= n; i += lanes) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(y.data() + i), _mm256_loadu_pd(model.data() + i));
    _mm256_storeu_pd(r.data() + i, d);
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  alignas(32) double partial[lanes];
  _mm256_store_pd(partial, acc);
  double sum = (partial[0] + partial[1]) + (partial[2] + partial[3]);
  for (; i < n; ++i) {
    r[i] = y[i] - model[i];
    sum += r[i] * r[i];
  }
  return sum;
}

}  // namespace

const LineshapeKernels& avx2_kernels() {
  static constexpr LineshapeKernels table{"avx2", evaluate, jacobian, residual};
  return table;
}

}  // namespace dnp::simd::detail
