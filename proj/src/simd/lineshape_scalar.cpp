#include <cstddef>
#include <numbers>

#include "dnp/simd/lineshape_kernels.hpp"

namespace dnp::simd::detail {

namespace {

void evaluate(std::span<const double> x, const DoubletShape& s, std::span<double> out) {
  const double k1 = s.area_1 * std::numbers::inv_pi * s.hwhm_1;
  const double k2 = s.area_2 * std::numbers::inv_pi * s.hwhm_2;
  const double g1sq = s.hwhm_1 * s.hwhm_1;
  const double g2sq = s.hwhm_2 * s.hwhm_2;
  for (std::size_t i = 0; i < x.size(); ++i) {
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
  for (std::size_t i = 0; i < x.size(); ++i) {
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
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    r[i] = y[i] - model[i];
    sum += r[i] * r[i];
  }
  return sum;
}

}  // namespace

const LineshapeKernels& scalar_kernels() {
  static constexpr LineshapeKernels table{"scalar", evaluate, jacobian, residual};
  return table;
}

}  // namespace dnp::simd::detail
