#pragma once

// Inner loops of spectrum synthesis and doublet fitting.
//
// Each backend evaluates the same two-Lorentzian model
//
//   f(x) = b + sum_k (a_k / pi) g_k / ((x - c_k)^2 + g_k^2)
//
// (a_k area, c_k center, g_k half width at half maximum) over a sample grid.
// The scalar backend is the reference; vector backends must agree with it to
// rounding (FMA contraction is allowed).

#include <span>
#include <string_view>

namespace dnp::simd {

enum class Backend { automatic, scalar, avx2, neon };

struct DoubletShape {
  double center_1 = 0.0;
  double center_2 = 0.0;
  double hwhm_1 = 1.0;
  double hwhm_2 = 1.0;
  double area_1 = 0.0;
  double area_2 = 0.0;
  double baseline = 0.0;
};

/// Partial derivatives of f with respect to each DoubletShape field, one column per field.
struct JacobianColumns {
  std::span<double> d_center_1, d_center_2, d_hwhm_1, d_hwhm_2, d_area_1, d_area_2, d_baseline;
};

struct LineshapeKernels {
  std::string_view name;
  /// out[i] = f(x[i]); out.size() == x.size().
  void (*evaluate)(std::span<const double> x, const DoubletShape& shape, std::span<double> out);
  void (*jacobian)(std::span<const double> x, const DoubletShape& shape, const JacobianColumns& cols);
  /// residual[i] = y[i] - model[i]; returns the sum of squared residuals.
  double (*residual)(std::span<const double> y, std::span<const double> model, std::span<double> residual);
};

bool backend_available(Backend backend);

/// Kernel table for `backend`; `automatic` picks the widest backend the CPU
/// supports. Throws std::invalid_argument for an unavailable backend.
const LineshapeKernels& kernels(Backend backend = Backend::automatic);

std::string_view to_string(Backend backend);

namespace detail {
const LineshapeKernels& scalar_kernels();
#if defined(DNP_HAVE_AVX2_KERNELS)
const LineshapeKernels& avx2_kernels();
#endif
#if defined(DNP_HAVE_NEON_KERNELS)
const LineshapeKernels& neon_kernels();
#endif
}  // namespace detail

}  // namespace dnp::simd
