#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dnp/simd/lineshape_kernels.hpp"
#include "oracles.hpp"

using namespace dnp::simd;

namespace {

std::vector<Backend> vector_backends() {
  std::vector<Backend> out;
  for (auto b : {Backend::avx2, Backend::neon}) {
    if (backend_available(b)) out.push_back(b);
  }
  return out;
}

DoubletShape random_shape(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-0.4, 0.4), g(0.01, 0.2), a(-1.0, 2.0);
  return {c(rng), c(rng), g(rng), g(rng), a(rng), a(rng), a(rng) * 0.1};
}

std::vector<double> grid(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = -0.5 + (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
  return x;
}

void check_close(const std::vector<double>& got, const std::vector<double>& want, double scale) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - want[i]) <= 1e-12 * scale);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return std::max(m, 1e-300);
}

}  // namespace

TEST_CASE("scalar kernel evaluates the two-Lorentzian model") {
  const auto& k = kernels(Backend::scalar);
  const DoubletShape s{-0.1, 0.2, 0.05, 0.08, 1.5, 0.7, 0.01};
  const auto x = grid(33);
  std::vector<double> y(x.size());
  k.evaluate(x, s, y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double l1 = s.area_1 / M_PI * s.hwhm_1 / ((x[i] - s.center_1) * (x[i] - s.center_1) + s.hwhm_1 * s.hwhm_1);
    const double l2 = s.area_2 / M_PI * s.hwhm_2 / ((x[i] - s.center_2) * (x[i] - s.center_2) + s.hwhm_2 * s.hwhm_2);
    CHECK(y[i] == doctest::Approx(s.baseline + l1 + l2).epsilon(1e-14));
  }
}

TEST_CASE("scalar jacobian matches central differences") {
  const auto& k = kernels(Backend::scalar);
  const DoubletShape s{-0.1, 0.2, 0.05, 0.08, 1.5, 0.7, 0.01};
  const auto x = grid(17);
  const std::size_t n = x.size();
  std::vector<double> cols(7 * n);
  JacobianColumns jc{{cols.data(), n},         {cols.data() + n, n},     {cols.data() + 2 * n, n},
                     {cols.data() + 3 * n, n}, {cols.data() + 4 * n, n}, {cols.data() + 5 * n, n},
                     {cols.data() + 6 * n, n}};
  k.jacobian(x, s, jc);
  double DoubletShape::*fields[7] = {&DoubletShape::center_1, &DoubletShape::center_2, &DoubletShape::hwhm_1,
                                     &DoubletShape::hwhm_2,   &DoubletShape::area_1,   &DoubletShape::area_2,
                                     &DoubletShape::baseline};
  for (int f = 0; f < 7; ++f) {
    const double h = 1e-6;
    auto up = s, dn = s;
    up.*fields[f] += h;
    dn.*fields[f] -= h;
    std::vector<double> yu(n), yd(n);
    k.evaluate(x, up, yu);
    k.evaluate(x, dn, yd);
    for (std::size_t i = 0; i < n; ++i) {
      const double fd = (yu[i] - yd[i]) / (2 * h);
      CHECK(cols[f * n + i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("vector backends agree with the scalar reference") {
  std::mt19937_64 rng(11);
  const auto& ref = kernels(Backend::scalar);
  for (auto backend : vector_backends()) {
    const auto& k = kernels(backend);
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 64u, 1023u}) {
      const auto shape = random_shape(rng);
      const auto x = grid(n);
      std::vector<double> a(n), b(n);
      ref.evaluate(x, shape, a);
      k.evaluate(x, shape, b);
      check_close(b, a, max_abs(a));

      std::vector<double> ca(7 * n), cb(7 * n);
      auto cols = [n](std::vector<double>& v) {
        return JacobianColumns{{v.data(), n},         {v.data() + n, n},     {v.data() + 2 * n, n},
                               {v.data() + 3 * n, n}, {v.data() + 4 * n, n}, {v.data() + 5 * n, n},
                               {v.data() + 6 * n, n}};
      };
      ref.jacobian(x, shape, cols(ca));
      k.jacobian(x, shape, cols(cb));
      check_close(cb, ca, max_abs(ca));

      std::vector<double> y(n), ra(n), rb(n);
      std::normal_distribution<double> noise(0.0, 0.1);
      for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + noise(rng);
      const double sa = ref.residual(y, a, ra);
      const double sb = k.residual(y, a, rb);
      check_close(rb, ra, max_abs(ra));
      CHECK(sb == doctest::Approx(sa).epsilon(1e-12));
    }
  }
}

TEST_CASE("dispatch") {
  CHECK(backend_available(Backend::scalar));
  CHECK(kernels(Backend::scalar).name == "scalar");
  const auto& automatic = kernels(Backend::automatic);
  CHECK(!automatic.name.empty());
  for (auto b : {Backend::avx2, Backend::neon}) {
    if (!backend_available(b)) CHECK_THROWS_AS(kernels(b), std::invalid_argument);
  }
}
