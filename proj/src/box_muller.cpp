#include <cmath>
#include <cstddef>
#include <numbers>

#include "hetpop/stochastics.hpp"

namespace hetpop {

void box_muller(std::span<const double> radius_uniforms,
                std::span<const double> angle_uniforms, std::span<double> out) {
  const double* u = radius_uniforms.data();
  const double* v = angle_uniforms.data();
  double* z = out.data();
  const std::size_t count = out.size();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < count; ++i) {
    z[i] = std::sqrt(-2.0 * std::log(u[i])) * std::cos(two_pi * v[i]);
  }
}

}  // namespace hetpop
