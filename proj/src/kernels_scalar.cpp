#include "gridmap/kernels.hpp"

namespace gridmap::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

void squared_distances(double px, double py, const double* xs, const double* ys, double* out,
                       std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = xs[k] - px;
    const double dy = ys[k] - py;
    out[k] = dx * dx + dy * dy;
  }
}

std::size_t count_witnesses(double ax, double ay, double bx, double by, double limit,
                            const double* xs, const double* ys, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ux = xs[k] - ax;
    const double uy = ys[k] - ay;
    const double vx = xs[k] - bx;
    const double vy = ys[k] - by;
    const double da = ux * ux + uy * uy;
    const double db = vx * vx + vy * vy;
    count += (da < limit && db < limit) ? 1 : 0;
  }
  return count;
}

}  // namespace gridmap::kernels::scalar
