// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include "gridmap/kernels.hpp"

namespace gridmap::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  if (k + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    k += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

void squared_distances(double px, double py, const double* xs, const double* ys, double* out,
                       std::size_t n) {
  const __m256d vx = _mm256_set1_pd(px);
  const __m256d vy = _mm256_set1_pd(py);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + k), vx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + k), vy);
    _mm256_storeu_pd(out + k, _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
  }
  for (; k < n; ++k) {
    const double dx = xs[k] - px;
    const double dy = ys[k] - py;
    out[k] = dx * dx + dy * dy;
  }
}

std::size_t count_witnesses(double ax, double ay, double bx, double by, double limit,
                            const double* xs, const double* ys, std::size_t n) {
  const __m256d vax = _mm256_set1_pd(ax);
  const __m256d vay = _mm256_set1_pd(ay);
  const __m256d vbx = _mm256_set1_pd(bx);
  const __m256d vby = _mm256_set1_pd(by);
  const __m256d vlim = _mm256_set1_pd(limit);
  std::size_t count = 0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d wx = _mm256_loadu_pd(xs + k);
    const __m256d wy = _mm256_loadu_pd(ys + k);
    const __m256d ux = _mm256_sub_pd(wx, vax);
    const __m256d uy = _mm256_sub_pd(wy, vay);
    const __m256d vx = _mm256_sub_pd(wx, vbx);
    const __m256d vy = _mm256_sub_pd(wy, vby);
    const __m256d da = _mm256_add_pd(_mm256_mul_pd(ux, ux), _mm256_mul_pd(uy, uy));
    const __m256d db = _mm256_add_pd(_mm256_mul_pd(vx, vx), _mm256_mul_pd(vy, vy));
    const __m256d hit = _mm256_and_pd(_mm256_cmp_pd(da, vlim, _CMP_LT_OQ),
                                      _mm256_cmp_pd(db, vlim, _CMP_LT_OQ));
    count += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(hit)));
  }
  for (; k < n; ++k) {
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

}  // namespace gridmap::kernels::avx2
