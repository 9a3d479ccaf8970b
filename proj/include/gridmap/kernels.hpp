#pragma once

// Data-parallel inner loops shared by the solver, the relative-neighbour pruning and
// the assignment cost matrix. Each kernel has a scalar reference and an AVX2
// variant; the variant is chosen once at runtime from CPUID and can be pinned with
// GRIDMAP_SIMD=scalar|avx2 or set_isa().
//
// Distance kernels never fuse multiply-adds, so their results are bit-identical
// across variants. dot() sums in a different order per variant and is only equal
// to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace gridmap::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
/// Pins the variant (falls back to scalar when unsupported). Not thread-safe with
/// concurrent kernel calls; meant for tests and start-up.
void set_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);

/// out[k] = (xs[k] - px)^2 + (ys[k] - py)^2
void squared_distances(double px, double py, std::span<const double> xs,
                       std::span<const double> ys, std::span<double> out);

/// Number of k with max(|a - w_k|^2, |b - w_k|^2) < limit, w_k = (xs[k], ys[k]).
std::size_t count_witnesses(double ax, double ay, double bx, double by, double limit,
                            std::span<const double> xs, std::span<const double> ys);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void squared_distances(double px, double py, const double* xs, const double* ys, double* out,
                       std::size_t n);
std::size_t count_witnesses(double ax, double ay, double bx, double by, double limit,
                            const double* xs, const double* ys, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void squared_distances(double px, double py, const double* xs, const double* ys, double* out,
                       std::size_t n);
std::size_t count_witnesses(double ax, double ay, double bx, double by, double limit,
                            const double* xs, const double* ys, std::size_t n);
}  // namespace avx2

}  // namespace gridmap::kernels
