#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "gridmap/kernels.hpp"

namespace gridmap::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("GRIDMAP_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::avx2;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operand length mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  current().store(isa_supported(isa) ? isa : Isa::scalar, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  if (active_isa() == Isa::avx2) return avx2::dot(a.data(), b.data(), a.size());
  return scalar::dot(a.data(), b.data(), a.size());
}

void squared_distances(double px, double py, std::span<const double> xs,
                       std::span<const double> ys, std::span<double> out) {
  check_sizes(xs.size(), ys.size());
  check_sizes(xs.size(), out.size());
  if (active_isa() == Isa::avx2)
    avx2::squared_distances(px, py, xs.data(), ys.data(), out.data(), xs.size());
  else
    scalar::squared_distances(px, py, xs.data(), ys.data(), out.data(), xs.size());
}

std::size_t count_witnesses(double ax, double ay, double bx, double by, double limit,
                            std::span<const double> xs, std::span<const double> ys) {
  check_sizes(xs.size(), ys.size());
  if (active_isa() == Isa::avx2)
    return avx2::count_witnesses(ax, ay, bx, by, limit, xs.data(), ys.data(), xs.size());
  return scalar::count_witnesses(ax, ay, bx, by, limit, xs.data(), ys.data(), xs.size());
}

}  // namespace gridmap::kernels
