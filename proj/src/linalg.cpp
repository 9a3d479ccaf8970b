#include "gridmap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

#include "gridmap/error.hpp"
#include "gridmap/kernels.hpp"

namespace gridmap {

double SymmetricMatrix::max_diagonal() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i) m = std::max(m, a_[i * n_ + i]);
  return m;
}

std::vector<long double> SymmetricMatrix::multiply(std::span<const double> x, double shift) const {
  std::vector<long double> y(n_, 0.0L);
  for (std::size_t i = 0; i < n_; ++i) {
    long double s = static_cast<long double>(shift) * x[i];
    const double* r = a_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j)
      if (r[j] != 0.0) s += static_cast<long double>(r[j]) * x[j];
    y[i] = s;
  }
  return y;
}

CholeskyFactor::CholeskyFactor(const SymmetricMatrix& a, double shift)
    : n_(a.size()), first_(a.size(), 0), l_(a.size() * a.size(), 0.0) {
  for (std::size_t i = 0; i < n_; ++i) {
    const auto r = a.row(i);
    std::size_t f = i;
    for (std::size_t j = 0; j < i; ++j)
      if (r[j] != 0.0) {
        f = j;
        break;
      }
    first_[i] = f;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    double* li = l_.data() + i * n_;
    const auto ai = a.row(i);
    for (std::size_t j = first_[i]; j <= i; ++j) {
      const double* lj = l_.data() + j * n_;
      const std::size_t k0 = std::max(first_[i], first_[j]);
      double s = ai[j] + (i == j ? shift : 0.0);
      if (j > k0) s -= kernels::dot({li + k0, j - k0}, {lj + k0, j - k0});
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s))
          throw NumericalError("Cholesky pivot " + std::to_string(i) +
                               " is not positive (value " + std::to_string(s) + ")");
        li[i] = std::sqrt(s);
      } else {
        li[j] = s / lj[j];
      }
    }
  }
}

std::size_t CholeskyFactor::envelope_size() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += i - first_[i] + 1;
  return s;
}

std::vector<double> CholeskyFactor::solve(std::span<const double> b) const {
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < n_; ++i) {
    const double* li = l_.data() + i * n_;
    const std::size_t f = first_[i];
    double s = x[i];
    if (i > f) s -= kernels::dot({li + f, i - f}, {x.data() + f, i - f});
    x[i] = s / li[i];
  }
  for (std::size_t i = n_; i-- > 0;) {
    const double* li = l_.data() + i * n_;
    x[i] /= li[i];
    const double xi = x[i];
    for (std::size_t k = first_[i]; k < i; ++k) x[k] -= li[k] * xi;
  }
  return x;
}

std::vector<double> refine_solve(const SymmetricMatrix& a, double shift,
                                 const CholeskyFactor& factor, std::span<const double> b,
                                 int max_steps) {
  std::vector<double> x = factor.solve(b);
  std::vector<double> r(b.size());
  double last = std::numeric_limits<double>::infinity();
  for (int step = 0; step < max_steps; ++step) {
    const auto ax = a.multiply(x, shift);
    long double rn = 0.0L;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const long double ri = static_cast<long double>(b[i]) - ax[i];
      r[i] = static_cast<double>(ri);
      rn += ri * ri;
    }
    const double norm_r = static_cast<double>(std::sqrt(rn));
    if (norm_r == 0.0 || !(norm_r < 0.5 * last)) break;
    last = norm_r;
    const auto dx = factor.solve(r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
  }
  return x;
}

std::vector<std::size_t> rcm_order(const std::vector<std::vector<std::size_t>>& adjacency) {
  const std::size_t n = adjacency.size();
  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<bool> seen(n, false);
  auto degree = [&](std::size_t v) { return adjacency[v].size(); };

  auto bfs_last_level = [&](std::size_t root) {
    std::vector<int> level(n, -1);
    std::deque<std::size_t> q{root};
    level[root] = 0;
    std::size_t last = root;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop_front();
      if (level[v] > level[last] || (level[v] == level[last] && degree(v) < degree(last))) last = v;
      for (std::size_t w : adjacency[v])
        if (level[w] < 0) {
          level[w] = level[v] + 1;
          q.push_back(w);
        }
    }
    return last;
  };

  std::vector<std::size_t> by_degree(n);
  std::iota(by_degree.begin(), by_degree.end(), 0);
  std::stable_sort(by_degree.begin(), by_degree.end(),
                   [&](std::size_t a, std::size_t b) { return degree(a) < degree(b); });

  for (std::size_t seed : by_degree) {
    if (seen[seed]) continue;
    // Pseudo-peripheral start: two BFS sweeps.
    const std::size_t start = bfs_last_level(bfs_last_level(seed));
    std::deque<std::size_t> q{start};
    seen[start] = true;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop_front();
      order.push_back(v);
      std::vector<std::size_t> next;
      for (std::size_t w : adjacency[v])
        if (!seen[w]) {
          seen[w] = true;
          next.push_back(w);
        }
      std::stable_sort(next.begin(), next.end(),
                       [&](std::size_t a, std::size_t b) { return degree(a) < degree(b); });
      q.insert(q.end(), next.begin(), next.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace gridmap
