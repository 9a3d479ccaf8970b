#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gridmap {

/// Dense symmetric matrix with full row-major storage.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  /// Adds v to (i, j) and, off the diagonal, to (j, i).
  void add(std::size_t i, std::size_t j, double v) {
    a_[i * n_ + j] += v;
    if (i != j) a_[j * n_ + i] += v;
  }

  std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }
  double max_diagonal() const;
  /// y = (A + shift I) x, accumulated in extended precision.
  std::vector<long double> multiply(std::span<const double> x, double shift = 0.0) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Cholesky factor of A + shift*I restricted to the row envelope of A. Reordering
/// the unknowns beforehand (rcm_order) keeps the envelope narrow.
class CholeskyFactor {
 public:
  /// Throws NumericalError when a pivot is not positive.
  CholeskyFactor(const SymmetricMatrix& a, double shift);

  std::size_t size() const { return n_; }
  std::vector<double> solve(std::span<const double> b) const;
  /// Envelope entries stored (a fill measure).
  std::size_t envelope_size() const;

 private:
  std::size_t n_;
  std::vector<std::size_t> first_;
  std::vector<double> l_;  // row-major lower triangle, full rows
};

/// Solves (A + shift I) x = b with a Cholesky factor and iterative refinement on
/// residuals formed in extended precision.
std::vector<double> refine_solve(const SymmetricMatrix& a, double shift,
                                 const CholeskyFactor& factor, std::span<const double> b,
                                 int max_steps = 3);

/// Reverse Cuthill-McKee ordering of an undirected graph given as sorted adjacency
/// lists. Returns order[k] = vertex placed at position k.
std::vector<std::size_t> rcm_order(const std::vector<std::vector<std::size_t>>& adjacency);

}  // namespace gridmap
