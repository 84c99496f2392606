#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pmlwave {

using Vec = std::vector<double>;

/// Compressed sparse row matrix. Column indices are sorted within each row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y += alpha * A x
  void multiply_add(double alpha, std::span<const double> x, std::span<double> y) const;
  /// y += alpha * A^T x
  void multiply_transpose_add(double alpha, std::span<const double> x, std::span<double> y) const;

  /// Entry (i, j), zero when outside the pattern.
  double entry(std::size_t i, std::size_t j) const;
  double max_abs() const;
  double sum() const;
  std::vector<double> diagonal() const;
  CsrMatrix transpose() const;
  bool same_pattern(const CsrMatrix& other) const;
  /// max |A - A^T| over all entries.
  double asymmetry() const;
  std::vector<double> to_dense() const;
};

/// this = a * A + b * B; both must share a pattern.
CsrMatrix add_same_pattern(double a, const CsrMatrix& A, double b, const CsrMatrix& B);

/// Element-to-global scatter for a (test space) x (trial space) pattern.
///
/// Built once from the element DOF lists; local matrices are then added in
/// element order straight into the value array, so the summation order is
/// fixed and assembled values are bitwise reproducible.
class SparsityPattern {
 public:
  SparsityPattern(std::size_t rows, std::size_t cols, std::size_t num_elements,
                  std::span<const std::size_t> row_dofs, std::size_t row_per_elem,
                  std::span<const std::size_t> col_dofs, std::size_t col_per_elem);

  CsrMatrix zero_matrix() const;
  /// Add a dense row-major local matrix of element e.
  void add_local(CsrMatrix& A, std::size_t e, std::span<const double> local) const;

  std::size_t row_per_elem() const { return row_per_elem_; }
  std::size_t col_per_elem() const { return col_per_elem_; }

 private:
  std::size_t row_per_elem_;
  std::size_t col_per_elem_;
  CsrMatrix shape_;
  std::vector<std::size_t> scatter_;  // per element, row_per_elem * col_per_elem slots
};

/// Block-diagonal matrix with equal dense square blocks (one per element).
struct BlockDiagonal {
  std::size_t block_size = 0;
  std::vector<double> blocks;  // row-major, block after block

  std::size_t num_blocks() const { return block_size ? blocks.size() / (block_size * block_size) : 0; }
  std::size_t size() const { return num_blocks() * block_size; }
  std::span<double> block(std::size_t b) {
    return {blocks.data() + b * block_size * block_size, block_size * block_size};
  }
  std::span<const double> block(std::size_t b) const {
    return {blocks.data() + b * block_size * block_size, block_size * block_size};
  }

  void multiply(std::span<const double> x, std::span<double> y) const;
  void multiply_add(double alpha, std::span<const double> x, std::span<double> y) const;
  /// Dense inverse of every block (Cholesky; blocks must be SPD).
  BlockDiagonal inverse_spd() const;
  bool is_zero() const;
};

struct CgResult {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for SPD A. x holds the initial
/// guess on entry. Throws NumericalError if `max_iter` is exceeded.
CgResult conjugate_gradient(const CsrMatrix& A, std::span<const double> inv_diag,
                            std::span<const double> b, std::span<double> x, double rel_tol,
                            std::size_t max_iter);

/// MatrixMarket coordinate (real general), 1-based indices.
void write_matrix_market(const CsrMatrix& A, std::ostream& os);
void write_matrix_market(const CsrMatrix& A, const std::string& path);

}  // namespace pmlwave
