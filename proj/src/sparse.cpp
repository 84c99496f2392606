#include "pmlwave/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pmlwave/errors.hpp"

namespace pmlwave {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc += values[k] * x[col_idx[k]];
    y[i] = acc;
  }
}

void CsrMatrix::multiply_add(double alpha, std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc += values[k] * x[col_idx[k]];
    y[i] += alpha * acc;
  }
}

void CsrMatrix::multiply_transpose_add(double alpha, std::span<const double> x,
                                       std::span<double> y) const {
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = alpha * x[i];
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) y[col_idx[k]] += values[k] * xi;
  }
}

double CsrMatrix::entry(std::size_t i, std::size_t j) const {
  const auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values[static_cast<std::size_t>(it - col_idx.begin())];
}

double CsrMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double CsrMatrix::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(std::min(rows, cols), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = entry(i, i);
  return d;
}

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (std::size_t c : col_idx) ++t.row_ptr[c + 1];
  for (std::size_t i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col_idx.resize(nnz());
  t.values.resize(nnz());
  std::vector<std::size_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const std::size_t slot = next[col_idx[k]]++;
      t.col_idx[slot] = i;
      t.values[slot] = values[k];
    }
  return t;
}

bool CsrMatrix::same_pattern(const CsrMatrix& other) const {
  return rows == other.rows && cols == other.cols && row_ptr == other.row_ptr &&
         col_idx == other.col_idx;
}

double CsrMatrix::asymmetry() const {
  if (rows != cols) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      m = std::max(m, std::abs(values[k] - entry(col_idx[k], i)));
  return m;
}

std::vector<double> CsrMatrix::to_dense() const {
  std::vector<double> d(rows * cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) d[i * cols + col_idx[k]] = values[k];
  return d;
}

CsrMatrix add_same_pattern(double a, const CsrMatrix& A, double b, const CsrMatrix& B) {
  if (!A.same_pattern(B)) throw std::invalid_argument("add_same_pattern: pattern mismatch");
  CsrMatrix C = A;
  for (std::size_t k = 0; k < C.values.size(); ++k) C.values[k] = a * A.values[k] + b * B.values[k];
  return C;
}

SparsityPattern::SparsityPattern(std::size_t rows, std::size_t cols, std::size_t num_elements,
                                 std::span<const std::size_t> row_dofs, std::size_t row_per_elem,
                                 std::span<const std::size_t> col_dofs, std::size_t col_per_elem)
    : row_per_elem_(row_per_elem), col_per_elem_(col_per_elem) {
  std::vector<std::vector<std::size_t>> row_cols(rows);
  for (std::size_t e = 0; e < num_elements; ++e)
    for (std::size_t a = 0; a < row_per_elem; ++a) {
      auto& rc = row_cols[row_dofs[e * row_per_elem + a]];
      for (std::size_t b = 0; b < col_per_elem; ++b) rc.push_back(col_dofs[e * col_per_elem + b]);
    }
  shape_.rows = rows;
  shape_.cols = cols;
  shape_.row_ptr.assign(rows + 1, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    auto& rc = row_cols[i];
    std::sort(rc.begin(), rc.end());
    rc.erase(std::unique(rc.begin(), rc.end()), rc.end());
    shape_.row_ptr[i + 1] = shape_.row_ptr[i] + rc.size();
  }
  shape_.col_idx.reserve(shape_.row_ptr[rows]);
  for (auto& rc : row_cols) shape_.col_idx.insert(shape_.col_idx.end(), rc.begin(), rc.end());
  shape_.values.assign(shape_.col_idx.size(), 0.0);

  scatter_.resize(num_elements * row_per_elem * col_per_elem);
  for (std::size_t e = 0; e < num_elements; ++e)
    for (std::size_t a = 0; a < row_per_elem; ++a) {
      const std::size_t r = row_dofs[e * row_per_elem + a];
      const auto first = shape_.col_idx.begin() + static_cast<std::ptrdiff_t>(shape_.row_ptr[r]);
      const auto last = shape_.col_idx.begin() + static_cast<std::ptrdiff_t>(shape_.row_ptr[r + 1]);
      for (std::size_t b = 0; b < col_per_elem; ++b) {
        const auto it = std::lower_bound(first, last, col_dofs[e * col_per_elem + b]);
        scatter_[(e * row_per_elem + a) * col_per_elem + b] =
            static_cast<std::size_t>(it - shape_.col_idx.begin());
      }
    }
}

CsrMatrix SparsityPattern::zero_matrix() const { return shape_; }

void SparsityPattern::add_local(CsrMatrix& A, std::size_t e, std::span<const double> local) const {
  const std::size_t n = row_per_elem_ * col_per_elem_;
  const std::size_t* slots = scatter_.data() + e * n;
  for (std::size_t k = 0; k < n; ++k) A.values[slots[k]] += local[k];
}

void BlockDiagonal::multiply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = block_size;
  for (std::size_t b = 0; b < num_blocks(); ++b) {
    const double* B = blocks.data() + b * n * n;
    const double* xb = x.data() + b * n;
    double* yb = y.data() + b * n;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += B[i * n + j] * xb[j];
      yb[i] = acc;
    }
  }
}

void BlockDiagonal::multiply_add(double alpha, std::span<const double> x,
                                 std::span<double> y) const {
  const std::size_t n = block_size;
  for (std::size_t b = 0; b < num_blocks(); ++b) {
    const double* B = blocks.data() + b * n * n;
    const double* xb = x.data() + b * n;
    double* yb = y.data() + b * n;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += B[i * n + j] * xb[j];
      yb[i] += alpha * acc;
    }
  }
}

BlockDiagonal BlockDiagonal::inverse_spd() const {
  const std::size_t n = block_size;
  BlockDiagonal inv{n, std::vector<double>(blocks.size(), 0.0)};
  std::vector<double> L(n * n);
  for (std::size_t b = 0; b < num_blocks(); ++b) {
    const auto A = block(b);
    std::fill(L.begin(), L.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double d = A[j * n + j];
      for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
      if (!(d > 0.0)) throw NumericalError("BlockDiagonal::inverse_spd: block is not SPD");
      L[j * n + j] = std::sqrt(d);
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = A[i * n + j];
        for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
        L[i * n + j] = s / L[j * n + j];
      }
    }
    auto out = inv.block(b);
    std::vector<double> col(n);
    for (std::size_t c = 0; c < n; ++c) {
      // Solve L L^T x = e_c.
      for (std::size_t i = 0; i < n; ++i) {
        double s = i == c ? 1.0 : 0.0;
        for (std::size_t k = 0; k < i; ++k) s -= L[i * n + k] * col[k];
        col[i] = s / L[i * n + i];
      }
      for (std::size_t ii = n; ii-- > 0;) {
        double s = col[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= L[k * n + ii] * col[k];
        col[ii] = s / L[ii * n + ii];
      }
      for (std::size_t i = 0; i < n; ++i) out[i * n + c] = col[i];
    }
  }
  return inv;
}

bool BlockDiagonal::is_zero() const {
  return std::all_of(blocks.begin(), blocks.end(), [](double v) { return v == 0.0; });
}

CgResult conjugate_gradient(const CsrMatrix& A, std::span<const double> inv_diag,
                            std::span<const double> b, std::span<double> x, double rel_tol,
                            std::size_t max_iter) {
  const std::size_t n = A.rows;
  std::vector<double> r(n), z(n), p(n), q(n);
  double bnorm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) bnorm2 += b[i] * b[i];
  CgResult result;
  if (bnorm2 == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }
  const double bnorm = std::sqrt(bnorm2);

  A.multiply(x, r);
  double rnorm2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = b[i] - r[i];
    rnorm2 += r[i] * r[i];
  }
  if (std::sqrt(rnorm2) <= rel_tol * bnorm) {
    result.relative_residual = std::sqrt(rnorm2) / bnorm;
    result.converged = true;
    return result;
  }
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = inv_diag[i] * r[i];
    p[i] = z[i];
    rz += r[i] * z[i];
  }
  for (std::size_t it = 1; it <= max_iter; ++it) {
    A.multiply(p, q);
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
    const double alpha = rz / pq;
    rnorm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      rnorm2 += r[i] * r[i];
    }
    result.iterations = it;
    result.relative_residual = std::sqrt(rnorm2) / bnorm;
    if (!std::isfinite(result.relative_residual))
      throw NumericalError("conjugate_gradient: non-finite residual");
    if (result.relative_residual <= rel_tol) {
      result.converged = true;
      return result;
    }
    double rz_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = inv_diag[i] * r[i];
      rz_new += r[i] * z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  std::ostringstream msg;
  msg << "conjugate_gradient: no convergence after " << max_iter
      << " iterations, relative residual " << result.relative_residual;
  throw NumericalError(msg.str());
}

void write_matrix_market(const CsrMatrix& A, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows << ' ' << A.cols << ' ' << A.nnz() << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      os << i + 1 << ' ' << A.col_idx[k] + 1 << ' ' << A.values[k] << '\n';
}

void write_matrix_market(const CsrMatrix& A, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_matrix_market(A, os);
}

}  // namespace pmlwave
