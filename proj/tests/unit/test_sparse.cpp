#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "pmlwave/errors.hpp"
#include "pmlwave/sparse.hpp"

using namespace pmlwave;

namespace {

// 1D chain of two-node "elements": a tridiagonal pattern.
SparsityPattern chain(std::size_t n) {
  std::vector<std::size_t> dofs;
  for (std::size_t e = 0; e + 1 < n; ++e) {
    dofs.push_back(e);
    dofs.push_back(e + 1);
  }
  return SparsityPattern(n, n, n - 1, dofs, 2, dofs, 2);
}

CsrMatrix laplacian(std::size_t n) {
  const auto pat = chain(n);
  CsrMatrix A = pat.zero_matrix();
  const std::vector<double> local{1.0, -1.0, -1.0, 1.0};
  for (std::size_t e = 0; e + 1 < n; ++e) pat.add_local(A, e, local);
  // Shift to make it SPD.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      if (A.col_idx[k] == i) A.values[k] += 0.5;
  return A;
}

}  // namespace

TEST_CASE("pattern assembly") {
  const CsrMatrix A = laplacian(5);
  CHECK(A.rows == 5);
  CHECK(A.nnz() == 13);
  CHECK(A.entry(0, 0) == doctest::Approx(1.5));
  CHECK(A.entry(2, 2) == doctest::Approx(2.5));
  CHECK(A.entry(1, 2) == doctest::Approx(-1.0));
  CHECK(A.entry(0, 4) == 0.0);
  CHECK(A.asymmetry() == 0.0);
  CHECK(A.sum() == doctest::Approx(2.5));
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = A.row_ptr[i] + 1; k < A.row_ptr[i + 1]; ++k)
      CHECK(A.col_idx[k - 1] < A.col_idx[k]);
}

TEST_CASE("matrix-vector products") {
  const CsrMatrix A = laplacian(6);
  const auto D = A.to_dense();
  std::vector<double> x{1, -2, 3, 0.5, -1, 2}, y(6), z(6, 1.0);
  A.multiply(x, y);
  for (std::size_t i = 0; i < 6; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 6; ++j) s += D[i * 6 + j] * x[j];
    CHECK(y[i] == doctest::Approx(s));
  }
  A.multiply_add(2.0, x, z);
  for (std::size_t i = 0; i < 6; ++i) CHECK(z[i] == doctest::Approx(1.0 + 2.0 * y[i]));
  std::vector<double> w(6, 0.0);
  A.multiply_transpose_add(1.0, x, w);
  for (std::size_t i = 0; i < 6; ++i) CHECK(w[i] == doctest::Approx(y[i]));
  const CsrMatrix T = A.transpose();
  CHECK(T.same_pattern(A));
  const CsrMatrix S = add_same_pattern(2.0, A, -1.0, T);
  for (std::size_t k = 0; k < S.nnz(); ++k) CHECK(S.values[k] == doctest::Approx(A.values[k]));
}

TEST_CASE("conjugate gradient") {
  const CsrMatrix A = laplacian(30);
  auto inv = A.diagonal();
  for (double& d : inv) d = 1.0 / d;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  std::vector<double> xs(30), b(30), x(30, 0.0), r(30);
  for (double& v : xs) v = N(rng);
  A.multiply(xs, b);
  const CgResult res = conjugate_gradient(A, inv, b, x, 1e-13, 500);
  CHECK(res.converged);
  for (std::size_t i = 0; i < 30; ++i) CHECK(x[i] == doctest::Approx(xs[i]).epsilon(1e-10));
  // Warm start at the solution converges immediately.
  const CgResult again = conjugate_gradient(A, inv, b, x, 1e-10, 500);
  CHECK(again.iterations <= 1);
  std::vector<double> y(30, 0.0);
  CHECK_THROWS_AS(conjugate_gradient(A, inv, b, y, 1e-15, 1), NumericalError);
}

TEST_CASE("block diagonal") {
  BlockDiagonal B{2, {4.0, 1.0, 1.0, 3.0, 2.0, 0.0, 0.0, 5.0}};
  CHECK(B.num_blocks() == 2);
  CHECK(B.size() == 4);
  const BlockDiagonal inv = B.inverse_spd();
  std::vector<double> x{1.0, 2.0, 3.0, 4.0}, y(4), z(4);
  B.multiply(x, y);
  inv.multiply(y, z);
  for (std::size_t i = 0; i < 4; ++i) CHECK(z[i] == doctest::Approx(x[i]));
  CHECK_FALSE(B.is_zero());
  BlockDiagonal bad{1, {-1.0}};
  CHECK_THROWS_AS(bad.inverse_spd(), NumericalError);
}

TEST_CASE("matrix market output") {
  const CsrMatrix A = laplacian(3);
  std::ostringstream os;
  write_matrix_market(A, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
  while (std::getline(is, line) && line[0] == '%') {
  }
  std::istringstream hdr(line);
  std::size_t r, c, n;
  hdr >> r >> c >> n;
  CHECK(r == 3);
  CHECK(c == 3);
  CHECK(n == A.nnz());
  std::size_t i, j;
  double v;
  std::size_t count = 0;
  while (is >> i >> j >> v) {
    CHECK(v == doctest::Approx(A.entry(i - 1, j - 1)));
    ++count;
  }
  CHECK(count == n);
}
