#pragma once

// Independent dense assembly for uniform meshes with constant coefficients.
// Lagrange polynomials on hard-coded Gauss-Lobatto nodes are expanded in
// monomials and integrated exactly, so nothing here shares code with the
// library's quadrature or basis tables.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using Poly = std::vector<double>;  // coefficients of 1, x, x^2, ...

inline std::vector<double> gll(int p) {
  switch (p) {
    case 1: return {-1.0, 1.0};
    case 2: return {-1.0, 0.0, 1.0};
    case 3: return {-1.0, -1.0 / std::sqrt(5.0), 1.0 / std::sqrt(5.0), 1.0};
    case 4: return {-1.0, -std::sqrt(3.0 / 7.0), 0.0, std::sqrt(3.0 / 7.0), 1.0};
    default: throw std::invalid_argument("oracle::gll: p must be 1..4");
  }
}

inline Poly mul(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

inline Poly deriv(const Poly& a) {
  if (a.size() <= 1) return {0.0};
  Poly d(a.size() - 1);
  for (std::size_t i = 1; i < a.size(); ++i) d[i - 1] = static_cast<double>(i) * a[i];
  return d;
}

inline double integrate(const Poly& a) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); k += 2) s += 2.0 * a[k] / static_cast<double>(k + 1);
  return s;
}

inline double eval(const Poly& a, double x) {
  double v = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) v = v * x + a[k];
  return v;
}

inline std::vector<Poly> lagrange(int p) {
  const auto x = gll(p);
  std::vector<Poly> L;
  for (std::size_t j = 0; j < x.size(); ++j) {
    Poly l{1.0};
    for (std::size_t m = 0; m < x.size(); ++m)
      if (m != j) l = mul(l, Poly{-x[m] / (x[j] - x[m]), 1.0 / (x[j] - x[m])});
    L.push_back(l);
  }
  return L;
}

/// 1D reference matrices on [-1,1]: mass, stiffness, and C[i][k] = int L_i' L_k.
struct Ref1D {
  std::size_t n = 0;
  std::vector<double> M, D, C;
  double m(std::size_t i, std::size_t k) const { return M[i * n + k]; }
  double d(std::size_t i, std::size_t k) const { return D[i * n + k]; }
  double c(std::size_t i, std::size_t k) const { return C[i * n + k]; }
};

inline Ref1D ref1d(int p) {
  const auto L = lagrange(p);
  Ref1D r;
  r.n = L.size();
  for (std::size_t i = 0; i < r.n; ++i)
    for (std::size_t k = 0; k < r.n; ++k) {
      r.M.push_back(integrate(mul(L[i], L[k])));
      r.D.push_back(integrate(mul(deriv(L[i]), deriv(L[k]))));
      r.C.push_back(integrate(mul(deriv(L[i]), L[k])));
    }
  return r;
}

/// Dense matrices on an nx x ny mesh of hx x hy elements. Continuous nodes are
/// numbered iy * (nx p + 1) + ix, discontinuous ones element-major with the
/// local index j (p+1) + i.
struct Dense {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;
  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

struct Assembler {
  int p;
  std::size_t nx, ny;
  double hx, hy;
  Ref1D r;

  Assembler(int p_, std::size_t nx_, std::size_t ny_, double hx_, double hy_)
      : p(p_), nx(nx_), ny(ny_), hx(hx_), hy(hy_), r(ref1d(p_)) {}

  std::size_t n1() const { return static_cast<std::size_t>(p) + 1; }
  std::size_t num_cont() const { return (nx * p + 1) * (ny * p + 1); }
  std::size_t num_disc() const { return nx * ny * n1() * n1(); }
  std::size_t cont(std::size_t e, std::size_t i, std::size_t j) const {
    const std::size_t ex = e % nx, ey = e / nx;
    return (ey * p + j) * (nx * p + 1) + ex * p + i;
  }
  std::size_t disc(std::size_t e, std::size_t i, std::size_t j) const {
    return e * n1() * n1() + j * n1() + i;
  }

  template <typename Local>
  Dense build(bool row_cont, bool col_cont, Local local) const {
    Dense A;
    A.rows = row_cont ? num_cont() : num_disc();
    A.cols = col_cont ? num_cont() : num_disc();
    A.a.assign(A.rows * A.cols, 0.0);
    const std::size_t n = n1();
    for (std::size_t e = 0; e < nx * ny; ++e)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t l = 0; l < n; ++l)
            for (std::size_t k = 0; k < n; ++k) {
              const std::size_t row = row_cont ? cont(e, i, j) : disc(e, i, j);
              const std::size_t col = col_cont ? cont(e, k, l) : disc(e, k, l);
              A(row, col) += local(i, j, k, l);
            }
    return A;
  }

  /// c * (u, v)
  Dense mass(double c, bool continuous = true) const {
    const double J = 0.25 * hx * hy;
    return build(continuous, continuous, [&](auto i, auto j, auto k, auto l) {
      return c * J * r.m(i, k) * r.m(j, l);
    });
  }
  /// c * (u_x, v_x) + c * (u_y, v_y)
  Dense stiffness(double c) const {
    return build(true, true, [&](auto i, auto j, auto k, auto l) {
      return c * ((hy / hx) * r.d(i, k) * r.m(j, l) + (hx / hy) * r.m(i, k) * r.d(j, l));
    });
  }
  /// c * (phi, dv/dx) with v continuous (rows), phi discontinuous (cols).
  Dense coupling_x(double c) const {
    return build(true, false, [&](auto i, auto j, auto k, auto l) {
      return c * 0.5 * hy * r.c(i, k) * r.m(j, l);
    });
  }
  Dense coupling_y(double c) const {
    return build(true, false, [&](auto i, auto j, auto k, auto l) {
      return c * 0.5 * hx * r.m(i, k) * r.c(j, l);
    });
  }
};

inline Dense transpose(const Dense& A) {
  Dense T;
  T.rows = A.cols;
  T.cols = A.rows;
  T.a.assign(A.a.size(), 0.0);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

/// max |A - B| / max |B| over all entries.
inline double relative_difference(const std::vector<double>& a, const Dense& B) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < B.a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - B.a[i]));
    scale = std::max(scale, std::abs(B.a[i]));
  }
  return diff / scale;
}

}  // namespace oracle
