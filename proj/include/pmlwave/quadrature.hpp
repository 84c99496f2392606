#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pmlwave {

/// One-dimensional quadrature rule on [-1, 1].
struct QuadRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule, 1 <= n <= 16. Exact for degree 2n-1.
QuadRule1D gauss_legendre_rule(int n);

/// The p+1 Gauss-Lobatto nodes (endpoints plus roots of P_p'), 1 <= p <= 8.
std::vector<double> gauss_lobatto_nodes(int p);

/// Cardinal Lagrange polynomial L_j for the given node set, evaluated at x.
double lagrange_eval(std::span<const double> nodes, std::size_t j, double x);
double lagrange_deriv(std::span<const double> nodes, std::size_t j, double x);

/// Values and derivatives of all 1D cardinal functions at a set of points,
/// stored basis-major: value(j, q) = values[j * num_points + q].
struct Tabulation1D {
  std::size_t num_basis = 0;
  std::size_t num_points = 0;
  std::vector<double> values;
  std::vector<double> derivs;

  double value(std::size_t j, std::size_t q) const { return values[j * num_points + q]; }
  double deriv(std::size_t j, std::size_t q) const { return derivs[j * num_points + q]; }
};

Tabulation1D tabulate(std::span<const double> nodes, std::span<const double> points);

/// Tensor-product Q_p Lagrange basis on Gauss-Lobatto nodes together with the
/// (p+1)-point Gauss-Legendre tensor rule used for every element integral.
///
/// 2D indices are lexicographic with the first (xi) coordinate fastest:
/// basis (i, j) -> j * (p+1) + i, quadrature point (a, b) -> b * (p+1) + a.
class BasisQp {
 public:
  explicit BasisQp(int p);

  int order() const { return order_; }
  std::size_t n1d() const { return gll_.size(); }
  std::size_t num_basis() const { return gll_.size() * gll_.size(); }
  std::size_t num_qp() const { return quad_.size() * quad_.size(); }

  const std::vector<double>& gll_nodes() const { return gll_; }
  const QuadRule1D& quad() const { return quad_; }
  const Tabulation1D& table1d() const { return table_; }

  /// Tensor weight of quadrature point q on the reference square.
  double weight(std::size_t q) const { return weights2d_[q]; }
  double qp_xi(std::size_t q) const { return quad_.nodes[q % quad_.size()]; }
  double qp_eta(std::size_t q) const { return quad_.nodes[q / quad_.size()]; }

  double value(std::size_t b, std::size_t q) const { return values_[b * num_qp() + q]; }
  double dxi(std::size_t b, std::size_t q) const { return dxi_[b * num_qp() + q]; }
  double deta(std::size_t b, std::size_t q) const { return deta_[b * num_qp() + q]; }

  /// Evaluate sum_b coeffs[b] * phi_b(xi, eta) at an arbitrary reference point.
  double interpolate(std::span<const double> coeffs, double xi, double eta) const;

 private:
  int order_;
  std::vector<double> gll_;
  QuadRule1D quad_;
  Tabulation1D table_;
  std::vector<double> weights2d_;
  std::vector<double> values_;
  std::vector<double> dxi_;
  std::vector<double> deta_;
};

BasisQp tensor_basis_tables(int p);

}  // namespace pmlwave
