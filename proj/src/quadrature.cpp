#include "pmlwave/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pmlwave {

namespace {

constexpr int kMaxNewtonIterations = 100;

struct LegendreValue {
  double p;      // P_n(x)
  double p_prev; // P_{n-1}(x)
};

LegendreValue legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {p0, 0.0};
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

// P_n'(x) for |x| < 1.
double legendre_deriv(int n, double x) {
  const auto [p, p_prev] = legendre(n, x);
  return n * (x * p - p_prev) / (x * x - 1.0);
}

void symmetrize(std::vector<double>& v) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double m = 0.5 * (v[n - 1 - i] - v[i]);
    v[i] = -m;
    v[n - 1 - i] = m;
  }
  if (n % 2 == 1) v[n / 2] = 0.0;
}

void check_distinct(std::span<const double> nodes) {
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = a + 1; b < nodes.size(); ++b)
      if (nodes[a] == nodes[b])
        throw std::invalid_argument("lagrange: duplicate interpolation node " +
                                    std::to_string(nodes[a]));
}

}  // namespace

QuadRule1D gauss_legendre_rule(int n) {
  if (n < 1 || n > 16)
    throw std::invalid_argument("gauss_legendre_rule: n must be in [1, 16], got " +
                                std::to_string(n));
  QuadRule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-like initial guess, descending in i.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
      const double f = legendre(n, x).p;
      const double dx = f / legendre_deriv(n, x);
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[n - 1 - i] = x;
  }
  symmetrize(rule.nodes);
  for (int i = 0; i < n; ++i) {
    const double x = rule.nodes[i];
    const double dp = legendre_deriv(n, x);
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  for (int i = 0; i < n / 2; ++i) {
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  return rule;
}

std::vector<double> gauss_lobatto_nodes(int p) {
  if (p < 1 || p > 8)
    throw std::invalid_argument("gauss_lobatto_nodes: p must be in [1, 8], got " +
                                std::to_string(p));
  std::vector<double> nodes(p + 1);
  nodes.front() = -1.0;
  nodes.back() = 1.0;
  for (int i = 1; i < p; ++i) {
    double x = -std::cos(std::numbers::pi * i / p);
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
      const auto [pp, pp_prev] = legendre(p, x);
      const double d1 = p * (x * pp - pp_prev) / (x * x - 1.0);
      const double d2 = (2.0 * x * d1 - p * (p + 1.0) * pp) / (1.0 - x * x);
      const double dx = d1 / d2;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
  }
  std::sort(nodes.begin(), nodes.end());
  symmetrize(nodes);
  return nodes;
}

double lagrange_eval(std::span<const double> nodes, std::size_t j, double x) {
  if (j >= nodes.size()) throw std::invalid_argument("lagrange_eval: index out of range");
  check_distinct(nodes);
  double v = 1.0;
  for (std::size_t m = 0; m < nodes.size(); ++m)
    if (m != j) v *= (x - nodes[m]) / (nodes[j] - nodes[m]);
  return v;
}

double lagrange_deriv(std::span<const double> nodes, std::size_t j, double x) {
  if (j >= nodes.size()) throw std::invalid_argument("lagrange_deriv: index out of range");
  check_distinct(nodes);
  // Product rule over the factors; avoids dividing by (x - node) so it is
  // valid at the nodes themselves.
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k == j) continue;
    double term = 1.0 / (nodes[j] - nodes[k]);
    for (std::size_t m = 0; m < nodes.size(); ++m)
      if (m != j && m != k) term *= (x - nodes[m]) / (nodes[j] - nodes[m]);
    sum += term;
  }
  return sum;
}

Tabulation1D tabulate(std::span<const double> nodes, std::span<const double> points) {
  Tabulation1D t;
  t.num_basis = nodes.size();
  t.num_points = points.size();
  t.values.resize(t.num_basis * t.num_points);
  t.derivs.resize(t.num_basis * t.num_points);
  for (std::size_t j = 0; j < t.num_basis; ++j)
    for (std::size_t q = 0; q < t.num_points; ++q) {
      t.values[j * t.num_points + q] = lagrange_eval(nodes, j, points[q]);
      t.derivs[j * t.num_points + q] = lagrange_deriv(nodes, j, points[q]);
    }
  return t;
}

BasisQp::BasisQp(int p)
    : order_(p), gll_(gauss_lobatto_nodes(p)), quad_(gauss_legendre_rule(p + 1)) {
  table_ = tabulate(gll_, quad_.nodes);
  const std::size_t n = gll_.size();
  const std::size_t nq = quad_.size();
  const std::size_t nb2 = n * n;
  const std::size_t nq2 = nq * nq;
  weights2d_.resize(nq2);
  for (std::size_t b = 0; b < nq; ++b)
    for (std::size_t a = 0; a < nq; ++a) weights2d_[b * nq + a] = quad_.weights[a] * quad_.weights[b];

  values_.resize(nb2 * nq2);
  dxi_.resize(nb2 * nq2);
  deta_.resize(nb2 * nq2);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t basis = j * n + i;
      for (std::size_t qb = 0; qb < nq; ++qb)
        for (std::size_t qa = 0; qa < nq; ++qa) {
          const std::size_t q = qb * nq + qa;
          values_[basis * nq2 + q] = table_.value(i, qa) * table_.value(j, qb);
          dxi_[basis * nq2 + q] = table_.deriv(i, qa) * table_.value(j, qb);
          deta_[basis * nq2 + q] = table_.value(i, qa) * table_.deriv(j, qb);
        }
    }
}

double BasisQp::interpolate(std::span<const double> coeffs, double xi, double eta) const {
  const std::size_t n = gll_.size();
  if (coeffs.size() != n * n) throw std::invalid_argument("BasisQp::interpolate: size mismatch");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = lagrange_eval(gll_, i, xi);
    ly[i] = lagrange_eval(gll_, i, eta);
  }
  double v = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) v += coeffs[j * n + i] * lx[i] * ly[j];
  return v;
}

BasisQp tensor_basis_tables(int p) {
  if (p < 1 || p > 8)
    throw std::invalid_argument("tensor_basis_tables: p must be in [1, 8], got " +
                                std::to_string(p));
  return BasisQp(p);
}

}  // namespace pmlwave
