#include "pmlwave/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pmlwave/errors.hpp"

namespace pmlwave {

namespace {

struct ElementGeometry {
  double jac;   // |det J| of the reference-to-physical map
  double dxi;   // d xi / dx
  double deta;  // d eta / dy
};

ElementGeometry geometry(const MeshQ& mesh) {
  return {0.25 * mesh.hx() * mesh.hy(), 2.0 / mesh.hx(), 2.0 / mesh.hy()};
}

// Physical coordinates of every quadrature point of element e.
void quadrature_points(const MeshQ& mesh, const BasisQp& basis, std::size_t e,
                       std::vector<std::array<double, 2>>& out) {
  out.resize(basis.num_qp());
  for (std::size_t q = 0; q < basis.num_qp(); ++q)
    out[q] = mesh.map(e, basis.qp_xi(q), basis.qp_eta(q));
}

SparsityPattern pattern_for(const MeshQ& mesh, const DofMap& rows, const DofMap& cols) {
  return SparsityPattern(rows.total_dofs, cols.total_dofs, mesh.num_elements(), rows.element_dofs,
                         rows.dofs_per_element, cols.element_dofs, cols.dofs_per_element);
}

// Weighted quadrature sums of the form sum_q W_q c_q A(a, q) B(b, q),
// evaluated element by element and scattered into the pattern.
template <typename LocalKernel>
CsrMatrix assemble_generic(const MeshQ& mesh, const BasisQp& basis, const DofMap& rows,
                           const DofMap& cols, const Coefficient& c, const ElementFilter& filter,
                           LocalKernel kernel) {
  const SparsityPattern pattern = pattern_for(mesh, rows, cols);
  CsrMatrix A = pattern.zero_matrix();
  const std::size_t nb = basis.num_basis();
  const std::size_t nq = basis.num_qp();
  std::vector<double> local(nb * nb);
  std::vector<double> wc(nq);
  std::vector<std::array<double, 2>> pts;
  const ElementGeometry geo = geometry(mesh);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    if (filter && !filter(e)) continue;
    quadrature_points(mesh, basis, e, pts);
    bool all_zero = true;
    for (std::size_t q = 0; q < nq; ++q) {
      wc[q] = basis.weight(q) * geo.jac * c(pts[q][0], pts[q][1]);
      all_zero = all_zero && wc[q] == 0.0;
    }
    if (all_zero) continue;
    for (std::size_t a = 0; a < nb; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        double acc = 0.0;
        for (std::size_t q = 0; q < nq; ++q) acc += wc[q] * kernel(a, b, q, geo);
        local[a * nb + b] = acc;
      }
    pattern.add_local(A, e, local);
  }
  return A;
}

}  // namespace

CsrMatrix assemble_mass(const MeshQ& mesh, const BasisQp& basis, const DofMap& dofs,
                        const Coefficient& c, const ElementFilter& filter) {
  return assemble_generic(mesh, basis, dofs, dofs, c, filter,
                          [&](std::size_t a, std::size_t b, std::size_t q, const ElementGeometry&) {
                            return basis.value(a, q) * basis.value(b, q);
                          });
}

CsrMatrix assemble_stiffness(const MeshQ& mesh, const BasisQp& basis, const DofMap& dofs,
                             const Coefficient& c, std::optional<Axis> axis,
                             const ElementFilter& filter) {
  const bool use_x = !axis || *axis == Axis::x;
  const bool use_y = !axis || *axis == Axis::y;
  return assemble_generic(
      mesh, basis, dofs, dofs, c, filter,
      [&](std::size_t a, std::size_t b, std::size_t q, const ElementGeometry& g) {
        double v = 0.0;
        if (use_x) v += g.dxi * g.dxi * basis.dxi(a, q) * basis.dxi(b, q);
        if (use_y) v += g.deta * g.deta * basis.deta(a, q) * basis.deta(b, q);
        return v;
      });
}

CsrMatrix assemble_coupling(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                            const DofMap& disc, Axis axis, const Coefficient& c) {
  return assemble_generic(
      mesh, basis, cont, disc, c, {},
      [&](std::size_t a, std::size_t b, std::size_t q, const ElementGeometry& g) {
        const double dtest = axis == Axis::x ? g.dxi * basis.dxi(a, q) : g.deta * basis.deta(a, q);
        return dtest * basis.value(b, q);
      });
}

CsrMatrix assemble_gradient_source(const MeshQ& mesh, const BasisQp& basis, const DofMap& disc,
                                   const DofMap& cont, Axis axis, const Coefficient& c) {
  return assemble_generic(
      mesh, basis, disc, cont, c, {},
      [&](std::size_t a, std::size_t b, std::size_t q, const ElementGeometry& g) {
        const double dtrial = axis == Axis::x ? g.dxi * basis.dxi(b, q) : g.deta * basis.deta(b, q);
        return basis.value(a, q) * dtrial;
      });
}

BlockDiagonal assemble_block_mass(const MeshQ& mesh, const BasisQp& basis, const DofMap& disc,
                                  const Coefficient& c) {
  if (disc.kind != SpaceKind::discontinuous)
    throw std::invalid_argument("assemble_block_mass: needs the discontinuous space");
  const std::size_t nb = basis.num_basis();
  const std::size_t nq = basis.num_qp();
  BlockDiagonal M{nb, std::vector<double>(mesh.num_elements() * nb * nb, 0.0)};
  std::vector<double> wc(nq);
  std::vector<std::array<double, 2>> pts;
  const ElementGeometry geo = geometry(mesh);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    quadrature_points(mesh, basis, e, pts);
    for (std::size_t q = 0; q < nq; ++q) wc[q] = basis.weight(q) * geo.jac * c(pts[q][0], pts[q][1]);
    auto blk = M.block(e);
    for (std::size_t a = 0; a < nb; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        double acc = 0.0;
        for (std::size_t q = 0; q < nq; ++q) acc += wc[q] * basis.value(a, q) * basis.value(b, q);
        blk[a * nb + b] = acc;
      }
  }
  return M;
}

CsrMatrix assemble_boundary_mass(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                                 const EdgeCoefficient& c) {
  const auto& edges = mesh.boundary_edges();
  const std::size_t nb = basis.num_basis();
  const std::size_t n = basis.n1d();
  std::vector<std::size_t> edge_dofs(edges.size() * nb);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto el = cont.element(edges[k].element);
    std::copy(el.begin(), el.end(), edge_dofs.begin() + static_cast<std::ptrdiff_t>(k * nb));
  }
  const SparsityPattern pattern(cont.total_dofs, cont.total_dofs, edges.size(), edge_dofs, nb,
                                edge_dofs, nb);
  CsrMatrix A = pattern.zero_matrix();

  const auto& rule = basis.quad();
  const std::vector<double> ends = {-1.0, 1.0};
  const Tabulation1D at_ends = tabulate(basis.gll_nodes(), ends);
  const Tabulation1D& at_q = basis.table1d();
  std::vector<double> local(nb * nb);
  std::vector<double> trace(nb * rule.size());

  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& edge = edges[k];
    const std::size_t e = edge.element;
    const bool horizontal = edge.side == Side::bottom || edge.side == Side::top;
    const std::size_t end = (edge.side == Side::top || edge.side == Side::right) ? 1 : 0;
    const double len_jac = 0.5 * (horizontal ? mesh.hx() : mesh.hy());
    // Trace of every 2D basis function at the edge quadrature points.
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const double v = horizontal ? at_q.value(i, q) * at_ends.value(j, end)
                                      : at_ends.value(i, end) * at_q.value(j, q);
          trace[(j * n + i) * rule.size() + q] = v;
        }
    std::vector<double> wc(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double xi = horizontal ? rule.nodes[q] : (end ? 1.0 : -1.0);
      const double eta = horizontal ? (end ? 1.0 : -1.0) : rule.nodes[q];
      const auto pt = mesh.map(e, xi, eta);
      wc[q] = rule.weights[q] * len_jac * c(pt[0], pt[1], edge.nx, edge.ny);
    }
    for (std::size_t a = 0; a < nb; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q)
          acc += wc[q] * trace[a * rule.size() + q] * trace[b * rule.size() + q];
        local[a * nb + b] = acc;
      }
    pattern.add_local(A, k, local);
  }
  return A;
}

std::pair<CsrMatrix, CsrMatrix> assemble_boundary_term(const MeshQ& mesh, const BasisQp& basis,
                                                       const DofMap& cont,
                                                       const MaterialField& material,
                                                       const PmlConfig& pml, double r) {
  if (r == -1.0)
    throw std::logic_error(
        "assemble_boundary_term: r = -1 is imposed strongly and has no boundary term");
  if (!(r > -1.0 && r <= 1.0)) throw std::invalid_argument("assemble_boundary_term: r out of range");
  const double factor = (1.0 - r) / (1.0 + r);
  CsrMatrix R_v = assemble_boundary_mass(mesh, basis, cont, [&](double x, double y, int, int) {
    return factor * material.wave_speed(x, y);
  });
  CsrMatrix R_u = assemble_boundary_mass(mesh, basis, cont, [&](double x, double y, int nx, int ny) {
    const double dx = damping(Axis::x, x, pml);
    const double dy = damping(Axis::y, y, pml);
    const auto th = theta_2d(1.0, dx, dy, {nx, ny});
    return factor * material.wave_speed(x, y) * (th[0] * nx + th[1] * ny);
  });
  return {std::move(R_v), std::move(R_u)};
}

Operators assemble_all(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                       const DofMap& disc, const MaterialField& material, const PmlConfig& pml,
                       double r) {
  if (!(r >= -1.0 && r <= 1.0)) throw std::invalid_argument("assemble_all: r must lie in [-1, 1]");
  if (cont.kind != SpaceKind::continuous || disc.kind != SpaceKind::discontinuous)
    throw std::invalid_argument("assemble_all: expected (continuous, discontinuous) DOF maps");
  if (cont.order != basis.order() || disc.order != basis.order())
    throw std::invalid_argument("assemble_all: basis order does not match the DOF maps");
  check_interface_alignment(mesh, material);

  auto dx = [&](double x, double) { return damping(Axis::x, x, pml); };
  auto dy = [&](double, double y) { return damping(Axis::y, y, pml); };

  Operators ops;
  ops.r = r;
  ops.M_u = assemble_mass(mesh, basis, cont, [&](double x, double y) { return 1.0 / material.kappa(x, y); });
  ops.M_d1 = assemble_mass(mesh, basis, cont, [&](double x, double y) {
    return (dx(x, y) + dy(x, y)) / material.kappa(x, y);
  });
  ops.M_d0 = assemble_mass(mesh, basis, cont, [&](double x, double y) {
    return upsilon_2d(dx(x, y), dy(x, y)) / material.kappa(x, y);
  });
  ops.K = assemble_stiffness(mesh, basis, cont, [&](double x, double y) { return 1.0 / material.rho(x, y); });
  ops.B_x = assemble_coupling(mesh, basis, cont, disc, Axis::x, [](double, double) { return 1.0; });
  ops.B_y = assemble_coupling(mesh, basis, cont, disc, Axis::y, [](double, double) { return 1.0; });
  ops.G_x = assemble_gradient_source(mesh, basis, disc, cont, Axis::x, [&](double x, double y) {
    return gamma_2d(dx(x, y), dy(x, y))[0] / material.rho(x, y);
  });
  ops.G_y = assemble_gradient_source(mesh, basis, disc, cont, Axis::y, [&](double x, double y) {
    return gamma_2d(dx(x, y), dy(x, y))[1] / material.rho(x, y);
  });
  ops.M_phi = assemble_block_mass(mesh, basis, disc, [](double, double) { return 1.0; });
  ops.M_phi_dx = assemble_block_mass(mesh, basis, disc, dx);
  ops.M_phi_dy = assemble_block_mass(mesh, basis, disc, dy);

  if (r == -1.0) {
    ops.dirichlet = cont.boundary;
  } else if (r < 1.0) {
    auto [R_v, R_u] = assemble_boundary_term(mesh, basis, cont, material, pml, r);
    ops.R_v = std::move(R_v);
    ops.R_u = std::move(R_u);
    ops.has_boundary_term = true;
  }
  return ops;
}

void apply_dirichlet(CsrMatrix& A, std::span<const std::size_t> dofs, double diag) {
  std::vector<char> mask(std::max(A.rows, A.cols), 0);
  for (std::size_t d : dofs) mask[d] = 1;
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const std::size_t j = A.col_idx[k];
      if (mask[i] || mask[j]) A.values[k] = (i == j && mask[i]) ? diag : 0.0;
    }
}

void zero_rows(CsrMatrix& A, std::span<const std::size_t> dofs) {
  for (std::size_t i : dofs)
    for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) A.values[k] = 0.0;
}

void zero_columns(CsrMatrix& A, std::span<const std::size_t> dofs) {
  std::vector<char> mask(A.cols, 0);
  for (std::size_t d : dofs) mask[d] = 1;
  for (std::size_t k = 0; k < A.values.size(); ++k)
    if (mask[A.col_idx[k]]) A.values[k] = 0.0;
}

void apply_dirichlet(std::span<double> v, std::span<const std::size_t> dofs) {
  for (std::size_t d : dofs) v[d] = 0.0;
}

void apply_dirichlet(Operators& ops) {
  if (ops.r != -1.0)
    throw std::logic_error("apply_dirichlet: operators were not assembled for r = -1");
  if (ops.constrained) return;
  apply_dirichlet(ops.M_u, ops.dirichlet, 1.0);
  apply_dirichlet(ops.K, ops.dirichlet, 1.0);
  apply_dirichlet(ops.M_d1, ops.dirichlet, 0.0);
  apply_dirichlet(ops.M_d0, ops.dirichlet, 0.0);
  zero_rows(ops.B_x, ops.dirichlet);
  zero_rows(ops.B_y, ops.dirichlet);
  zero_columns(ops.G_x, ops.dirichlet);
  zero_columns(ops.G_y, ops.dirichlet);
  ops.constrained = true;
}

double GaussianPulse::spatial(double x, double y) const {
  const double r2 = (x - x0) * (x - x0) + (y - y0) * (y - y0);
  return amplitude * std::exp(-r2 / (2.0 * sigma * sigma));
}

double GaussianPulse::envelope(double t) const {
  if (t > cutoff) return 0.0;
  const double z = (t - t0) / tau;
  return std::exp(-z * z);
}

SpaceTimeSource GaussianPulse::source() const {
  const GaussianPulse g = *this;
  return {[g](double x, double y) { return g.spatial(x, y); },
          [g](double t) { return g.envelope(t); }};
}

Vec assemble_load(const MeshQ& mesh, const BasisQp& basis, const DofMap& dofs,
                  const Coefficient& g) {
  Vec f(dofs.total_dofs, 0.0);
  const std::size_t nb = basis.num_basis();
  const std::size_t nq = basis.num_qp();
  const ElementGeometry geo = geometry(mesh);
  std::vector<std::array<double, 2>> pts;
  std::vector<double> wg(nq);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    quadrature_points(mesh, basis, e, pts);
    for (std::size_t q = 0; q < nq; ++q) wg[q] = basis.weight(q) * geo.jac * g(pts[q][0], pts[q][1]);
    const auto el = dofs.element(e);
    for (std::size_t a = 0; a < nb; ++a) {
      double acc = 0.0;
      for (std::size_t q = 0; q < nq; ++q) acc += wg[q] * basis.value(a, q);
      f[el[a]] += acc;
    }
  }
  return f;
}

Vec assemble_forcing(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                     const MaterialField& material, const SpaceTimeSource& source, double t) {
  const double amp = source.temporal ? source.temporal(t) : 1.0;
  if (amp == 0.0 || !source.spatial) return Vec(cont.total_dofs, 0.0);
  Vec f = assemble_load(mesh, basis, cont, [&](double x, double y) {
    return source.spatial(x, y) / material.kappa(x, y);
  });
  for (double& v : f) v *= amp;
  return f;
}

Vec l2_project(const MeshQ& mesh, const BasisQp& basis, const DofMap& dofs, const Coefficient& g) {
  const Vec load = assemble_load(mesh, basis, dofs, g);
  Vec x(dofs.total_dofs, 0.0);
  if (dofs.kind == SpaceKind::discontinuous) {
    const BlockDiagonal inv =
        assemble_block_mass(mesh, basis, dofs, [](double, double) { return 1.0; }).inverse_spd();
    inv.multiply(load, x);
    return x;
  }
  const CsrMatrix M = assemble_mass(mesh, basis, dofs, [](double, double) { return 1.0; });
  std::vector<double> inv_diag = M.diagonal();
  for (double& d : inv_diag) d = 1.0 / d;
  conjugate_gradient(M, inv_diag, load, x, 1e-14, 10 * dofs.total_dofs + 100);
  return x;
}

}  // namespace pmlwave
