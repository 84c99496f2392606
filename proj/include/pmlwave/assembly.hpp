#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pmlwave/mesh.hpp"
#include "pmlwave/pml.hpp"
#include "pmlwave/quadrature.hpp"
#include "pmlwave/sparse.hpp"

namespace pmlwave {

using Coefficient = std::function<double(double, double)>;
using ElementFilter = std::function<bool(std::size_t)>;

// Element integrals below all use the (p+1)^2-point Gauss-Legendre rule of the
// basis; coefficients are sampled at the physical quadrature points.

/// (c u, v)_h on one space (continuous or discontinuous).
CsrMatrix assemble_mass(const MeshQ& mesh, const BasisQp& basis, const DofMap& dofs,
                        const Coefficient& c, const ElementFilter& filter = {});

/// (c grad u, grad v)_h, or only the d/d(axis) part when `axis` is given.
CsrMatrix assemble_stiffness(const MeshQ& mesh, const BasisQp& basis, const DofMap& dofs,
                             const Coefficient& c, std::optional<Axis> axis = std::nullopt,
                             const ElementFilter& filter = {});

/// (c phi, dv/d(axis))_h: rows are continuous test functions, columns
/// discontinuous trial functions.
CsrMatrix assemble_coupling(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                            const DofMap& disc, Axis axis, const Coefficient& c);

/// (c du/d(axis), p)_h: rows are discontinuous test functions, columns
/// continuous trial functions.
CsrMatrix assemble_gradient_source(const MeshQ& mesh, const BasisQp& basis, const DofMap& disc,
                                   const DofMap& cont, Axis axis, const Coefficient& c);

/// (c phi, p)_h on the discontinuous space, one dense block per element.
BlockDiagonal assemble_block_mass(const MeshQ& mesh, const BasisQp& basis, const DofMap& disc,
                                  const Coefficient& c);

/// Boundary coefficient sampled at (x, y) with outward normal (nx, ny).
using EdgeCoefficient = std::function<double(double, double, int, int)>;

/// <c u, v> over the domain boundary with a (p+1)-point Gauss-Legendre rule
/// per edge.
CsrMatrix assemble_boundary_mass(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                                 const EdgeCoefficient& c);

/// Semi-discrete operators of the 2D PML system. Matrices on the continuous
/// space are stored unconstrained; apply_dirichlet() performs the strong
/// elimination when r = -1.
struct Operators {
  double r = -1.0;
  CsrMatrix M_u;   // (u/kappa, v)
  CsrMatrix M_d1;  // ((d_x + d_y)/kappa u, v)
  CsrMatrix M_d0;  // (d_x d_y/kappa u, v)
  CsrMatrix K;     // (1/rho grad u, grad v)
  CsrMatrix B_x;   // (phi_x, dv/dx)
  CsrMatrix B_y;   // (phi_y, dv/dy)
  CsrMatrix G_x;   // ((d_y - d_x)/rho du/dx, p)
  CsrMatrix G_y;   // ((d_x - d_y)/rho du/dy, p)
  BlockDiagonal M_phi;
  BlockDiagonal M_phi_dx;
  BlockDiagonal M_phi_dy;
  // Boundary term for -1 < r < 1: <c (1-r)/(1+r) (u_t + theta.n), v>, split
  // into the part acting on u_t (R_v) and the theta part acting on u (R_u).
  bool has_boundary_term = false;
  CsrMatrix R_v;
  CsrMatrix R_u;
  std::vector<std::size_t> dirichlet;  // non-empty iff r = -1
  bool constrained = false;

  std::size_t num_u() const { return M_u.rows; }
  std::size_t num_phi() const { return M_phi.size(); }
};

Operators assemble_all(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                       const DofMap& disc, const MaterialField& material, const PmlConfig& pml,
                       double r);

/// Boundary term matrices (R_v, R_u). Throws std::logic_error for r = -1,
/// where the boundary condition is strong and no boundary term exists.
std::pair<CsrMatrix, CsrMatrix> assemble_boundary_term(const MeshQ& mesh, const BasisQp& basis,
                                                       const DofMap& cont,
                                                       const MaterialField& material,
                                                       const PmlConfig& pml, double r);

/// Zero rows and columns of `dofs`, then put `diag` on their diagonal.
void apply_dirichlet(CsrMatrix& A, std::span<const std::size_t> dofs, double diag = 1.0);
/// Zero the rows of `dofs` only (rectangular couplings).
void zero_rows(CsrMatrix& A, std::span<const std::size_t> dofs);
/// Zero the columns listed in `dofs`.
void zero_columns(CsrMatrix& A, std::span<const std::size_t> dofs);
void apply_dirichlet(std::span<double> v, std::span<const std::size_t> dofs);
/// Constrain every continuous-space operator in place (r = -1 only).
void apply_dirichlet(Operators& ops);

/// Space-time separable source F(x, y, t) = spatial(x, y) * temporal(t).
struct SpaceTimeSource {
  Coefficient spatial;
  std::function<double(double)> temporal;
};

/// A exp(-((x-x0)^2 + (y-y0)^2) / (2 sigma^2)) exp(-((t-t0)/tau)^2), switched
/// off for t > cutoff.
struct GaussianPulse {
  double amplitude = 1.0;
  double sigma = 0.25;
  double x0 = 0.0;
  double y0 = 0.0;
  double t0 = 1.0;
  double tau = 0.25;
  double cutoff = std::numeric_limits<double>::infinity();

  double spatial(double x, double y) const;
  double envelope(double t) const;
  SpaceTimeSource source() const;
};

/// (g, v_i)_h for every continuous basis function v_i.
Vec assemble_load(const MeshQ& mesh, const BasisQp& basis, const DofMap& dofs, const Coefficient& g);

/// (F(., t)/kappa, v_i)_h.
Vec assemble_forcing(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                     const MaterialField& material, const SpaceTimeSource& source, double t);

/// L2 projection onto the given space (CG on the mass for the continuous
/// space, exact block solves for the discontinuous one).
Vec l2_project(const MeshQ& mesh, const BasisQp& basis, const DofMap& dofs, const Coefficient& g);

}  // namespace pmlwave
