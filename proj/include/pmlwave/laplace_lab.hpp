#pragma once

#include <Eigen/SparseCore>

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pmlwave/assembly.hpp"

namespace pmlwave {

using CVec = std::vector<Complex>;
using ComplexSparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

/// Laplace-space reduced problem for spatially constant damping:
///
///   (s^2 S_x S_y / kappa u, v)_h + (S_y/S_x (1/rho) u_x, v_x)_h
///                                + (S_x/S_y (1/rho) u_y, v_y)_h = (F/kappa, v)_h
///
/// on the continuous space with homogeneous Dirichlet data.
struct ComplexSystem {
  Complex s;
  double dx = 0.0;
  double dy = 0.0;
  ComplexSparse A;   // Dirichlet rows/columns replaced by identity
  CsrMatrix M;       // (u/kappa, v)_h, unconstrained
  CsrMatrix K_x;     // (1/rho u_x, v_x)_h, unconstrained
  CsrMatrix K_y;
  std::vector<std::size_t> dirichlet;

  std::size_t size() const { return M.rows; }
};

ComplexSystem assemble_reduced(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                               const MaterialField& material, Complex s, double dx, double dy);

/// Variable-damping entry point: accepted only when the profile is
/// identically zero on the mesh; otherwise throws UnsupportedError.
ComplexSystem assemble_reduced(const MeshQ& mesh, const BasisQp& basis, const DofMap& cont,
                               const MaterialField& material, Complex s, const PmlConfig& pml);

/// Solve A u = (F/kappa, v)_h for a nodal forcing vector F.
CVec solve_reduced(const ComplexSystem& sys, const CVec& forcing);

struct LaplaceEnergies {
  double E_u = 0.0;  // sqrt(||s u||^2_{1/kappa} + sum_eta ||u_eta / S_eta||^2_{1/rho})
  double E_f = 0.0;  // ||F||_{1/kappa}
};

LaplaceEnergies laplace_energies(const ComplexSystem& sys, const CVec& u, const CVec& forcing);

struct EnergyCheck {
  double lhs = 0.0;     // a E_u^2
  double rhs = 0.0;     // 2 E_u E_f
  double margin = 0.0;  // rhs - lhs
  LaplaceEnergies energies;
};

EnergyCheck energy_inequality_check(const ComplexSystem& sys, const CVec& forcing);

/// Exact Laplace-space solution with the load obtained by applying the
/// strong reduced operator (kappa = rho = 1, constant damping) to it.
struct ManufacturedSolution {
  std::function<Complex(double, double)> exact;
  std::function<Complex(double, double)> load;
};

/// alpha sin(pi (x-x0)/Lx) sin(pi (y-y0)/Ly). With k_x = pi/Lx, k_y = pi/Ly
/// the load is [s^2 S_x S_y + (S_y/S_x) k_x^2 + (S_x/S_y) k_y^2] u.
ManufacturedSolution sine_manufactured(const Rect& domain, Complex s, double dx, double dy,
                                       Complex alpha = {1.0, 0.5});

/// alpha (x-x0)(x1-x)(y-y0)(y1-y), which lies in Q_p for p >= 2. With
/// X = (x-x0)(x1-x), Y = (y-y0)(y1-y) the load is
/// s^2 S_x S_y u + 2 alpha (S_y/S_x) Y + 2 alpha (S_x/S_y) X.
ManufacturedSolution bubble_manufactured(const Rect& domain, Complex s, double dx, double dy,
                                         Complex alpha = {1.0, -0.25});

/// Discrete L2 error of the Galerkin solution on a uniform mesh of `domain`
/// with element size h, measured with a (p+2)-point Gauss-Legendre rule.
double manufactured_error(const Rect& domain, int p, double h, Complex s, double dx, double dy,
                          const ManufacturedSolution& sol);

struct ConvergenceReport {
  std::vector<double> h;
  std::vector<double> errors;
  std::vector<double> orders;  // between successive h
};

/// Sine-product manufactured solution on [0,1]^2 for each h.
ConvergenceReport manufactured_convergence(int p, const std::vector<double>& hs, Complex s,
                                           double d);

/// Local Q_p coefficients interpolating the given values at the (p+1)^2
/// quadrature points. Throws UnsupportedError if the number of values does
/// not equal dim Q_p.
std::vector<double> quadrature_point_interpolant(std::span<const double> qp_values,
                                                 const BasisQp& basis);

/// Same, for values sampled at the tensor points of an arbitrary rule. Only
/// a (p+1)-point rule satisfies the interpolation condition.
std::vector<double> quadrature_point_interpolant(std::span<const double> qp_values,
                                                 const BasisQp& basis, const QuadRule1D& rule);

/// g_p solving (w, (s^* + d) g_p)_h = (w, g)_h for all w in W_h, element by
/// element, for one component of a discontinuous field with damping d(x, y).
CVec projection_pi_p(const MeshQ& mesh, const BasisQp& basis, const DofMap& disc, const CVec& g,
                     Complex s, const Coefficient& d);

/// Max over elements of |(w, (s^*+d) g_p)_h - (w, g)_h| / |(w, g)_h|.
double projection_residual(const MeshQ& mesh, const BasisQp& basis, const DofMap& disc,
                           const CVec& g, const CVec& g_p, Complex s, const Coefficient& d);

/// One line of the verification report.
struct VerificationRow {
  std::string check;
  int p = 0;
  double h = 0.0;
  Complex s;
  double dx = 0.0;
  double dy = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin_or_order = 0.0;
  bool pass = false;
};

void write_verification_csv(const std::vector<VerificationRow>& rows, std::ostream& os);

/// Randomized energy-inequality cases, manufactured convergence sweeps and
/// interpolation/projection checks at the acceptance tolerances.
std::vector<VerificationRow> run_laplace_verification(std::uint64_t seed = 20240601);

}  // namespace pmlwave
