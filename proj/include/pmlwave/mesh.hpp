#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "pmlwave/quadrature.hpp"

namespace pmlwave {

struct Rect {
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(double x, double y, double tol = 0.0) const {
    return x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol;
  }
  bool operator==(const Rect&) const = default;
};

/// Which side of an element (or the domain) an edge lies on.
enum class Side { bottom = 0, right = 1, top = 2, left = 3 };

struct BoundaryEdge {
  std::size_t element;
  Side side;
  int nx;  // outward normal components in {-1, 0, 1}
  int ny;
};

/// Uniform Cartesian mesh of square elements. Element e = ey * nx + ex.
class MeshQ {
 public:
  MeshQ(Rect domain, std::size_t nx, std::size_t ny);

  const Rect& domain() const { return domain_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  std::size_t num_elements() const { return nx_ * ny_; }

  std::size_t ex(std::size_t e) const { return e % nx_; }
  std::size_t ey(std::size_t e) const { return e / nx_; }

  /// Lower-left corner of element e.
  std::array<double, 2> origin(std::size_t e) const {
    return {domain_.x0 + static_cast<double>(ex(e)) * hx_,
            domain_.y0 + static_cast<double>(ey(e)) * hy_};
  }
  /// Corners in counter-clockwise order starting at the lower-left.
  std::array<std::array<double, 2>, 4> corners(std::size_t e) const;

  /// Map a reference coordinate in [-1,1]^2 to physical space.
  std::array<double, 2> map(std::size_t e, double xi, double eta) const {
    const auto o = origin(e);
    return {o[0] + 0.5 * (xi + 1.0) * hx_, o[1] + 0.5 * (eta + 1.0) * hy_};
  }

  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

 private:
  Rect domain_;
  std::size_t nx_;
  std::size_t ny_;
  double hx_;
  double hy_;
  std::vector<BoundaryEdge> boundary_;
};

/// Uniform grid of squares of side h. Throws ConfigError naming the side that
/// is not an integer multiple of h.
MeshQ build_cartesian_mesh(const Rect& domain, double h);

enum class SpaceKind { continuous, discontinuous };

/// Global numbering of the degrees of freedom for V_h (continuous) or W_h
/// (discontinuous). Continuous numbering is lexicographic by (y, x) over the
/// Gauss-Lobatto node lattice; discontinuous numbering is element-major.
struct DofMap {
  SpaceKind kind = SpaceKind::continuous;
  int order = 1;
  std::size_t total_dofs = 0;
  std::size_t dofs_per_element = 0;
  std::vector<std::size_t> element_dofs;  // num_elements * dofs_per_element
  std::vector<std::size_t> boundary;      // continuous only, sorted
  std::vector<std::array<double, 2>> coords;

  std::span<const std::size_t> element(std::size_t e) const {
    return {element_dofs.data() + e * dofs_per_element, dofs_per_element};
  }
};

DofMap dof_map(const MeshQ& mesh, int p, SpaceKind kind);

/// Global DOFs whose node lies on the domain boundary. Continuous maps only.
std::vector<std::size_t> boundary_dofs(const DofMap& dofs, const MeshQ& mesh);

/// Continuous DOF located at physical (x, y), matched within 1e-9 * h.
std::optional<std::size_t> locate_node(const DofMap& dofs, const MeshQ& mesh, double x, double y);

/// Bulk modulus and density, with the horizontal lines where they may jump.
struct MaterialField {
  std::function<double(double, double)> kappa;
  std::function<double(double, double)> rho;
  std::vector<double> interfaces;

  double wave_speed(double x, double y) const;
  double impedance(double x, double y) const;

  static MaterialField homogeneous(double kappa = 1.0, double rho = 1.0);
  /// Piecewise-constant wave speed in horizontal layers with rho = 1 and
  /// kappa = c^2. `speeds` lists the layers bottom-to-top and has one more
  /// entry than `interfaces` (ascending).
  static MaterialField layered(std::vector<double> speeds, std::vector<double> interfaces);
};

/// Throws ConfigError unless every interface coincides with a mesh line.
void check_interface_alignment(const MeshQ& mesh, const MaterialField& material);

}  // namespace pmlwave
