#include "pmlwave/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pmlwave/errors.hpp"

namespace pmlwave {

namespace {

std::size_t divide_side(double length, double h, const char* name) {
  const double ratio = length / h;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "mesh: side " << name << " of length " << length
        << " is not an integer multiple of h = " << h << " (ratio " << ratio << ")";
    throw ConfigError(msg.str());
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

MeshQ::MeshQ(Rect domain, std::size_t nx, std::size_t ny)
    : domain_(domain), nx_(nx), ny_(ny) {
  if (nx == 0 || ny == 0) throw std::invalid_argument("MeshQ: empty mesh");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
    throw std::invalid_argument("MeshQ: degenerate domain");
  hx_ = domain.width() / static_cast<double>(nx);
  hy_ = domain.height() / static_cast<double>(ny);
  for (std::size_t i = 0; i < nx; ++i) boundary_.push_back({i, Side::bottom, 0, -1});
  for (std::size_t j = 0; j < ny; ++j) boundary_.push_back({j * nx + nx - 1, Side::right, 1, 0});
  for (std::size_t i = 0; i < nx; ++i) boundary_.push_back({(ny - 1) * nx + i, Side::top, 0, 1});
  for (std::size_t j = 0; j < ny; ++j) boundary_.push_back({j * nx, Side::left, -1, 0});
}

std::array<std::array<double, 2>, 4> MeshQ::corners(std::size_t e) const {
  const auto o = origin(e);
  return {{{o[0], o[1]}, {o[0] + hx_, o[1]}, {o[0] + hx_, o[1] + hy_}, {o[0], o[1] + hy_}}};
}

MeshQ build_cartesian_mesh(const Rect& domain, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("build_cartesian_mesh: h must be positive");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
    throw ConfigError("build_cartesian_mesh: domain must have positive extent");
  const std::size_t nx = divide_side(domain.width(), h, "x");
  const std::size_t ny = divide_side(domain.height(), h, "y");
  return MeshQ(domain, nx, ny);
}

DofMap dof_map(const MeshQ& mesh, int p, SpaceKind kind) {
  if (p < 1 || p > 8) throw std::invalid_argument("dof_map: p must be in [1, 8]");
  const auto gll = gauss_lobatto_nodes(p);
  const std::size_t n = static_cast<std::size_t>(p) + 1;
  DofMap map;
  map.kind = kind;
  map.order = p;
  map.dofs_per_element = n * n;
  map.element_dofs.resize(mesh.num_elements() * n * n);

  if (kind == SpaceKind::continuous) {
    const std::size_t lx = mesh.nx() * static_cast<std::size_t>(p) + 1;
    const std::size_t ly = mesh.ny() * static_cast<std::size_t>(p) + 1;
    map.total_dofs = lx * ly;
    map.coords.resize(map.total_dofs);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const std::size_t ix0 = mesh.ex(e) * p;
      const std::size_t iy0 = mesh.ey(e) * p;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t g = (iy0 + j) * lx + (ix0 + i);
          map.element_dofs[e * n * n + j * n + i] = g;
          map.coords[g] = mesh.map(e, gll[i], gll[j]);
        }
    }
    // Snap lattice lines shared between elements to identical coordinates.
    for (std::size_t iy = 0; iy < ly; ++iy)
      for (std::size_t ix = 0; ix < lx; ++ix) {
        auto& c = map.coords[iy * lx + ix];
        if (ix % p == 0) c[0] = mesh.domain().x0 + static_cast<double>(ix / p) * mesh.hx();
        if (iy % p == 0) c[1] = mesh.domain().y0 + static_cast<double>(iy / p) * mesh.hy();
      }
    map.boundary = boundary_dofs(map, mesh);
  } else {
    map.total_dofs = mesh.num_elements() * n * n;
    map.coords.resize(map.total_dofs);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t g = e * n * n + j * n + i;
          map.element_dofs[g] = g;
          map.coords[g] = mesh.map(e, gll[i], gll[j]);
        }
  }
  return map;
}

std::vector<std::size_t> boundary_dofs(const DofMap& dofs, const MeshQ& mesh) {
  if (dofs.kind != SpaceKind::continuous)
    throw std::invalid_argument("boundary_dofs: only defined for the continuous space");
  const std::size_t p = static_cast<std::size_t>(dofs.order);
  const std::size_t lx = mesh.nx() * p + 1;
  const std::size_t ly = mesh.ny() * p + 1;
  std::vector<std::size_t> out;
  out.reserve(2 * (lx + ly));
  for (std::size_t iy = 0; iy < ly; ++iy)
    for (std::size_t ix = 0; ix < lx; ++ix)
      if (ix == 0 || iy == 0 || ix == lx - 1 || iy == ly - 1) out.push_back(iy * lx + ix);
  return out;
}

std::optional<std::size_t> locate_node(const DofMap& dofs, const MeshQ& mesh, double x,
                                       double y) {
  if (dofs.kind != SpaceKind::continuous)
    throw std::invalid_argument("locate_node: only defined for the continuous space");
  const std::size_t p = static_cast<std::size_t>(dofs.order);
  const std::size_t lx = mesh.nx() * p + 1;
  const std::size_t ly = mesh.ny() * p + 1;
  const auto gll = gauss_lobatto_nodes(dofs.order);
  const double tol = 1e-9 * std::min(mesh.hx(), mesh.hy());

  auto lattice_index = [&](double v, double v0, double hh, std::size_t ne,
                           std::size_t count) -> std::optional<std::size_t> {
    const double s = (v - v0) / hh;
    if (s < -tol / hh || s > static_cast<double>(ne) + tol / hh) return std::nullopt;
    auto cell = static_cast<std::ptrdiff_t>(std::floor(s));
    cell = std::clamp<std::ptrdiff_t>(cell, 0, static_cast<std::ptrdiff_t>(ne) - 1);
    const double origin = v0 + static_cast<double>(cell) * hh;
    for (std::size_t i = 0; i <= p; ++i) {
      const double node = origin + 0.5 * (gll[i] + 1.0) * hh;
      if (std::abs(node - v) <= tol) {
        const std::size_t idx = static_cast<std::size_t>(cell) * p + i;
        if (idx < count) return idx;
      }
    }
    return std::nullopt;
  };

  const auto ix = lattice_index(x, mesh.domain().x0, mesh.hx(), mesh.nx(), lx);
  const auto iy = lattice_index(y, mesh.domain().y0, mesh.hy(), mesh.ny(), ly);
  if (!ix || !iy) return std::nullopt;
  return *iy * lx + *ix;
}

double MaterialField::wave_speed(double x, double y) const {
  return std::sqrt(kappa(x, y) / rho(x, y));
}

double MaterialField::impedance(double x, double y) const {
  return rho(x, y) * wave_speed(x, y);
}

MaterialField MaterialField::homogeneous(double kappa, double rho) {
  if (!(kappa > 0.0) || !(rho > 0.0))
    throw std::invalid_argument("MaterialField: kappa and rho must be positive");
  MaterialField m;
  m.kappa = [kappa](double, double) { return kappa; };
  m.rho = [rho](double, double) { return rho; };
  return m;
}

MaterialField MaterialField::layered(std::vector<double> speeds, std::vector<double> interfaces) {
  if (speeds.size() != interfaces.size() + 1)
    throw std::invalid_argument("MaterialField::layered: need one more speed than interfaces");
  if (!std::is_sorted(interfaces.begin(), interfaces.end()))
    throw std::invalid_argument("MaterialField::layered: interfaces must be ascending");
  for (double c : speeds)
    if (!(c > 0.0)) throw std::invalid_argument("MaterialField::layered: speeds must be positive");
  MaterialField m;
  m.interfaces = interfaces;
  auto speed = [speeds, interfaces](double y) {
    std::size_t k = 0;
    while (k < interfaces.size() && y > interfaces[k]) ++k;
    return speeds[k];
  };
  m.kappa = [speed](double, double y) {
    const double c = speed(y);
    return c * c;
  };
  m.rho = [](double, double) { return 1.0; };
  return m;
}

void check_interface_alignment(const MeshQ& mesh, const MaterialField& material) {
  const double y0 = mesh.domain().y0;
  const double h = mesh.hy();
  for (double yi : material.interfaces) {
    const double s = (yi - y0) / h;
    const double k = std::round(s);
    const double nearest = y0 + k * h;
    if (std::abs(yi - nearest) > 1e-9 * h) {
      std::ostringstream msg;
      msg << "material interface y = " << yi << " does not align with the mesh; nearest mesh line"
          << " is y = " << nearest;
      throw ConfigError(msg.str());
    }
  }
}

}  // namespace pmlwave
