#include "glwire/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "glwire/errors.hpp"

namespace glwire {

Grid::Grid(std::size_t nx, std::size_t ny, double h) : nx_(nx), ny_(ny), h_(h) {
  kinds_.assign(num_nodes(), NodeKind::Interior);
  areas_.assign(num_nodes(), h * h);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const auto n = node(i, j);
      const bool xb = (i == 0 || i + 1 == nx);
      const bool yb = (j == 0 || j + 1 == ny);
      // psi is pinned on the closure of the contacts, so corners count as contact.
      if (yb)
        kinds_[n] = NodeKind::Contact;
      else if (xb)
        kinds_[n] = NodeKind::Insulator;
      if (xb) areas_[n] *= 0.5;
      if (yb) areas_[n] *= 0.5;
    }
  }

  weights_.assign(num_links(), 1.0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i)
      if (j == 0 || j + 1 == ny) weights_[xlink(i, j)] = 0.5;
  for (std::size_t j = 0; j + 1 < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      if (i == 0 || i + 1 == nx) weights_[ylink(i, j)] = 0.5;

  boundary_.reserve(2 * (nx - 1) + 2 * (ny - 1));
  for (std::size_t i = 0; i + 1 < nx; ++i) boundary_.push_back(node(i, 0));
  for (std::size_t j = 0; j + 1 < ny; ++j) boundary_.push_back(node(nx - 1, j));
  for (std::size_t i = nx - 1; i > 0; --i) boundary_.push_back(node(i, ny - 1));
  for (std::size_t j = ny - 1; j > 0; --j) boundary_.push_back(node(0, j));
}

std::array<std::size_t, 2> Grid::link_nodes(std::size_t l) const {
  if (l < num_xlinks()) {
    const std::size_t j = l / (nx_ - 1), i = l % (nx_ - 1);
    return {node(i, j), node(i + 1, j)};
  }
  const std::size_t k = l - num_xlinks();
  const std::size_t j = k / nx_, i = k % nx_;
  return {node(i, j), node(i, j + 1)};
}

double Grid::arclength(std::size_t i, std::size_t j) const {
  const double lx = Lx(), ly = Ly();
  if (j == 0) return x(i);
  if (i + 1 == nx_) return lx + y(j);
  if (j + 1 == ny_) return lx + ly + (lx - x(i));
  if (i == 0) return 2 * lx + ly + (ly - y(j));
  throw DomainError("arclength requested for an interior node");
}

WireDomain build_wire_domain(double Lx, double Ly, std::size_t nx, std::size_t ny) {
  if (!(Lx > 0.0) || !(Ly > 0.0) || !std::isfinite(Lx) || !std::isfinite(Ly))
    throw GeometryError("domain lengths must be positive and finite");
  if (nx < 8 || ny < 8) throw GeometryError("need at least 8 nodes per direction");
  const double hx = Lx / double(nx - 1);
  const double hy = Ly / double(ny - 1);
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
    throw MeshAspectError("non-square cells: Lx/(nx-1) = " + std::to_string(hx) +
                          " but Ly/(ny-1) = " + std::to_string(hy));

  WireDomain d;
  d.spec.Lx = Lx;
  d.spec.Ly = Ly;
  d.spec.segments = {Segment{Side::Bottom, BoundaryKind::Contact, 0.0, Lx},
                     Segment{Side::Right, BoundaryKind::Insulator, Lx, Ly},
                     Segment{Side::Top, BoundaryKind::Contact, Lx + Ly, Lx},
                     Segment{Side::Left, BoundaryKind::Insulator, 2 * Lx + Ly, Ly}};
  d.grid = Grid(nx, ny, hx);
  return d;
}

double boundary_portion_length(const DomainSpec& domain, double s_from, double s_to) {
  const double P = domain.perimeter();
  if (!(s_from >= 0.0 && s_from < P) || !(s_to >= 0.0 && s_to < P))
    throw DomainError("arclength outside [0, perimeter)");
  double d = s_to - s_from;
  if (d < 0.0) d += P;
  return d;
}

CurrentProfile CurrentProfile::zero(const Grid& grid) {
  return per_contact(grid, 0.0, 0.0);
}

CurrentProfile CurrentProfile::constant(const Grid& grid, double J0) {
  return per_contact(grid, J0, -J0);
}

CurrentProfile CurrentProfile::per_contact(const Grid& grid, double J_bottom, double J_top) {
  CurrentProfile p;
  p.bottom.assign(grid.nx(), J_bottom);
  p.top.assign(grid.nx(), J_top);
  return p;
}

CurrentProfile CurrentProfile::bump(const Grid& grid, double J0) {
  CurrentProfile p;
  p.bottom.resize(grid.nx());
  p.top.resize(grid.nx());
  const double L = grid.Lx();
  for (std::size_t i = 0; i < grid.nx(); ++i) {
    const double v = J0 * (1.0 - std::cos(2.0 * std::numbers::pi * grid.x(i) / L));
    p.bottom[i] = v;
    p.top[i] = -v;
  }
  return p;
}

CurrentProfile CurrentProfile::cosine(const Grid& grid, double J0, double a, double b) {
  const double L = grid.Lx();
  return sampled(
      grid, [=](double x) { return J0 * (1.0 + a * std::cos(std::numbers::pi * x / L)); },
      [=](double x) { return -J0 * (1.0 + b * std::cos(std::numbers::pi * x / L)); });
}

CurrentProfile CurrentProfile::sampled(const Grid& grid, const std::function<double(double)>& bottom,
                                       const std::function<double(double)>& top) {
  CurrentProfile p;
  p.bottom.resize(grid.nx());
  p.top.resize(grid.nx());
  for (std::size_t i = 0; i < grid.nx(); ++i) {
    p.bottom[i] = bottom(grid.x(i));
    p.top[i] = top(grid.x(i));
  }
  return p;
}

CurrentProfile CurrentProfile::scaled(double factor) const {
  CurrentProfile p = *this;
  for (auto& v : p.bottom) v *= factor;
  for (auto& v : p.top) v *= factor;
  return p;
}

double CurrentProfile::max_abs() const {
  double m = 0.0;
  for (double v : bottom) m = std::max(m, std::abs(v));
  for (double v : top) m = std::max(m, std::abs(v));
  return m;
}

double current_at(const Grid& grid, const CurrentProfile& J, std::size_t i, std::size_t j) {
  if (j == 0) return J.bottom[i];
  if (j + 1 == grid.ny()) return J.top[i];
  return 0.0;
}

std::vector<double> boundary_segment_integrals(const Grid& grid, const CurrentProfile& J) {
  const auto& b = grid.boundary_nodes();
  const std::size_t N = b.size();
  std::vector<double> seg(N, 0.0);
  const double h = grid.h();
  for (std::size_t k = 0; k < N; ++k) {
    const auto n0 = b[k], n1 = b[(k + 1) % N];
    const auto j0 = grid.node_j(n0), j1 = grid.node_j(n1);
    // Contact segments are the horizontal ones on y=0 or y=Ly.
    if (j0 == j1 && (j0 == 0 || j0 + 1 == grid.ny())) {
      const double a = current_at(grid, J, grid.node_i(n0), j0);
      const double c = current_at(grid, J, grid.node_i(n1), j1);
      seg[k] = 0.5 * h * (a + c);
    }
  }
  return seg;
}

ValidationReport validate_current(const CurrentProfile& profile, const WireDomain& domain) {
  const Grid& g = domain.grid;
  ValidationReport r;
  r.finite = profile.bottom.size() == g.nx() && profile.top.size() == g.nx();
  if (!r.finite) return r;
  for (double v : profile.bottom) r.finite = r.finite && std::isfinite(v);
  for (double v : profile.top) r.finite = r.finite && std::isfinite(v);
  if (!r.finite) return r;

  auto trapz = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) s += 0.5 * g.h() * (v[i] + v[i + 1]);
    return s;
  };
  auto constant_sign = [](const std::vector<double>& v) {
    bool pos = false, neg = false;
    for (double x : v) {
      pos = pos || x > 0.0;
      neg = neg || x < 0.0;
    }
    return !(pos && neg);
  };
  r.totals = {trapz(profile.bottom), trapz(profile.top)};
  r.total_residual = std::abs(r.totals[0] + r.totals[1]);
  r.zero_total =
      r.total_residual <= 1e-10 * profile.max_abs() * domain.spec.contact_length();
  r.sign_bottom = constant_sign(profile.bottom);
  r.sign_top = constant_sign(profile.top);
  return r;
}

}  // namespace glwire
