#pragma once

// Rectangular wire geometry: contacts on the horizontal edges, insulators on
// the vertical edges, uniform square-cell node mesh.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace glwire {

enum class Side { Bottom, Right, Top, Left };
enum class BoundaryKind { Contact, Insulator };

/// One straight boundary piece, oriented counterclockwise.
struct Segment {
  Side side;
  BoundaryKind kind;
  double s_begin;  // arclength at the start, origin at corner (0,0)
  double length;
};

struct DomainSpec {
  double Lx = 1.0;
  double Ly = 1.0;
  std::array<Segment, 4> segments{};  // bottom, right, top, left

  double perimeter() const { return 2.0 * (Lx + Ly); }
  double contact_length() const { return 2.0 * Lx; }
};

enum class NodeKind { Interior, Contact, Insulator };

/// Uniform Cartesian mesh. Node (i,j) sits at (i*h, j*h).
///
/// Links: x-links (i,j)->(i+1,j) come first, then y-links (i,j)->(i,j+1).
/// Plaquette (i,j) is the cell with lower-left node (i,j).
class Grid {
public:
  Grid() = default;
  Grid(std::size_t nx, std::size_t ny, double h);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double h() const { return h_; }
  double Lx() const { return h_ * double(nx_ - 1); }
  double Ly() const { return h_ * double(ny_ - 1); }

  std::size_t num_nodes() const { return nx_ * ny_; }
  std::size_t num_xlinks() const { return (nx_ - 1) * ny_; }
  std::size_t num_ylinks() const { return nx_ * (ny_ - 1); }
  std::size_t num_links() const { return num_xlinks() + num_ylinks(); }
  std::size_t num_plaquettes() const { return (nx_ - 1) * (ny_ - 1); }

  std::size_t node(std::size_t i, std::size_t j) const { return j * nx_ + i; }
  std::size_t xlink(std::size_t i, std::size_t j) const { return j * (nx_ - 1) + i; }
  std::size_t ylink(std::size_t i, std::size_t j) const { return num_xlinks() + j * nx_ + i; }
  std::size_t plaquette(std::size_t i, std::size_t j) const { return j * (nx_ - 1) + i; }

  std::size_t node_i(std::size_t n) const { return n % nx_; }
  std::size_t node_j(std::size_t n) const { return n / nx_; }
  double x(std::size_t i) const { return h_ * double(i); }
  double y(std::size_t j) const { return h_ * double(j); }

  bool is_xlink(std::size_t l) const { return l < num_xlinks(); }
  /// Endpoints of link l, oriented in the +x or +y direction.
  std::array<std::size_t, 2> link_nodes(std::size_t l) const;

  NodeKind kind(std::size_t n) const { return kinds_[n]; }
  bool is_contact(std::size_t n) const { return kinds_[n] == NodeKind::Contact; }
  bool is_boundary(std::size_t i, std::size_t j) const {
    return i == 0 || j == 0 || i + 1 == nx_ || j + 1 == ny_;
  }

  /// Dual-cell area of a node: h^2 in the interior, h^2/2 on edges, h^2/4 at corners.
  double node_area(std::size_t n) const { return areas_[n]; }
  /// Dual-edge weight of a link: 1/2 for links lying on the boundary, 1 otherwise.
  double link_weight(std::size_t l) const { return weights_[l]; }
  bool link_on_boundary(std::size_t l) const { return weights_[l] < 1.0; }

  std::span<const double> node_areas() const { return areas_; }
  std::span<const double> link_weights() const { return weights_; }

  /// Boundary nodes in counterclockwise order starting at corner (0,0).
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }
  /// Counterclockwise arclength of a boundary node (origin at (0,0)).
  double arclength(std::size_t i, std::size_t j) const;

  double total_area() const { return Lx() * Ly(); }

private:
  std::size_t nx_ = 0, ny_ = 0;
  double h_ = 0.0;
  std::vector<NodeKind> kinds_;
  std::vector<double> areas_;
  std::vector<double> weights_;
  std::vector<std::size_t> boundary_;
};

struct WireDomain {
  DomainSpec spec;
  Grid grid;
};

/// Builds the rectangle [0,Lx]x[0,Ly] with contacts on y=0 and y=Ly.
/// Throws MeshAspectError when the cells are not square and GeometryError
/// for degenerate sizes.
WireDomain build_wire_domain(double Lx, double Ly, std::size_t nx, std::size_t ny);

/// Length of the counterclockwise boundary portion from s_from to s_to.
double boundary_portion_length(const DomainSpec& domain, double s_from, double s_to);

/// Current density on the contacts, sampled at the contact nodes.
/// bottom[i] is J at (x_i, 0), top[i] is J at (x_i, Ly). J vanishes on the
/// insulators by convention.
struct CurrentProfile {
  std::vector<double> bottom;
  std::vector<double> top;

  static CurrentProfile zero(const Grid& grid);
  /// +J0 on the bottom contact, -J0 on the top contact.
  static CurrentProfile constant(const Grid& grid, double J0);
  static CurrentProfile per_contact(const Grid& grid, double J_bottom, double J_top);
  /// J0 (1 - cos(2 pi x / Lx)) on the bottom, the negative on top. Mean
  /// value J0 on each contact; vanishes with zero slope at the corners.
  static CurrentProfile bump(const Grid& grid, double J0);
  /// J0 (1 + a cos(pi x / Lx)) on the bottom, -J0 (1 + b cos(pi x / Lx)) on
  /// top, |a|, |b| < 1. Smooth up to the corners with nonzero corner values.
  static CurrentProfile cosine(const Grid& grid, double J0, double a, double b);
  /// Samples arbitrary functions of x on the two contacts.
  static CurrentProfile sampled(const Grid& grid, const std::function<double(double)>& bottom,
                                const std::function<double(double)>& top);

  CurrentProfile scaled(double factor) const;
  double max_abs() const;
};

/// Current value at a boundary node, zero on insulator nodes. At a corner
/// the contact-side value is returned.
double current_at(const Grid& grid, const CurrentProfile& J, std::size_t i, std::size_t j);

/// Exact (trapezoidal) integral of J over each boundary segment between
/// consecutive boundary nodes, in counterclockwise order. Entry k covers
/// boundary_nodes()[k] -> boundary_nodes()[k+1 mod N]. Insulator segments
/// carry zero even when a corner value is nonzero.
std::vector<double> boundary_segment_integrals(const Grid& grid, const CurrentProfile& J);

struct ValidationReport {
  bool zero_total = false;
  double total_residual = 0.0;  // |int J|
  bool sign_bottom = false;
  bool sign_top = false;
  bool finite = false;
  std::array<double, 2> totals{};  // bottom, top

  bool ok() const { return zero_total && sign_bottom && sign_top && finite; }
};

ValidationReport validate_current(const CurrentProfile& profile, const WireDomain& domain);

}  // namespace glwire
