#include "glwire/operators.hpp"

#include <cmath>

namespace glwire {

RealField gradient(const Grid& g, std::span<const double> u) {
  RealField V(g.num_links());
  const double inv_h = 1.0 / g.h();
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const auto [a, b] = g.link_nodes(l);
    V[l] = (u[b] - u[a]) * inv_h;
  }
  return V;
}

RealField flux(const Grid& g, std::span<const double> V) {
  RealField f(g.num_nodes(), 0.0);
  const double h = g.h();
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const auto [a, b] = g.link_nodes(l);
    const double q = g.link_weight(l) * h * V[l];
    f[a] += q;
    f[b] -= q;
  }
  return f;
}

RealField divergence(const Grid& g, std::span<const double> V) {
  RealField f = flux(g, V);
  for (std::size_t n = 0; n < f.size(); ++n) f[n] /= g.node_area(n);
  return f;
}

RealField curl(const Grid& g, std::span<const double> A) {
  RealField B(g.num_plaquettes());
  const double inv_h = 1.0 / g.h();
  for (std::size_t j = 0; j + 1 < g.ny(); ++j)
    for (std::size_t i = 0; i + 1 < g.nx(); ++i)
      B[g.plaquette(i, j)] = (A[g.xlink(i, j)] + A[g.ylink(i + 1, j)] -
                              A[g.xlink(i, j + 1)] - A[g.ylink(i, j)]) *
                             inv_h;
  return B;
}

RealField curl_scalar(const Grid& g, std::span<const double> B, std::span<const double> boundary_B) {
  RealField V(g.num_links());
  const double h = g.h();
  const std::size_t nx = g.nx(), ny = g.ny();
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const auto l = g.xlink(i, j);
      if (j == 0)
        V[l] = (B[g.plaquette(i, 0)] - boundary_B[l]) / (0.5 * h);
      else if (j + 1 == ny)
        V[l] = (boundary_B[l] - B[g.plaquette(i, j - 1)]) / (0.5 * h);
      else
        V[l] = (B[g.plaquette(i, j)] - B[g.plaquette(i, j - 1)]) / h;
    }
  }
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const auto l = g.ylink(i, j);
      if (i == 0)
        V[l] = -(B[g.plaquette(0, j)] - boundary_B[l]) / (0.5 * h);
      else if (i + 1 == nx)
        V[l] = -(boundary_B[l] - B[g.plaquette(i - 1, j)]) / (0.5 * h);
      else
        V[l] = -(B[g.plaquette(i, j)] - B[g.plaquette(i - 1, j)]) / h;
    }
  }
  return V;
}

RealField node_to_plaquette(const Grid& g, std::span<const double> u) {
  RealField B(g.num_plaquettes());
  for (std::size_t j = 0; j + 1 < g.ny(); ++j)
    for (std::size_t i = 0; i + 1 < g.nx(); ++i)
      B[g.plaquette(i, j)] = 0.25 * (u[g.node(i, j)] + u[g.node(i + 1, j)] +
                                     u[g.node(i, j + 1)] + u[g.node(i + 1, j + 1)]);
  return B;
}

RealField plaquette_to_node(const Grid& g, std::span<const double> B,
                            std::span<const double> boundary_node_value) {
  RealField u(g.num_nodes());
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const auto n = g.node(i, j);
      if (g.is_boundary(i, j)) {
        u[n] = boundary_node_value[n];
      } else {
        u[n] = 0.25 * (B[g.plaquette(i - 1, j - 1)] + B[g.plaquette(i, j - 1)] +
                       B[g.plaquette(i - 1, j)] + B[g.plaquette(i, j)]);
      }
    }
  return u;
}

RealField node_to_link(const Grid& g, std::span<const double> u) {
  RealField V(g.num_links());
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const auto [a, b] = g.link_nodes(l);
    V[l] = 0.5 * (u[a] + u[b]);
  }
  return V;
}

Eigen::SparseMatrix<double> stiffness_matrix(const Grid& g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * g.num_links());
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const auto [a, b] = g.link_nodes(l);
    const double w = g.link_weight(l);
    const auto ia = Eigen::Index(a), ib = Eigen::Index(b);
    t.emplace_back(ia, ia, w);
    t.emplace_back(ib, ib, w);
    t.emplace_back(ia, ib, -w);
    t.emplace_back(ib, ia, -w);
  }
  Eigen::SparseMatrix<double> K(Eigen::Index(g.num_nodes()), Eigen::Index(g.num_nodes()));
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

double integrate(const Grid& g, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) s += g.node_area(n) * u[n];
  return s;
}

double mean(const Grid& g, std::span<const double> u) { return integrate(g, u) / g.total_area(); }

double l2_norm(const Grid& g, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) s += g.node_area(n) * u[n] * u[n];
  return std::sqrt(s);
}

double l2_norm(const Grid& g, std::span<const cplx> u) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) s += g.node_area(n) * std::norm(u[n]);
  return std::sqrt(s);
}

double link_l2_norm(const Grid& g, std::span<const double> V, bool interior_only) {
  double s = 0.0;
  const double h2 = g.h() * g.h();
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    if (interior_only && g.link_on_boundary(l)) continue;
    s += g.link_weight(l) * h2 * V[l] * V[l];
  }
  return std::sqrt(s);
}

double boundary_mean(const Grid& g, std::span<const double> u) {
  double s = 0.0;
  for (auto n : g.boundary_nodes()) s += u[n];
  return s * g.h() / (2.0 * (g.Lx() + g.Ly()));
}

}  // namespace glwire
