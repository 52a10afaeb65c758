#pragma once

// Prefactored sparse solvers for the scalar elliptic problems that recur in
// the simulator: pure Neumann on nodes, Dirichlet on nodes (optionally with a
// nonnegative potential), and Dirichlet on the plaquette dual grid.

#include <memory>
#include <span>

#include "glwire/operators.hpp"

namespace glwire {

/// Solves K u = f for the weighted stiffness matrix K (pure Neumann). The
/// right-hand side is projected onto the range of K (sum f = 0) and the
/// solution is returned with zero area-weighted mean.
class NeumannSolver {
public:
  explicit NeumannSolver(const Grid& g);
  ~NeumannSolver();
  NeumannSolver(NeumannSolver&&) noexcept;
  NeumannSolver& operator=(NeumannSolver&&) noexcept;

  RealField solve(std::span<const double> f) const;
  /// |sum f| of the last call, before projection.
  double last_incompatibility() const { return last_incompat_; }
  const Grid& grid() const { return g_; }

private:
  struct Impl;
  Grid g_;
  std::unique_ptr<Impl> impl_;
  mutable double last_incompat_ = 0.0;
};

/// Solves -Delta u + q u = s on interior nodes with u given on the boundary
/// (5-point stencil). q >= 0 is a node potential, empty means zero.
class DirichletSolver {
public:
  DirichletSolver(const Grid& g, std::span<const double> q = {});
  ~DirichletSolver();
  DirichletSolver(DirichletSolver&&) noexcept;
  DirichletSolver& operator=(DirichletSolver&&) noexcept;

  /// boundary: node field whose boundary entries are used; source: node field
  /// (interior entries used) or empty for zero.
  RealField solve(std::span<const double> boundary, std::span<const double> source = {}) const;
  /// Max-norm residual of the discrete equations at interior nodes.
  double residual(std::span<const double> u, std::span<const double> source = {}) const;

private:
  struct Impl;
  Grid g_;
  std::unique_ptr<Impl> impl_;
};

/// Solves Delta chi = f on plaquettes with chi = 0 on the domain boundary,
/// imposed by odd reflection across it.
class DualDirichletSolver {
public:
  explicit DualDirichletSolver(const Grid& g);
  ~DualDirichletSolver();
  DualDirichletSolver(DualDirichletSolver&&) noexcept;
  DualDirichletSolver& operator=(DualDirichletSolver&&) noexcept;

  RealField solve(std::span<const double> f) const;

private:
  struct Impl;
  Grid g_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace glwire
