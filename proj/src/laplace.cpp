#include "glwire/laplace.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

#include "glwire/errors.hpp"

namespace glwire {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

template <class Solver>
void factor_or_throw(Solver& s, const SpMat& M, const char* what) {
  s.compute(M);
  if (s.info() != Eigen::Success) throw LinearSolveError(std::string("factorization failed: ") + what);
}

}  // namespace

// ---------------------------------------------------------------- Neumann

struct NeumannSolver::Impl {
  SpMat K;
  Eigen::SimplicialLDLT<SpMat> ldlt;  // on nodes 1..N-1, node 0 pinned
};

NeumannSolver::NeumannSolver(const Grid& g) : g_(g), impl_(std::make_unique<Impl>()) {
  impl_->K = stiffness_matrix(g);
  const auto N = Eigen::Index(g.num_nodes());
  SpMat R = impl_->K.bottomRightCorner(N - 1, N - 1);
  factor_or_throw(impl_->ldlt, R, "Neumann stiffness");
}
NeumannSolver::~NeumannSolver() = default;
NeumannSolver::NeumannSolver(NeumannSolver&&) noexcept = default;
NeumannSolver& NeumannSolver::operator=(NeumannSolver&&) noexcept = default;

RealField NeumannSolver::solve(std::span<const double> f) const {
  const auto N = Eigen::Index(g_.num_nodes());
  Vec F = Eigen::Map<const Vec>(f.data(), N);
  const double s = F.sum();
  last_incompat_ = std::abs(s);
  F.array() -= s / double(N);
  Vec u(N);
  u[0] = 0.0;
  u.tail(N - 1) = impl_->ldlt.solve(F.tail(N - 1));
  if (impl_->ldlt.info() != Eigen::Success) throw LinearSolveError("Neumann solve failed");
  const double res = (impl_->K * u - F).lpNorm<Eigen::Infinity>();
  const double scale = std::max(1.0, F.lpNorm<Eigen::Infinity>());
  if (!(res <= 1e-9 * scale)) throw LinearSolveError("Neumann residual " + std::to_string(res));
  RealField out(u.data(), u.data() + N);
  const double m = mean(g_, out);
  for (auto& v : out) v -= m;
  return out;
}

// ---------------------------------------------------------------- Dirichlet

struct DirichletSolver::Impl {
  std::vector<Eigen::Index> interior_index;  // node -> interior slot or -1
  std::vector<double> q;
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

DirichletSolver::DirichletSolver(const Grid& g, std::span<const double> q)
    : g_(g), impl_(std::make_unique<Impl>()) {
  auto& I = impl_->interior_index;
  I.assign(g.num_nodes(), -1);
  Eigen::Index m = 0;
  for (std::size_t j = 1; j + 1 < g.ny(); ++j)
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) I[g.node(i, j)] = m++;
  impl_->q.assign(q.begin(), q.end());
  if (impl_->q.empty()) impl_->q.assign(g.num_nodes(), 0.0);
  const double h2 = g.h() * g.h();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * std::size_t(m));
  for (std::size_t j = 1; j + 1 < g.ny(); ++j)
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      const auto n = g.node(i, j);
      const auto r = I[n];
      t.emplace_back(r, r, 4.0 + h2 * impl_->q[n]);
      for (auto nb : {g.node(i - 1, j), g.node(i + 1, j), g.node(i, j - 1), g.node(i, j + 1)})
        if (I[nb] >= 0) t.emplace_back(r, I[nb], -1.0);
    }
  SpMat M(m, m);
  M.setFromTriplets(t.begin(), t.end());
  factor_or_throw(impl_->ldlt, M, "Dirichlet Laplacian");
}
DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

RealField DirichletSolver::solve(std::span<const double> boundary, std::span<const double> source) const {
  const auto& I = impl_->interior_index;
  const double h2 = g_.h() * g_.h();
  Eigen::Index m = 0;
  for (auto v : I) m += v >= 0;
  Vec b = Vec::Zero(m);
  for (std::size_t j = 1; j + 1 < g_.ny(); ++j)
    for (std::size_t i = 1; i + 1 < g_.nx(); ++i) {
      const auto n = g_.node(i, j);
      double rhs = source.empty() ? 0.0 : h2 * source[n];
      for (auto nb : {g_.node(i - 1, j), g_.node(i + 1, j), g_.node(i, j - 1), g_.node(i, j + 1)})
        if (I[nb] < 0) rhs += boundary[nb];
      b[I[n]] = rhs;
    }
  Vec x = impl_->ldlt.solve(b);
  if (impl_->ldlt.info() != Eigen::Success) throw LinearSolveError("Dirichlet solve failed");
  RealField u(g_.num_nodes());
  for (std::size_t n = 0; n < u.size(); ++n) u[n] = I[n] >= 0 ? x[I[n]] : boundary[n];
  const double res = residual(u, source);
  double scale = 1.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  if (!(res * h2 <= 1e-10 * scale)) throw LinearSolveError("Dirichlet residual " + std::to_string(res));
  return u;
}

double DirichletSolver::residual(std::span<const double> u, std::span<const double> source) const {
  const double h2 = g_.h() * g_.h();
  double r = 0.0;
  for (std::size_t j = 1; j + 1 < g_.ny(); ++j)
    for (std::size_t i = 1; i + 1 < g_.nx(); ++i) {
      const auto n = g_.node(i, j);
      const double lap = (u[g_.node(i - 1, j)] + u[g_.node(i + 1, j)] + u[g_.node(i, j - 1)] +
                          u[g_.node(i, j + 1)] - 4.0 * u[n]) / h2;
      const double s = source.empty() ? 0.0 : source[n];
      r = std::max(r, std::abs(-lap + impl_->q[n] * u[n] - s));
    }
  return r;
}

// ---------------------------------------------------------------- dual grid

struct DualDirichletSolver::Impl {
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

DualDirichletSolver::DualDirichletSolver(const Grid& g) : g_(g), impl_(std::make_unique<Impl>()) {
  const std::size_t px = g.nx() - 1, py = g.ny() - 1;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * g.num_plaquettes());
  for (std::size_t j = 0; j < py; ++j)
    for (std::size_t i = 0; i < px; ++i) {
      const auto p = Eigen::Index(g.plaquette(i, j));
      double diag = 4.0;
      // Missing neighbours are odd ghosts, which adds one more to the diagonal.
      if (i == 0) diag += 1.0; else t.emplace_back(p, Eigen::Index(g.plaquette(i - 1, j)), -1.0);
      if (i + 1 == px) diag += 1.0; else t.emplace_back(p, Eigen::Index(g.plaquette(i + 1, j)), -1.0);
      if (j == 0) diag += 1.0; else t.emplace_back(p, Eigen::Index(g.plaquette(i, j - 1)), -1.0);
      if (j + 1 == py) diag += 1.0; else t.emplace_back(p, Eigen::Index(g.plaquette(i, j + 1)), -1.0);
      t.emplace_back(p, p, diag);
    }
  const auto P = Eigen::Index(g.num_plaquettes());
  SpMat M(P, P);
  M.setFromTriplets(t.begin(), t.end());
  factor_or_throw(impl_->ldlt, M, "dual Dirichlet Laplacian");
}
DualDirichletSolver::~DualDirichletSolver() = default;
DualDirichletSolver::DualDirichletSolver(DualDirichletSolver&&) noexcept = default;
DualDirichletSolver& DualDirichletSolver::operator=(DualDirichletSolver&&) noexcept = default;

RealField DualDirichletSolver::solve(std::span<const double> f) const {
  const auto P = Eigen::Index(g_.num_plaquettes());
  const double h2 = g_.h() * g_.h();
  Vec b = -h2 * Eigen::Map<const Vec>(f.data(), P);
  Vec x = impl_->ldlt.solve(b);
  if (impl_->ldlt.info() != Eigen::Success) throw LinearSolveError("dual Dirichlet solve failed");
  return RealField(x.data(), x.data() + P);
}

}  // namespace glwire
