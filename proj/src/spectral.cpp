#include "glwire/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "glwire/errors.hpp"

namespace glwire {

namespace {

template <class Scalar>
using SpMat = Eigen::SparseMatrix<Scalar>;

template <class Scalar>
Scalar random_entry(std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  if constexpr (std::is_same_v<Scalar, double>) {
    return N(rng);
  } else {
    const double re = N(rng);
    return Scalar(re, N(rng));
  }
}

/// Lowest eigenpair of K x = lambda M x (K Hermitian positive definite, M
/// Hermitian positive definite) by block inverse iteration with Rayleigh-Ritz.
/// After a few sweeps the operator is shifted just below the current Ritz
/// value, which separates the ground state from a dense cluster above it.
template <class Scalar>
EigResult ground_state(const SpMat<Scalar>& K, const SpMat<Scalar>& M, const Eigen::VectorXd& mdiag,
                       const EigOptions& opt, const char* what) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const long n = K.rows();
  if (n == 0) throw DomainError(std::string(what) + ": no unknowns");
  const long k = std::min<long>(opt.block, n);

  std::mt19937_64 rng(opt.seed);
  Mat X(n, k);
  for (long j = 0; j < k; ++j)
    for (long i = 0; i < n; ++i) X(i, j) = random_entry<Scalar>(rng);

  Eigen::SimplicialLDLT<SpMat<Scalar>> solver(K);
  if (solver.info() != Eigen::Success) throw EigSolveError(std::string(what) + ": factorization failed");
  bool shifted = false;

  EigResult out;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Mat Y = solver.solve(M * X);
    Mat G = Y.adjoint() * (M * Y);
    G = (G + G.adjoint()) * 0.5;
    Eigen::LLT<Mat> llt(G);
    if (llt.info() != Eigen::Success) throw EigSolveError(std::string(what) + ": block lost rank");
    // Y <- Y U^{-1} with G = U^H U, so that Y^H M Y = I.
    Mat U = llt.matrixU();
    Y = U.adjoint().template triangularView<Eigen::Lower>().solve(Y.adjoint()).adjoint();
    Mat Kr = Y.adjoint() * (K * Y);
    Kr = (Kr + Kr.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat> es(Kr);
    X = Y * es.eigenvectors();
    const double lambda = es.eigenvalues()(0);
    const Vec x = X.col(0);
    const Vec r = K * x - Scalar(lambda) * (M * x);
    double res = 0.0;
    for (long i = 0; i < n; ++i) res += std::norm(r(i)) / mdiag(i);
    res = std::sqrt(res);
    out.value = lambda;
    out.iterations = it;
    out.residual = res;
    if (res <= opt.tol) {
      out.vector.resize(std::size_t(n));
      for (long i = 0; i < n; ++i) out.vector[std::size_t(i)] = cplx(x(i));
      return out;
    }
    if (!shifted && it >= 5 && lambda > 0.0) {
      // The Ritz value is an upper bound; 0.9 of it stays below the ground
      // energy once the leading digit has settled.
      solver.compute(K - Scalar(0.9 * lambda) * M);
      if (solver.info() != Eigen::Success) throw EigSolveError(std::string(what) + ": shifted factorization failed");
      shifted = true;
    }
  }
  throw EigSolveError(std::string(what) + ": no convergence after " + std::to_string(opt.max_iter) +
                      " iterations (residual " + std::to_string(out.residual) + ")");
}

/// Number of eigenvalues below x of the symmetric tridiagonal (d, e).
int sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  int c = 0;
  double q = d[0] - x;
  if (q < 0) ++c;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (q == 0.0) q = 1e-300;
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q < 0) ++c;
  }
  return c;
}

/// Solves (T - s) v = b for the symmetric tridiagonal T = (d, e).
std::vector<double> tridiag_solve(const std::vector<double>& d, const std::vector<double>& e, double s,
                                  std::vector<double> b) {
  const std::size_t n = d.size();
  std::vector<double> c(n, 0.0), m(n);
  m[0] = d[0] - s;
  for (std::size_t i = 1; i < n; ++i) {
    if (m[i - 1] == 0.0) m[i - 1] = 1e-300;
    c[i - 1] = e[i - 1] / m[i - 1];
    m[i] = d[i] - s - c[i - 1] * e[i - 1];
    b[i] -= c[i - 1] * b[i - 1];
  }
  if (m[n - 1] == 0.0) m[n - 1] = 1e-300;
  b[n - 1] /= m[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) b[i] = (b[i] - e[i] * b[i + 1]) / m[i];
  return b;
}

}  // namespace

EigResult de_gennes_mu(double xi, double T, double h) {
  if (!(T > 0.0) || !(h > 0.0) || h >= T) throw DomainError("de Gennes truncation needs 0 < h < T");
  // Nodes t_i = i h, i = 0..N-1 (u_N = 0). Energy sum (u_{i+1}-u_i)^2/h +
  // sum m_i V_i u_i^2 with m_0 = h/2 (Neumann end), m_i = h.
  const std::size_t N = std::size_t(std::llround(T / h));
  const double hh = T / double(N);
  std::vector<double> m(N, hh), kd(N, 0.0), ke(N - 1, 0.0);
  m[0] = 0.5 * hh;
  for (std::size_t i = 0; i < N; ++i) {
    const double t = double(i) * hh;
    kd[i] = m[i] * (t - xi) * (t - xi);
    kd[i] += (i == 0 ? 1.0 : 2.0) / hh;
  }
  for (std::size_t i = 0; i + 1 < N; ++i) ke[i] = -1.0 / hh;
  std::vector<double> d(N), e(N - 1);
  for (std::size_t i = 0; i < N; ++i) d[i] = kd[i] / m[i];
  for (std::size_t i = 0; i + 1 < N; ++i) e[i] = ke[i] / std::sqrt(m[i] * m[i + 1]);

  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    hi = std::max(hi, d[i] + (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < N ? std::abs(e[i]) : 0.0));
  EigResult r;
  int it = 0;
  while (hi - lo > 1e-14 * std::max(1.0, hi) && it < 200) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(d, e, mid) >= 1)
      hi = mid;
    else
      lo = mid;
    ++it;
  }
  const double lambda = 0.5 * (lo + hi);
  std::vector<double> v(N, 1.0);
  for (int k = 0; k < 3; ++k) {
    v = tridiag_solve(d, e, lambda - 1e-10 * std::max(1.0, lambda), v);
    double nv = 0.0;
    for (double x : v) nv += x * x;
    nv = std::sqrt(nv);
    for (double& x : v) x /= nv;
  }
  double res = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double Tv = d[i] * v[i];
    if (i > 0) Tv += e[i - 1] * v[i - 1];
    if (i + 1 < N) Tv += e[i] * v[i + 1];
    res += (Tv - lambda * v[i]) * (Tv - lambda * v[i]);
  }
  r.value = lambda;
  r.iterations = it;
  r.residual = std::sqrt(res);
  if (r.residual > 1e-8) throw EigSolveError("de Gennes eigenvector did not converge");
  r.vector.resize(N);
  for (std::size_t i = 0; i < N; ++i) r.vector[i] = v[i] / std::sqrt(m[i]);
  return r;
}

Theta0Result de_gennes_theta0(double T, double h, std::vector<double> xi_grid) {
  if (xi_grid.empty())
    for (int k = 0; k <= 24; ++k) xi_grid.push_back(0.2 + 0.05 * k);
  std::sort(xi_grid.begin(), xi_grid.end());
  Theta0Result out;
  auto mu = [&](double xi) {
    ++out.evaluations;
    return de_gennes_mu(xi, T, h).value;
  };
  for (double xi : xi_grid) {
    out.xi_scan.push_back(xi);
    out.mu_scan.push_back(mu(xi));
  }
  const auto kmin = std::size_t(std::min_element(out.mu_scan.begin(), out.mu_scan.end()) - out.mu_scan.begin());
  double a = xi_grid[kmin > 0 ? kmin - 1 : 0];
  double b = xi_grid[std::min(kmin + 1, xi_grid.size() - 1)];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = mu(c), fd = mu(d);
  while (b - a > 1e-6) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = mu(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = mu(d);
    }
  }
  out.xi0 = 0.5 * (a + b);
  out.theta0 = mu(out.xi0);
  return out;
}

EigResult sector_dn_ground(const SectorProblem& p, const EigOptions& opt) {
  constexpr double pi = std::numbers::pi;
  if (!(p.alpha > 0.0) || p.alpha > pi + 1e-12) throw DomainError("sector angle must lie in (0, pi]");
  if (!(p.h_mesh > 0.0) || !(p.R_trunc > 4.0 * p.h_mesh)) throw DomainError("sector truncation too small");
  const double h = p.h_mesh, R = p.R_trunc;
  const long m = long(std::ceil(R / h));
  const long imin = p.alpha > pi / 2 + 1e-12 ? -m : 0;
  const long nxs = m - imin + 1;
  auto inside = [&](long i, long j) {
    if (j < 0 || i == 0 && j == 0) return false;
    const double x = double(i) * h, y = double(j) * h;
    if (x * x + y * y >= R * R) return false;
    const double th = (j == 0) ? (i > 0 ? 0.0 : pi) : std::atan2(y, x);
    return th < p.alpha - 1e-12;
  };
  std::vector<long> idx(std::size_t(nxs * (m + 1)), -1);
  auto slot = [&](long i, long j) { return std::size_t((j * nxs) + (i - imin)); };
  long n = 0;
  Eigen::VectorXd mass;
  std::vector<double> mv;
  for (long j = 0; j <= m; ++j)
    for (long i = imin; i <= m; ++i)
      if (inside(i, j)) {
        idx[slot(i, j)] = n++;
        mv.push_back(h * h * (j == 0 ? 0.5 : 1.0));
      }
  mass = Eigen::Map<Eigen::VectorXd>(mv.data(), n);

  std::vector<Eigen::Triplet<cplx>> tk;
  auto add_link = [&](long ia, long ja, long ib, long jb, double w, double flux) {
    const long a = (ia >= imin && ia <= m && ja >= 0 && ja <= m) ? idx[slot(ia, ja)] : -1;
    const long b = (ib >= imin && ib <= m && jb >= 0 && jb <= m) ? idx[slot(ib, jb)] : -1;
    if (a < 0 && b < 0) return;
    const cplx U = std::polar(1.0, -flux);
    if (a >= 0) tk.emplace_back(a, a, w);
    if (b >= 0) tk.emplace_back(b, b, w);
    if (a >= 0 && b >= 0) {
      tk.emplace_back(a, b, -w * U);
      tk.emplace_back(b, a, -w * std::conj(U));
    }
  };
  // Symmetric gauge (-y/2, x/2): line integrals -y h/2 along x-links, x h/2 along y-links.
  for (long j = 0; j <= m; ++j)
    for (long i = imin; i <= m; ++i) {
      if (i < m) add_link(i, j, i + 1, j, j == 0 ? 0.5 : 1.0, -0.5 * double(j) * h * h);
      if (j < m) add_link(i, j, i, j + 1, 1.0, 0.5 * double(i) * h * h);
    }
  SpMat<cplx> K(n, n), M(n, n);
  K.setFromTriplets(tk.begin(), tk.end());
  std::vector<Eigen::Triplet<cplx>> tm;
  for (long i = 0; i < n; ++i) tm.emplace_back(i, i, mass(i));
  M.setFromTriplets(tm.begin(), tm.end());
  return ground_state<cplx>(K, M, mass, opt, "sector ground state");
}

EigResult mu_eps(const Grid& g, std::span<const double> A, const Mask& D, double eps, DirichletPart part,
                 const EigOptions& opt) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (count(D) == 0) throw DomainError("empty subdomain");
  const std::size_t nx = g.nx(), ny = g.ny();
  std::vector<long> idx(g.num_nodes(), -1);
  long n = 0;
  std::vector<double> mv;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const auto q = g.node(i, j);
      if (!D[q] || g.is_contact(q)) continue;
      if (part == DirichletPart::All && g.is_boundary(i, j)) continue;
      bool ok = true;
      if (i > 0) ok = ok && D[g.node(i - 1, j)];
      if (i + 1 < nx) ok = ok && D[g.node(i + 1, j)];
      if (j > 0) ok = ok && D[g.node(i, j - 1)];
      if (j + 1 < ny) ok = ok && D[g.node(i, j + 1)];
      if (!ok) continue;
      idx[q] = n++;
      mv.push_back(g.node_area(q));
    }
  if (n == 0) throw DomainError("subdomain has no free nodes");
  const double e2 = eps * eps;
  std::vector<Eigen::Triplet<cplx>> tk;
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const auto [na, nb] = g.link_nodes(l);
    const long a = idx[na], b = idx[nb];
    if (a < 0 && b < 0) continue;
    const double w = e2 * g.link_weight(l);
    const cplx U = std::polar(1.0, -g.h() * A[l] / eps);
    if (a >= 0) tk.emplace_back(a, a, w);
    if (b >= 0) tk.emplace_back(b, b, w);
    if (a >= 0 && b >= 0) {
      tk.emplace_back(a, b, -w * U);
      tk.emplace_back(b, a, -w * std::conj(U));
    }
  }
  SpMat<cplx> K(n, n), M(n, n);
  K.setFromTriplets(tk.begin(), tk.end());
  std::vector<Eigen::Triplet<cplx>> tm;
  for (long i = 0; i < n; ++i) tm.emplace_back(i, i, mv[std::size_t(i)]);
  M.setFromTriplets(tm.begin(), tm.end());
  const Eigen::VectorXd mass = Eigen::Map<Eigen::VectorXd>(mv.data(), n);
  EigResult r = ground_state<cplx>(K, M, mass, opt, "mu_eps");
  // Scatter back onto the grid.
  ComplexField full(g.num_nodes(), cplx(0.0));
  for (std::size_t q = 0; q < g.num_nodes(); ++q)
    if (idx[q] >= 0) full[q] = r.vector[std::size_t(idx[q])];
  r.vector = std::move(full);
  return r;
}

BoundReport verify_lower_bound(const Grid& g, std::span<const double> A, std::span<const double> a, const Mask& D,
                               const std::vector<double>& eps_list, double theta0, const EigOptions& opt) {
  BoundReport rep;
  rep.theta0 = theta0;
  const RealField B = curl(g, A);
  rep.b = std::numeric_limits<double>::infinity();
  rep.b_prime = std::numeric_limits<double>::infinity();
  const std::size_t px = g.nx() - 1, py = g.ny() - 1;
  for (std::size_t j = 0; j < py; ++j)
    for (std::size_t i = 0; i < px; ++i) {
      const bool in = D[g.node(i, j)] && D[g.node(i + 1, j)] && D[g.node(i, j + 1)] && D[g.node(i + 1, j + 1)];
      if (!in) continue;
      const double v = B[g.plaquette(i, j)];
      rep.b = std::min(rep.b, v);
      if (i == 0 || i + 1 == px) rep.b_prime = std::min(rep.b_prime, std::abs(v));
    }
  if (!(rep.b > 0.0) || !std::isfinite(rep.b)) throw DomainError("curl A must be positive on D");
  // Max difference quotient of a between neighbouring parallel links.
  const std::size_t nx = g.nx(), ny = g.ny();
  const double h = g.h();
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double v = a[g.xlink(i, j)];
      if (i + 2 < nx) rep.grad_a_inf = std::max(rep.grad_a_inf, std::abs(a[g.xlink(i + 1, j)] - v) / h);
      if (j + 1 < ny) rep.grad_a_inf = std::max(rep.grad_a_inf, std::abs(a[g.xlink(i, j + 1)] - v) / h);
    }
  for (std::size_t j = 0; j + 1 < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double v = a[g.ylink(i, j)];
      if (i + 1 < nx) rep.grad_a_inf = std::max(rep.grad_a_inf, std::abs(a[g.ylink(i + 1, j)] - v) / h);
      if (j + 2 < ny) rep.grad_a_inf = std::max(rep.grad_a_inf, std::abs(a[g.ylink(i, j + 1)] - v) / h);
    }
  const double floor_b = std::min(rep.b, theta0 * rep.b_prime);
  double ref = std::numeric_limits<double>::quiet_NaN();
  rep.bounded = true;
  for (double eps : eps_list) {
    RealField Ap(A.begin(), A.end());
    const double s = std::sqrt(eps);
    for (std::size_t l = 0; l < Ap.size(); ++l) Ap[l] += s * a[l];
    const double lhs = mu_eps(g, Ap, D, eps, DirichletPart::OffInsulators, opt).value;
    const double c = (1.0 - lhs / (eps * floor_b)) * std::pow(eps, -1.0 / 3.0) / (1.0 + rep.grad_a_inf * rep.grad_a_inf);
    const bool out = eps >= 1.0;
    rep.eps.push_back(eps);
    rep.lhs.push_back(lhs);
    rep.C_hat.push_back(c);
    rep.out_of_regime.push_back(out);
    if (out) continue;
    if (std::isnan(ref))
      ref = std::max(std::abs(c), 0.25);
    else if (c > 2.0 * ref)
      rep.bounded = false;
  }
  return rep;
}

EigResult lambda_dirichlet(const Grid& g, const EigOptions& opt) {
  std::vector<long> idx(g.num_nodes(), -1);
  long n = 0;
  for (std::size_t j = 1; j + 1 < g.ny(); ++j)
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) idx[g.node(i, j)] = n++;
  std::vector<Eigen::Triplet<double>> tk, tm;
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const auto [na, nb] = g.link_nodes(l);
    const long a = idx[na], b = idx[nb];
    if (a < 0 && b < 0) continue;
    if (a >= 0) tk.emplace_back(a, a, 1.0);
    if (b >= 0) tk.emplace_back(b, b, 1.0);
    if (a >= 0 && b >= 0) {
      tk.emplace_back(a, b, -1.0);
      tk.emplace_back(b, a, -1.0);
    }
  }
  const double h2 = g.h() * g.h();
  for (long i = 0; i < n; ++i) tm.emplace_back(i, i, h2);
  SpMat<double> K(n, n), M(n, n);
  K.setFromTriplets(tk.begin(), tk.end());
  M.setFromTriplets(tm.begin(), tm.end());
  return ground_state<double>(K, M, Eigen::VectorXd::Constant(n, h2), opt, "Dirichlet Laplacian");
}

EigResult lambda_curl(const Grid& g, const EigOptions& opt) {
  const long px = long(g.nx()) - 1, py = long(g.ny()) - 1;
  const long n = px * py;
  const double h = g.h();
  // P: plaquette stream function -> link field, odd ghosts outside.
  std::vector<Eigen::Triplet<double>> tp;
  auto put = [&](long row, long i, long j, long i_in, long j_in, double s) {
    if (i < 0 || j < 0 || i >= px || j >= py)
      tp.emplace_back(row, j_in * px + i_in, -s);
    else
      tp.emplace_back(row, j * px + i, s);
  };
  for (long j = 0; j < long(g.ny()); ++j)
    for (long i = 0; i < px; ++i) {
      const long row = long(g.xlink(std::size_t(i), std::size_t(j)));
      put(row, i, j, i, std::min(j, py - 1), -1.0 / h);
      put(row, i, j - 1, i, std::max(j - 1, 0L), 1.0 / h);
    }
  for (long j = 0; j < py; ++j)
    for (long i = 0; i < long(g.nx()); ++i) {
      const long row = long(g.ylink(std::size_t(i), std::size_t(j)));
      put(row, i, j, std::min(i, px - 1), j, 1.0 / h);
      put(row, i - 1, j, std::max(i - 1, 0L), j, -1.0 / h);
    }
  SpMat<double> P(long(g.num_links()), n);
  P.setFromTriplets(tp.begin(), tp.end());
  std::vector<Eigen::Triplet<double>> tc;
  for (long j = 0; j < py; ++j)
    for (long i = 0; i < px; ++i) {
      const long r = j * px + i;
      const auto I = std::size_t(i), J = std::size_t(j);
      tc.emplace_back(r, long(g.xlink(I, J)), 1.0 / h);
      tc.emplace_back(r, long(g.ylink(I + 1, J)), 1.0 / h);
      tc.emplace_back(r, long(g.xlink(I, J + 1)), -1.0 / h);
      tc.emplace_back(r, long(g.ylink(I, J)), -1.0 / h);
    }
  SpMat<double> C(n, long(g.num_links()));
  C.setFromTriplets(tc.begin(), tc.end());
  std::vector<Eigen::Triplet<double>> tw;
  for (std::size_t l = 0; l < g.num_links(); ++l) tw.emplace_back(long(l), long(l), g.link_weight(l) * h * h);
  SpMat<double> W(long(g.num_links()), long(g.num_links()));
  W.setFromTriplets(tw.begin(), tw.end());
  const SpMat<double> CP = C * P;
  SpMat<double> K = SpMat<double>(CP.transpose()) * CP * (h * h);
  SpMat<double> M = SpMat<double>(P.transpose()) * W * P;
  Eigen::VectorXd md = M.diagonal();
  return ground_state<double>(K, M, md, opt, "curl eigenvalue");
}

LambdaPair lambda_vs_lambdaD(double Lx, double Ly, double h, const EigOptions& opt) {
  const auto nx = std::size_t(std::llround(Lx / h)) + 1, ny = std::size_t(std::llround(Ly / h)) + 1;
  auto d = build_wire_domain(Lx, Ly, nx, ny);
  LambdaPair out;
  out.lambdaD = lambda_dirichlet(d.grid, opt).value;
  out.lambda = lambda_curl(d.grid, opt).value;
  return out;
}

}  // namespace glwire
