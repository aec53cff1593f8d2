#include "solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ucprop {

namespace {

bool is_boundary(const Grid& g, int i, int j, int k) {
  const auto& c = g.count();
  if (i == 0 || i == c[0] - 1 || j == 0 || j == c[1] - 1) return true;
  if (g.dim() == 3 && (k == 0 || k == c[2] - 1)) return true;
  return false;
}

// Emits the row of the interior stencil at (i, j, k) as (index, value)
// pairs. Shared by the matrix-free apply and the LU assembly so the two
// solve paths discretize identically.
template <class F>
void row_entries(const CoefficientField& cf, int i, int j, int k, F&& emit) {
  const Grid& g = cf.grid;
  const double h = g.h();
  const double inv_h2 = 1.0 / (h * h);
  const double inv_2h = 1.0 / (2.0 * h);
  const int dim = g.dim();
  const std::size_t c = g.index(i, j, k);

  double diag = 0.0;
  const int di[3] = {1, 0, 0};
  const int dj[3] = {0, 1, 0};
  const int dk[3] = {0, 0, 1};
  for (int d = 0; d < dim; ++d) {
    std::size_t p = g.index(i + di[d], j + dj[d], k + dk[d]);
    std::size_t m = g.index(i - di[d], j - dj[d], k - dk[d]);
    double gp = 0.5 * (cf.g_iso[c] + cf.g_iso[p]);
    double gm = 0.5 * (cf.g_iso[c] + cf.g_iso[m]);
    double off_p = -gp * inv_h2;
    double off_m = -gm * inv_h2;
    diag += (gp + gm) * inv_h2;
    if (cf.has_W1()) {
      double w = cf.W1[c * dim + d];
      off_p += w * inv_2h;
      off_m -= w * inv_2h;
    }
    if (cf.has_W2()) {
      double wp = 0.5 * (cf.W2[c * dim + d] + cf.W2[p * dim + d]);
      double wm = 0.5 * (cf.W2[c * dim + d] + cf.W2[m * dim + d]);
      off_p += wp * inv_2h;
      off_m -= wm * inv_2h;
      diag += (wp - wm) * inv_2h;
    }
    emit(p, off_p);
    emit(m, off_m);
  }
  if (cf.g_offdiag != 0.0) {
    // constant g_12 block: -2 g12 d2u/dx1dx2, centered cross stencil
    double w = -2.0 * cf.g_offdiag * 0.25 * inv_h2;
    emit(g.index(i + 1, j + 1, k), w);
    emit(g.index(i - 1, j - 1, k), w);
    emit(g.index(i + 1, j - 1, k), -w);
    emit(g.index(i - 1, j + 1, k), -w);
  }
  if (cf.has_V()) diag += cf.V[c];
  emit(c, diag);
}

// ---- multigrid preconditioner for the symmetric part ----
// M = -div(g grad .) + max(V, 0) with identity boundary rows. Coefficients
// transfer by injection; this only has to precondition, not discretize.

struct MgLevel {
  Grid grid;
  std::vector<double> g_iso;
  std::vector<double> v_plus;   // empty = 0
  std::vector<double> inv_diag;
  // scratch
  std::vector<double> x, b, r;
};

void mg_build_diag(MgLevel& lv) {
  const Grid& g = lv.grid;
  const auto& c = g.count();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  lv.inv_diag.assign(g.num_nodes(), 1.0);
  const int di[3] = {1, 0, 0};
  const int dj[3] = {0, 1, 0};
  const int dk[3] = {0, 0, 1};
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        if (is_boundary(g, i, j, k)) continue;
        std::size_t idx = g.index(i, j, k);
        double d = 0;
        for (int dd = 0; dd < g.dim(); ++dd) {
          double gp = 0.5 * (lv.g_iso[idx] +
                             lv.g_iso[g.index(i + di[dd], j + dj[dd],
                                              k + dk[dd])]);
          double gm = 0.5 * (lv.g_iso[idx] +
                             lv.g_iso[g.index(i - di[dd], j - dj[dd],
                                              k - dk[dd])]);
          d += (gp + gm) * inv_h2;
        }
        if (!lv.v_plus.empty()) d += lv.v_plus[idx];
        lv.inv_diag[idx] = 1.0 / d;
      }
}

void mg_apply(const MgLevel& lv, const std::vector<double>& x,
              std::vector<double>& y) {
  const Grid& g = lv.grid;
  const auto& c = g.count();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  y.resize(x.size());
  const int di[3] = {1, 0, 0};
  const int dj[3] = {0, 1, 0};
  const int dk[3] = {0, 0, 1};
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        std::size_t idx = g.index(i, j, k);
        if (is_boundary(g, i, j, k)) {
          y[idx] = x[idx];
          continue;
        }
        double acc = 0;
        for (int dd = 0; dd < g.dim(); ++dd) {
          std::size_t p = g.index(i + di[dd], j + dj[dd], k + dk[dd]);
          std::size_t m = g.index(i - di[dd], j - dj[dd], k - dk[dd]);
          double gp = 0.5 * (lv.g_iso[idx] + lv.g_iso[p]);
          double gm = 0.5 * (lv.g_iso[idx] + lv.g_iso[m]);
          acc += (gp * (x[idx] - x[p]) + gm * (x[idx] - x[m])) * inv_h2;
        }
        if (!lv.v_plus.empty()) acc += lv.v_plus[idx] * x[idx];
        y[idx] = acc;
      }
}

void mg_jacobi(MgLevel& lv, const std::vector<double>& b,
               std::vector<double>& x, int sweeps, double omega) {
  for (int s = 0; s < sweeps; ++s) {
    mg_apply(lv, x, lv.r);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] += omega * lv.inv_diag[i] * (b[i] - lv.r[i]);
  }
}

bool coarsenable(const Grid& g) {
  for (int d = 0; d < g.dim(); ++d) {
    int c = g.count()[d];
    if ((c - 1) % 2 != 0 || (c - 1) / 2 + 1 < 9) return false;
  }
  return true;
}

std::vector<MgLevel> mg_hierarchy(const CoefficientField& cf) {
  std::vector<MgLevel> levels(1);
  MgLevel& fine = levels[0];
  fine.grid = cf.grid;
  fine.g_iso = cf.g_iso;
  if (cf.has_V()) {
    fine.v_plus.resize(cf.V.size());
    for (std::size_t i = 0; i < cf.V.size(); ++i)
      fine.v_plus[i] = std::max(cf.V[i], 0.0);
  }
  while (coarsenable(levels.back().grid)) {
    const MgLevel& f = levels.back();
    MgLevel c;
    std::array<int, 3> cc{(f.grid.count()[0] - 1) / 2 + 1,
                          (f.grid.count()[1] - 1) / 2 + 1,
                          f.grid.dim() == 3 ? (f.grid.count()[2] - 1) / 2 + 1
                                            : 1};
    c.grid = Grid(f.grid.dim(), cc, 2.0 * f.grid.h(), f.grid.origin());
    c.g_iso.resize(c.grid.num_nodes());
    if (!f.v_plus.empty()) c.v_plus.resize(c.grid.num_nodes());
    for (int k = 0; k < cc[2]; ++k)
      for (int j = 0; j < cc[1]; ++j)
        for (int i = 0; i < cc[0]; ++i) {
          std::size_t ci = c.grid.index(i, j, k);
          std::size_t fi =
              f.grid.index(2 * i, 2 * j, f.grid.dim() == 3 ? 2 * k : 0);
          c.g_iso[ci] = f.g_iso[fi];
          if (!c.v_plus.empty()) c.v_plus[ci] = f.v_plus[fi];
        }
    levels.push_back(std::move(c));
  }
  for (auto& lv : levels) {
    mg_build_diag(lv);
    std::size_t n = lv.grid.num_nodes();
    lv.x.assign(n, 0.0);
    lv.b.assign(n, 0.0);
    lv.r.assign(n, 0.0);
  }
  return levels;
}

// full weighting: tensor weights (1/4, 1/2, 1/4) per active axis
void mg_restrict(const MgLevel& fine, const MgLevel& coarse,
                 const std::vector<double>& rf, std::vector<double>& rc) {
  const Grid& cg = coarse.grid;
  const Grid& fg = fine.grid;
  const auto& cc = cg.count();
  const int dim = cg.dim();
  rc.assign(cg.num_nodes(), 0.0);
  const int kz = dim == 3 ? 1 : 0;
  for (int k = 0; k < cc[2]; ++k)
    for (int j = 0; j < cc[1]; ++j)
      for (int i = 0; i < cc[0]; ++i) {
        if (is_boundary(cg, i, j, k)) continue;
        double acc = 0;
        for (int ok = -kz; ok <= kz; ++ok)
          for (int oj = -1; oj <= 1; ++oj)
            for (int oi = -1; oi <= 1; ++oi) {
              double w = (oi == 0 ? 0.5 : 0.25) * (oj == 0 ? 0.5 : 0.25);
              if (dim == 3) w *= (ok == 0 ? 0.5 : 0.25);
              acc += w * rf[fg.index(2 * i + oi, 2 * j + oj,
                                     dim == 3 ? 2 * k + ok : 0)];
            }
        rc[cg.index(i, j, k)] = acc;
      }
}

// trilinear prolongation, added into the fine vector
void mg_prolong_add(const MgLevel& coarse, const MgLevel& fine,
                    const std::vector<double>& ec, std::vector<double>& xf) {
  const Grid& cg = coarse.grid;
  const Grid& fg = fine.grid;
  const auto& fc = fg.count();
  const int dim = fg.dim();
  for (int k = 0; k < fc[2]; ++k)
    for (int j = 0; j < fc[1]; ++j)
      for (int i = 0; i < fc[0]; ++i) {
        if (is_boundary(fg, i, j, k)) continue;
        int ci = i / 2, cj = j / 2, ck = dim == 3 ? k / 2 : 0;
        int ri = i % 2, rj = j % 2, rk = dim == 3 ? k % 2 : 0;
        double acc = 0;
        for (int ok = 0; ok <= rk; ++ok)
          for (int oj = 0; oj <= rj; ++oj)
            for (int oi = 0; oi <= ri; ++oi) {
              double w = (ri ? 0.5 : 1.0) * (rj ? 0.5 : 1.0) *
                         (rk ? 0.5 : 1.0);
              acc += w * ec[cg.index(ci + oi, cj + oj, ck + ok)];
            }
        xf[fg.index(i, j, k)] += acc;
      }
}

void mg_vcycle(std::vector<MgLevel>& levels, std::size_t l,
               const std::vector<double>& b, std::vector<double>& x) {
  MgLevel& lv = levels[l];
  std::fill(x.begin(), x.end(), 0.0);
  if (l + 1 == levels.size()) {
    mg_jacobi(lv, b, x, 80, 2.0 / 3.0);
    return;
  }
  mg_jacobi(lv, b, x, 2, 2.0 / 3.0);
  mg_apply(lv, x, lv.r);
  for (std::size_t i = 0; i < lv.r.size(); ++i) lv.r[i] = b[i] - lv.r[i];
  MgLevel& next = levels[l + 1];
  mg_restrict(lv, next, lv.r, next.b);
  mg_vcycle(levels, l + 1, next.b, next.x);
  mg_prolong_add(next, lv, next.x, x);
  mg_jacobi(lv, b, x, 2, 2.0 / 3.0);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// right-preconditioned BiCGSTAB on the full-lattice system
void bicgstab(const CoefficientField& cf, std::vector<MgLevel>& levels,
              const std::vector<double>& b, std::vector<double>& x,
              const SolveOptions& opts, SolveStats& st) {
  const std::size_t n = b.size();
  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n);
  std::vector<double> phat(n), shat(n);
  apply_operator(cf, x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  rhat = r;
  double bnorm = norm2(b);
  if (bnorm == 0) bnorm = 1;
  double rho = 1, alpha = 1, omega = 1;
  for (int it = 1; it <= opts.max_iter; ++it) {
    double rho1 = dot(rhat, r);
    if (rho1 == 0)
      throw solver_error("bicgstab breakdown: rho = 0",
                         "iteration " + std::to_string(it));
    if (it == 1) {
      p = r;
    } else {
      double beta = (rho1 / rho) * (alpha / omega);
      for (std::size_t i = 0; i < n; ++i)
        p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    mg_vcycle(levels, 0, p, phat);
    apply_operator(cf, phat, v);
    double rv = dot(rhat, v);
    if (rv == 0)
      throw solver_error("bicgstab breakdown: (rhat, v) = 0",
                         "iteration " + std::to_string(it));
    alpha = rho1 / rv;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm2(s) / bnorm < opts.tol) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
      st.iterations = it;
      st.rel_residual = norm2(s) / bnorm;
      return;
    }
    mg_vcycle(levels, 0, s, shat);
    apply_operator(cf, shat, t);
    double tt = dot(t, t);
    if (tt == 0)
      throw solver_error("bicgstab breakdown: t = 0",
                         "iteration " + std::to_string(it));
    omega = dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
    double rel = norm2(r) / bnorm;
    st.iterations = it;
    st.rel_residual = rel;
    if (rel < opts.tol) return;
    rho = rho1;
  }
  std::ostringstream os;
  os << "grid " << cf.grid.count()[0] << "x" << cf.grid.count()[1] << "x"
     << cf.grid.count()[2] << ", " << opts.max_iter
     << " iterations, relative residual " << st.rel_residual << " > tol "
     << opts.tol;
  throw solver_error("bicgstab did not converge", os.str());
}

}  // namespace

void apply_operator(const CoefficientField& cf, const std::vector<double>& x,
                    std::vector<double>& y) {
  const Grid& g = cf.grid;
  if (x.size() != g.num_nodes())
    throw precondition_error("apply_operator: vector size mismatch");
  y.resize(x.size());
  const auto& c = g.count();
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        std::size_t idx = g.index(i, j, k);
        if (is_boundary(g, i, j, k)) {
          y[idx] = x[idx];
          continue;
        }
        double acc = 0;
        row_entries(cf, i, j, k,
                    [&](std::size_t col, double val) { acc += val * x[col]; });
        y[idx] = acc;
      }
}

SolutionField solve_dirichlet(const CoefficientField& cf,
                              const std::vector<double>& boundary,
                              const std::vector<double>& rhs,
                              const SolveOptions& opts, SolveStats* stats) {
  const Grid& g = cf.grid;
  const std::size_t n = g.num_nodes();
  if (boundary.size() != n)
    throw precondition_error("solve_dirichlet: boundary vector size mismatch");
  if (!rhs.empty() && rhs.size() != n)
    throw precondition_error("solve_dirichlet: rhs vector size mismatch");

  // full-lattice right side: data on boundary rows, forcing inside
  std::vector<double> b(n, 0.0);
  const auto& c = g.count();
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        std::size_t idx = g.index(i, j, k);
        b[idx] = is_boundary(g, i, j, k) ? boundary[idx]
                                         : (rhs.empty() ? 0.0 : rhs[idx]);
      }

  SolveStats local;
  SolveStats& st = stats ? *stats : local;
  SolutionField out;
  out.grid = g;
  out.u.assign(n, 0.0);

  if (n <= opts.direct_limit && !opts.force_iterative) {
    st.method = "sparse_lu";
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * (g.dim() == 3 ? 7 : 5));
    for (int k = 0; k < c[2]; ++k)
      for (int j = 0; j < c[1]; ++j)
        for (int i = 0; i < c[0]; ++i) {
          std::size_t row = g.index(i, j, k);
          if (is_boundary(g, i, j, k)) {
            trip.emplace_back(static_cast<int>(row), static_cast<int>(row),
                              1.0);
            continue;
          }
          row_entries(cf, i, j, k, [&](std::size_t col, double val) {
            trip.emplace_back(static_cast<int>(row), static_cast<int>(col),
                              val);
          });
        }
    Eigen::SparseMatrix<double> A(static_cast<int>(n), static_cast<int>(n));
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw solver_error("sparse LU factorization failed",
                         "grid " + std::to_string(c[0]) + "^n, " +
                             std::to_string(n) + " unknowns");
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
    Eigen::VectorXd xv = lu.solve(bv);
    std::copy(xv.data(), xv.data() + n, out.u.begin());
    std::vector<double> ax(n);
    apply_operator(cf, out.u, ax);
    double rnorm = 0, bnorm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      rnorm += (ax[i] - b[i]) * (ax[i] - b[i]);
      bnorm += b[i] * b[i];
    }
    st.iterations = 1;
    st.rel_residual = bnorm > 0 ? std::sqrt(rnorm / bnorm) : std::sqrt(rnorm);
    if (st.rel_residual > 1e-8) {
      std::ostringstream os;
      os << "relative residual " << st.rel_residual << " after LU";
      throw solver_error("direct solve lost accuracy", os.str());
    }
  } else {
    st.method = "mg_bicgstab";
    auto levels = mg_hierarchy(cf);
    // boundary data as the initial guess keeps boundary rows exact
    for (int k = 0; k < c[2]; ++k)
      for (int j = 0; j < c[1]; ++j)
        for (int i = 0; i < c[0]; ++i)
          if (is_boundary(g, i, j, k))
            out.u[g.index(i, j, k)] = boundary[g.index(i, j, k)];
    bicgstab(cf, levels, b, out.u, opts, st);
  }
  return out;
}

namespace {

struct Manufactured {
  int dim;
  double up(const Point& p) const {
    double v = std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]);
    if (dim == 3) v *= std::sin(M_PI * p[2]);
    return v;
  }
  double dx(const Point& p, int d) const {
    double f[3] = {std::sin(M_PI * p[0]), std::sin(M_PI * p[1]),
                   dim == 3 ? std::sin(M_PI * p[2]) : 1.0};
    f[d] = std::cos(M_PI * p[d]);
    return M_PI * f[0] * f[1] * f[2];
  }
  double dxy(const Point& p) const {
    double v = M_PI * M_PI * std::cos(M_PI * p[0]) * std::cos(M_PI * p[1]);
    if (dim == 3) v *= std::sin(M_PI * p[2]);
    return v;
  }
};

}  // namespace

ConvergenceReport manufactured_convergence(const CoefficientRecipe& r,
                                           const std::vector<int>& sizes,
                                           int dim, const SolveOptions& opts) {
  if (r.v_sing != 0 || r.w1_sing != 0 || r.w2_sing != 0)
    throw precondition_error(
        "manufactured_convergence: singular recipes have no closed form");
  ConvergenceReport rep;
  Manufactured mf{dim};
  for (int n : sizes) {
    Grid g(dim, {n, n, dim == 3 ? n : 1}, 1.0 / (n - 1), {0, 0, 0});
    CoefficientField cf = build_coefficients(r, g);
    std::vector<double> bd(g.num_nodes(), 0.0), f(g.num_nodes(), 0.0);
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      Point p = g.position(i);
      bd[i] = mf.up(p);
      double gval = r.g0 * (1.0 + r.g_amp * std::sin(r.g_freq * p[0]));
      double lap = -dim * M_PI * M_PI * mf.up(p);
      double val = -gval * lap -
                   r.g0 * r.g_amp * r.g_freq * std::cos(r.g_freq * p[0]) *
                       mf.dx(p, 0) -
                   2.0 * r.g_offdiag * mf.dxy(p);
      // W1 . grad u
      val += r.w1_smooth_amp *
             (std::sin(M_PI * p[1]) * mf.dx(p, 0) +
              std::sin(M_PI * p[0]) * mf.dx(p, 1));
      // div(W2 u) = W2 . grad u, this W2 is divergence free
      val += r.w2_smooth_amp * std::cos(M_PI * p[0]) * mf.dx(p, 1);
      if (r.v_smooth_amp != 0)
        val += r.v_smooth_amp * std::cos(M_PI * p[0]) *
               std::cos(M_PI * p[1]) * mf.up(p);
      f[i] = val;
    }
    SolutionField sol = solve_dirichlet(cf, bd, f, opts);
    std::vector<double> err(g.num_nodes());
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      err[i] = sol.u[i] - bd[i];
    rep.sizes.push_back(n);
    rep.l2_error.push_back(lattice_lp_norm(g, err, 2.0));
  }
  for (std::size_t i = 0; i + 1 < rep.sizes.size(); ++i) {
    double h0 = 1.0 / (rep.sizes[i] - 1), h1 = 1.0 / (rep.sizes[i + 1] - 1);
    rep.order.push_back(std::log(rep.l2_error[i] / rep.l2_error[i + 1]) /
                        std::log(h0 / h1));
  }
  // least squares slope of log err against log h
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = rep.sizes.size();
  for (std::size_t i = 0; i < m; ++i) {
    double x = std::log(1.0 / (rep.sizes[i] - 1));
    double y = std::log(rep.l2_error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.fitted_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return rep;
}

namespace {

double gaussian(std::mt19937_64& rng) {
  // Box-Muller on fixed 53-bit uniforms, reproducible across platforms
  double u1 = (rng() >> 11) * 0x1p-53;
  double u2 = (rng() >> 11) * 0x1p-53;
  if (u1 < 0x1p-60) u1 = 0x1p-60;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

std::vector<SolutionField> random_solution_ensemble(
    const CoefficientField& cf, int count, std::uint64_t seed, int freq_cap,
    const SolveOptions& opts) {
  if (count <= 0)
    throw precondition_error("random_solution_ensemble: count must be > 0");
  if (freq_cap < 1)
    throw precondition_error("random_solution_ensemble: freq_cap must be >= 1");
  const Grid& g = cf.grid;
  const int dim = g.dim();
  std::vector<SolutionField> out;
  out.reserve(count);
  for (int member = 0; member < count; ++member) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + member + 1);
    // low-pass random trigonometric polynomial, decay keeps the data smooth
    struct Mode {
      int m[3];
      double amp, phase[3];
    };
    std::vector<Mode> modes;
    for (int m2 = 0; m2 <= (dim == 3 ? freq_cap : 0); ++m2)
      for (int m1 = 0; m1 <= freq_cap; ++m1)
        for (int m0 = 0; m0 <= freq_cap; ++m0) {
          Mode md;
          md.m[0] = m0;
          md.m[1] = m1;
          md.m[2] = m2;
          double k2 = m0 * m0 + m1 * m1 + m2 * m2;
          md.amp = gaussian(rng) / (1.0 + k2);
          for (int d = 0; d < 3; ++d)
            md.phase[d] = 2.0 * M_PI * ((rng() >> 11) * 0x1p-53);
          modes.push_back(md);
        }
    std::vector<double> bd(g.num_nodes(), 0.0);
    const auto& c = g.count();
    for (int k = 0; k < c[2]; ++k)
      for (int j = 0; j < c[1]; ++j)
        for (int i = 0; i < c[0]; ++i) {
          if (!is_boundary(g, i, j, k)) continue;
          std::size_t idx = g.index(i, j, k);
          Point p = g.position(idx);
          double v = 0;
          for (const Mode& md : modes) {
            double t = md.amp;
            for (int d = 0; d < dim; ++d)
              t *= std::cos(M_PI * md.m[d] * p[d] / g.extent(d) + md.phase[d]);
            v += t;
          }
          bd[idx] = v;
        }
    SolutionField sol = solve_dirichlet(cf, bd, {}, opts);
    double nrm = lattice_lp_norm(g, sol.u, 2.0);
    if (nrm < 1e-14)
      throw solver_error("degenerate ensemble member",
                         "member " + std::to_string(member) +
                             " has vanishing L2 norm");
    for (double& v : sol.u) v /= nrm;
    out.push_back(std::move(sol));
  }
  return out;
}

}  // namespace ucprop
