#include "coefficients.hpp"

#include <cmath>
#include <sstream>

namespace ucprop {

CoefficientRecipe CoefficientRecipe::smooth(double g_amp, double v, double w) {
  CoefficientRecipe r;
  r.g_amp = g_amp;
  r.v_smooth_amp = v;
  r.w1_smooth_amp = w;
  r.w2_smooth_amp = w;
  return r;
}

CoefficientRecipe CoefficientRecipe::singular(double v, double w, Point x0) {
  CoefficientRecipe r;
  r.v_sing = v;
  r.w1_sing = w;
  r.w2_sing = w;
  r.x0 = x0;
  return r;
}

double lattice_lp_norm(const Grid& grid, const std::vector<double>& v,
                       double p) {
  double sum = 0;
  for (double x : v) sum += std::pow(std::abs(x), p);
  return std::pow(sum * grid.cell_volume(), 1.0 / p);
}

CoefficientField build_coefficients(const CoefficientRecipe& r,
                                    const Grid& grid) {
  if (r.v_sing != 0 && !(r.v_p < 2))
    throw precondition_error("coefficients: singular V exponent must be < 2");
  if ((r.w1_sing != 0 || r.w2_sing != 0) && !(r.w_q < 1))
    throw precondition_error("coefficients: singular W exponent must be < 1");
  if (r.s <= grid.dim())
    throw precondition_error("coefficients: integrability exponent s must exceed n");

  CoefficientField f;
  f.grid = grid;
  f.g_offdiag = r.g_offdiag;
  f.s = r.s;
  f.Lambda1 = r.lambda1_budget;
  const std::size_t n = grid.num_nodes();
  const double h = grid.h();
  const int dim = grid.dim();

  f.g_iso.resize(n);
  bool need_v = r.v_smooth_amp != 0 || r.v_sing != 0;
  bool need_w1 = r.w1_smooth_amp != 0 || r.w1_sing != 0;
  bool need_w2 = r.w2_smooth_amp != 0 || r.w2_sing != 0;
  if (need_v) f.V.assign(n, 0.0);
  if (need_w1) f.W1.assign(n * dim, 0.0);
  if (need_w2) f.W2.assign(n * dim, 0.0);
  if (r.v_sing != 0 || r.w1_sing != 0 || r.w2_sing != 0) f.cap_radius = h;

  for (std::size_t i = 0; i < n; ++i) {
    Point p = grid.position(i);
    f.g_iso[i] = r.g0 * (1.0 + r.g_amp * std::sin(r.g_freq * p[0]));
    double rad = std::sqrt(dist2(p, r.x0, dim));
    double rad_capped = std::max(rad, h);
    if (need_v) {
      double v = r.v_smooth_amp * std::cos(M_PI * p[0]) * std::cos(M_PI * p[1]);
      if (r.v_sing != 0) v += r.v_sing * std::pow(rad_capped, -r.v_p);
      f.V[i] = v;
    }
    if (need_w1) {
      f.W1[i * dim + 0] = r.w1_smooth_amp * std::sin(M_PI * p[1]);
      f.W1[i * dim + 1] = r.w1_smooth_amp * std::sin(M_PI * p[0]);
      if (r.w1_sing != 0)
        f.W1[i * dim + 0] += r.w1_sing * std::pow(rad_capped, -r.w_q);
    }
    if (need_w2) {
      f.W2[i * dim + 1] = r.w2_smooth_amp * std::cos(M_PI * p[0]);
      if (r.w2_sing != 0)
        f.W2[i * dim + 1] += r.w2_sing * std::pow(rad_capped, -r.w_q);
    }
  }

  // ellipticity: isotropic part range, reduced by the off-diagonal block
  double gmin = f.g_iso[0], gmax = f.g_iso[0];
  for (double g : f.g_iso) {
    gmin = std::min(gmin, g);
    gmax = std::max(gmax, g);
  }
  double off = std::abs(r.g_offdiag);
  double lam_lo = gmin - off, lam_hi = gmax + off;
  if (lam_lo <= 0) {
    std::ostringstream os;
    os << "coefficients: ellipticity violated, min eigenvalue " << lam_lo;
    throw precondition_error(os.str());
  }
  f.lambda = std::min(lam_lo, 1.0 / lam_hi);

  // discrete Lipschitz quotient of g over axis neighbors
  double lip = 0;
  const auto& c = grid.count();
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i + 1 < c[0]; ++i)
        lip = std::max(lip, std::abs(f.g_iso[grid.index(i + 1, j, k)] -
                                     f.g_iso[grid.index(i, j, k)]) /
                                h);
  f.Lambda0 = lip;

  // integrability norms
  if (need_v) {
    f.norms["V_Ln2"] = lattice_lp_norm(grid, f.V, dim / 2.0 + 0.0);
    f.norms["V_Ls2"] = lattice_lp_norm(grid, f.V, r.s / 2.0);
  }
  auto wnorm = [&](const std::vector<double>& w) {
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s2 = 0;
      for (int d = 0; d < dim; ++d) s2 += w[i * dim + d] * w[i * dim + d];
      mag[i] = std::sqrt(s2);
    }
    return lattice_lp_norm(grid, mag, r.s);
  };
  if (need_w1) f.norms["W1_Ls"] = wnorm(f.W1);
  if (need_w2) f.norms["W2_Ls"] = wnorm(f.W2);

  if (r.lambda1_budget > 0) {
    for (const auto& [name, val] : f.norms)
      if (val > r.lambda1_budget) {
        std::ostringstream os;
        os << "coefficients: norm " << name << " = " << val
           << " exceeds budget " << r.lambda1_budget;
        throw precondition_error(os.str());
      }
  }
  return f;
}

}  // namespace ucprop
