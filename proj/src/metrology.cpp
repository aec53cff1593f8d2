#include "metrology.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ucprop {

namespace {

void check_field(const SolutionField& u) {
  if (u.u.size() != u.grid.num_nodes())
    throw precondition_error("metrology: field size does not match its grid");
}

bool ball_inside_box(const Grid& g, const Point& c, double r) {
  for (int d = 0; d < g.dim(); ++d) {
    if (c[d] - r < g.origin()[d] - 1e-12) return false;
    if (c[d] + r > g.origin()[d] + g.extent(d) + 1e-12) return false;
  }
  return true;
}

}  // namespace

double norm_on_region(const SolutionField& u, const RegionMask& region,
                      double p) {
  check_field(u);
  if (!(region.grid() == u.grid))
    throw precondition_error("norm_on_region: region on a different grid");
  if (region.empty()) throw precondition_error("norm_on_region: empty region");
  const std::size_t n = u.grid.num_nodes();
  if (p == 2.0) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (region.at(i)) s += u.u[i] * u.u[i];
    return std::sqrt(s * u.grid.cell_volume());
  }
  if (std::isinf(p)) {
    double m = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (region.at(i)) m = std::max(m, std::abs(u.u[i]));
    return m;
  }
  // general p used by the reverse Holder functional
  double s = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (region.at(i)) s += std::pow(std::abs(u.u[i]), p);
  return std::pow(s * u.grid.cell_volume(), 1.0 / p);
}

double norm_on_ball(const SolutionField& u, const Point& center, double r,
                    double p) {
  return norm_on_region(u, ball_mask(u.grid, center, r), p);
}

std::vector<double> gradient_field(const SolutionField& u) {
  check_field(u);
  const Grid& g = u.grid;
  const auto& c = g.count();
  const int dim = g.dim();
  const double inv_2h = 1.0 / (2.0 * g.h());
  const double inv_h = 1.0 / g.h();
  std::vector<double> out(g.num_nodes() * dim, 0.0);
  const int di[3] = {1, 0, 0};
  const int dj[3] = {0, 1, 0};
  const int dk[3] = {0, 0, 1};
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        std::size_t idx = g.index(i, j, k);
        int pos[3] = {i, j, k};
        for (int d = 0; d < dim; ++d) {
          double v;
          if (pos[d] == 0) {
            v = (u.u[g.index(i + di[d], j + dj[d], k + dk[d])] - u.u[idx]) *
                inv_h;
          } else if (pos[d] == c[d] - 1) {
            v = (u.u[idx] - u.u[g.index(i - di[d], j - dj[d], k - dk[d])]) *
                inv_h;
          } else {
            v = (u.u[g.index(i + di[d], j + dj[d], k + dk[d])] -
                 u.u[g.index(i - di[d], j - dj[d], k - dk[d])]) *
                inv_2h;
          }
          out[idx * dim + d] = v;
        }
      }
  return out;
}

std::vector<double> ball_l2_all_centers_direct(const SolutionField& u,
                                               double r) {
  check_field(u);
  const Grid& g = u.grid;
  auto offs = ball_offsets(g, r);
  const auto& c = g.count();
  std::vector<double> out(g.num_nodes(), 0.0);
  const double vol = g.cell_volume();
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        double s = 0;
        for (const auto& o : offs) {
          std::array<int, 3> q{i + o[0], j + o[1], k + o[2]};
          if (!g.contains(q)) continue;
          double v = u.u[g.index(q[0], q[1], q[2])];
          s += v * v;
        }
        out[g.index(i, j, k)] = s * vol;
      }
  return out;
}

std::vector<double> ball_l2_all_centers_fft(const SolutionField& u,
                                            double r) {
  check_field(u);
  const Grid& g = u.grid;
  const auto& c = g.count();
  const int dim = g.dim();
  const int m = static_cast<int>(std::floor(r / g.h() + 1e-9));
  // linear convolution via zero padding by the kernel radius
  int pc[3] = {c[0] + 2 * m, c[1] + 2 * m, dim == 3 ? c[2] + 2 * m : 1};
  const std::size_t pn =
      static_cast<std::size_t>(pc[0]) * pc[1] * pc[2];
  auto pidx = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(k) * pc[1] + j) * pc[0] + i;
  };
  std::vector<double> usq(pn, 0.0), ker(pn, 0.0);
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        double v = u.u[g.index(i, j, k)];
        usq[pidx(i, j, dim == 3 ? k : 0)] = v * v;
      }
  for (const auto& o : ball_offsets(g, r)) {
    int i = (o[0] + pc[0]) % pc[0];
    int j = (o[1] + pc[1]) % pc[1];
    int k = dim == 3 ? (o[2] + pc[2]) % pc[2] : 0;
    ker[pidx(i, j, k)] = 1.0;
  }

  const int nz = pc[2], ny = pc[1], nx = pc[0];
  const std::size_t cn =
      static_cast<std::size_t>(nz) * ny * (nx / 2 + 1);
  fftw_complex* fu =
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * cn));
  fftw_complex* fk =
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * cn));
  fftw_plan p1 = dim == 3 ? fftw_plan_dft_r2c_3d(nz, ny, nx, usq.data(), fu,
                                                 FFTW_ESTIMATE)
                          : fftw_plan_dft_r2c_2d(ny, nx, usq.data(), fu,
                                                 FFTW_ESTIMATE);
  fftw_execute(p1);
  fftw_plan p2 = dim == 3 ? fftw_plan_dft_r2c_3d(nz, ny, nx, ker.data(), fk,
                                                 FFTW_ESTIMATE)
                          : fftw_plan_dft_r2c_2d(ny, nx, ker.data(), fk,
                                                 FFTW_ESTIMATE);
  fftw_execute(p2);
  for (std::size_t i = 0; i < cn; ++i) {
    double re = fu[i][0] * fk[i][0] - fu[i][1] * fk[i][1];
    double im = fu[i][0] * fk[i][1] + fu[i][1] * fk[i][0];
    fu[i][0] = re;
    fu[i][1] = im;
  }
  fftw_plan p3 = dim == 3 ? fftw_plan_dft_c2r_3d(nz, ny, nx, fu, usq.data(),
                                                 FFTW_ESTIMATE)
                          : fftw_plan_dft_c2r_2d(ny, nx, fu, usq.data(),
                                                 FFTW_ESTIMATE);
  fftw_execute(p3);
  fftw_destroy_plan(p1);
  fftw_destroy_plan(p2);
  fftw_destroy_plan(p3);
  fftw_free(fu);
  fftw_free(fk);

  std::vector<double> out(g.num_nodes());
  const double scale = g.cell_volume() / static_cast<double>(pn);
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        double v = usq[pidx(i, j, dim == 3 ? k : 0)] * scale;
        out[g.index(i, j, k)] = std::max(v, 0.0);
      }
  return out;
}

std::vector<double> ball_l2_all_centers(const SolutionField& u, double r) {
  check_field(u);
  if (r <= 0) throw precondition_error("ball_l2_all_centers: r > 0 required");
  const Grid& g = u.grid;
  double ball_nodes = 1;
  for (int d = 0; d < g.dim(); ++d) ball_nodes *= 2 * (r / g.h()) + 1;
  // the path depends only on sizes, so results stay reproducible per config
  if (static_cast<double>(g.num_nodes()) * ball_nodes < 2e8)
    return ball_l2_all_centers_direct(u, r);
  return ball_l2_all_centers_fft(u, r);
}

CaccioppoliRecord caccioppoli_ratio(const SolutionField& u, const Point& x,
                                    double r, double a) {
  check_field(u);
  if (!(a > 0 && a < 1))
    throw precondition_error("caccioppoli_ratio: a in (0,1) required");
  if (!ball_inside_box(u.grid, x, r))
    throw precondition_error("caccioppoli_ratio: B_r(x) leaves the domain");
  CaccioppoliRecord rec;
  rec.center = x;
  rec.r = r;
  rec.a = a;
  auto grad = gradient_field(u);
  RegionMask inner = ball_mask(u.grid, x, a * r);
  if (inner.empty())
    throw resolution_error("caccioppoli_ratio: B_{ar} contains no nodes");
  const int dim = u.grid.dim();
  double gs = 0;
  for (std::size_t i = 0; i < u.grid.num_nodes(); ++i)
    if (inner.at(i))
      for (int d = 0; d < dim; ++d)
        gs += grad[i * dim + d] * grad[i * dim + d];
  rec.grad_norm = std::sqrt(gs * u.grid.cell_volume());
  rec.u_norm = norm_on_ball(u, x, r, 2.0);
  rec.zero_denominator = rec.u_norm == 0.0;
  rec.ratio = rec.zero_denominator ? 0.0 : rec.r * rec.grad_norm / rec.u_norm;
  return rec;
}

DoublingRecord doubling_constant(const SolutionField& u,
                                 const RegionMask& domain, double rho,
                                 const ConstantsProfile& profile) {
  check_field(u);
  const Grid& g = u.grid;
  profile.validate(g.dim());
  const double r_small = 2.0 * profile.kappa * rho;
  if (r_small < 4.0 * g.h())
    throw resolution_error(
        "doubling_constant: inner radius 2*kappa*rho below 4h");
  RegionMask centers = inner_region(domain, rho / 2.0);
  if (centers.empty())
    throw precondition_error("doubling_constant: Omega(rho/2) is empty");

  auto big = ball_l2_all_centers(u, rho);
  auto small = ball_l2_all_centers(u, r_small);

  DoublingRecord rec;
  rec.rho = rho;
  rec.r_small = r_small;
  rec.stride = std::max(
      1, static_cast<int>(std::floor(profile.kappa * rho / (4.0 * g.h()))));
  rec.max_ratio = 0;
  rec.centers_scanned = 0;
  const auto& c = g.count();
  for (int k = 0; k < c[2]; k += g.dim() == 3 ? rec.stride : 1)
    for (int j = 0; j < c[1]; j += rec.stride)
      for (int i = 0; i < c[0]; i += rec.stride) {
        std::size_t idx = g.index(i, j, k);
        if (!centers.at(idx)) continue;
        ++rec.centers_scanned;
        if (small[idx] <= 0) continue;
        double ratio = std::sqrt(big[idx] / small[idx]);
        if (ratio > rec.max_ratio) {
          rec.max_ratio = ratio;
          rec.argmax_center = g.position(idx);
          rec.norm_large = std::sqrt(big[idx]);
          rec.norm_small = std::sqrt(small[idx]);
        }
      }
  if (rec.centers_scanned == 0)
    throw precondition_error("doubling_constant: stride skipped every center");
  rec.constant = profile.C[0] * std::pow(rec.max_ratio, profile.H1());
  return rec;
}

DoublingCheck doubling_check(const SolutionField& u, const RegionMask& domain,
                             double rho, double constant,
                             const ConstantsProfile& profile) {
  check_field(u);
  const Grid& g = u.grid;
  RegionMask centers = inner_region(domain, rho);
  if (centers.empty())
    throw precondition_error("doubling_check: Omega(rho) is empty");
  DoublingCheck out;
  const int stride = std::max(
      1, static_cast<int>(std::floor(profile.kappa * rho / (4.0 * g.h()))));
  const int r_lo = 2;
  const int r_hi =
      static_cast<int>(std::ceil(profile.kappa * rho / g.h())) - 1;
  for (int rn = r_lo; rn <= r_hi; ++rn) {
    double r = rn * g.h();
    auto small = ball_l2_all_centers(u, r);
    auto big = ball_l2_all_centers(u, 2.0 * r);
    const auto& c = g.count();
    for (int k = 0; k < c[2]; k += g.dim() == 3 ? stride : 1)
      for (int j = 0; j < c[1]; j += stride)
        for (int i = 0; i < c[0]; i += stride) {
          std::size_t idx = g.index(i, j, k);
          if (!centers.at(idx)) continue;
          ++out.checks;
          double margin = constant * small[idx] - big[idx];
          out.worst_margin = std::min(out.worst_margin, margin);
          if (margin < 0) ++out.violations;
        }
  }
  if (out.checks == 0)
    throw precondition_error("doubling_check: no admissible radius");
  return out;
}

MuckenhouptRecord muckenhoupt_check(const SolutionField& u,
                                    const BallSpec& ball,
                                    const RegionMask& subset,
                                    double alpha_weight) {
  check_field(u);
  RegionMask b = ball_mask(u.grid, ball.center, ball.r);
  if (b.empty()) throw precondition_error("muckenhoupt_check: empty ball");
  for (std::size_t i = 0; i < u.grid.num_nodes(); ++i)
    if (subset.at(i) && !b.at(i))
      throw precondition_error("muckenhoupt_check: subset leaves the ball");
  if (!(subset.measure() > (1.0 - alpha_weight) * b.measure()))
    throw precondition_error(
        "muckenhoupt_check: |subset| <= (1 - alpha)|ball|");
  MuckenhouptRecord rec;
  double ls = 0, bs = 0;
  for (std::size_t i = 0; i < u.grid.num_nodes(); ++i) {
    double v = u.u[i] * u.u[i];
    if (subset.at(i)) ls += v;
    if (b.at(i)) bs += v;
  }
  rec.lhs = ls * u.grid.cell_volume();
  rec.rhs = 0.5 * bs * u.grid.cell_volume();
  rec.pass = rec.lhs >= rec.rhs;
  return rec;
}

ReverseHolderRecord reverse_holder_ratio(const SolutionField& u,
                                         const BallSpec& ball, double p) {
  check_field(u);
  if (p == 0) {
    if (u.grid.dim() != 3)
      throw precondition_error(
          "reverse_holder_ratio: exponent 2n/(n-2) needs n = 3, pass p");
    p = 6.0;
  }
  if (p <= 2)
    throw precondition_error("reverse_holder_ratio: p > 2 required");
  RegionMask b = ball_mask(u.grid, ball.center, ball.r);
  ReverseHolderRecord rec;
  rec.p = p;
  double l2 = norm_on_region(u, b, 2.0);
  rec.zero_denominator = l2 == 0.0;
  rec.ratio = rec.zero_denominator ? 0.0 : norm_on_region(u, b, p) / l2;
  return rec;
}

double elliptic_estimate_constant(const std::vector<SolutionField>& ensemble,
                                  const std::vector<BallSpec>& balls) {
  if (ensemble.empty() || balls.empty())
    throw precondition_error("elliptic_estimate_constant: empty sample");
  double a2 = 0;
  for (const auto& u : ensemble) {
    check_field(u);
    for (const auto& b : balls) {
      if (!ball_inside_box(u.grid, b.center, 2.0 * b.r))
        throw precondition_error(
            "elliptic_estimate_constant: B_2r leaves the domain");
      RegionMask inner = ball_mask(u.grid, b.center, b.r);
      RegionMask outer = ball_mask(u.grid, b.center, 2.0 * b.r);
      double sup = norm_on_region(u, inner, INFINITY);
      double l2 = norm_on_region(u, outer, 2.0);
      if (l2 == 0) continue;
      double cand = sup * sup * outer.measure() / (l2 * l2);
      a2 = std::max(a2, cand);
    }
  }
  return std::sqrt(a2);
}

}  // namespace ucprop
