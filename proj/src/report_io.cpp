#include "report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ucprop {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

// shorter form for SVG geometry; still deterministic
std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string format_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Frame {
  double xmin, xmax, ymin, ymax;
  static constexpr double W = 640, H = 480, L = 70, R = 20, T = 40, B = 50;
  double px(double x) const {
    return L + (x - xmin) / (xmax - xmin) * (W - L - R);
  }
  double py(double y) const {
    return H - B - (y - ymin) / (ymax - ymin) * (H - T - B);
  }
};

Frame make_frame(const std::vector<double>& x, const std::vector<double>& y) {
  Frame f{x[0], x[0], y[0], y[0]};
  for (double v : x) {
    f.xmin = std::min(f.xmin, v);
    f.xmax = std::max(f.xmax, v);
  }
  for (double v : y) {
    f.ymin = std::min(f.ymin, v);
    f.ymax = std::max(f.ymax, v);
  }
  double dx = f.xmax - f.xmin, dy = f.ymax - f.ymin;
  if (dx <= 0) dx = 1;
  if (dy <= 0) dy = 1;
  f.xmin -= 0.05 * dx;
  f.xmax += 0.05 * dx;
  f.ymin -= 0.05 * dy;
  f.ymax += 0.05 * dy;
  return f;
}

void svg_header(std::ostringstream& s, const Frame& f,
                const std::string& title, const std::string& xlabel,
                const std::string& ylabel) {
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::W
    << "\" height=\"" << Frame::H << "\" font-family=\"monospace\">\n";
  s << "<rect width=\"" << Frame::W << "\" height=\"" << Frame::H
    << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << Frame::W / 2 << "\" y=\"24\" text-anchor=\"middle\">"
    << title << "</text>\n";
  s << "<text x=\"" << Frame::W / 2 << "\" y=\"" << Frame::H - 12
    << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  s << "<text x=\"16\" y=\"" << Frame::H / 2
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << Frame::H / 2
    << ")\">" << ylabel << "</text>\n";
  // axes
  s << "<line x1=\"" << Frame::L << "\" y1=\"" << Frame::H - Frame::B
    << "\" x2=\"" << Frame::W - Frame::R << "\" y2=\"" << Frame::H - Frame::B
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << Frame::L << "\" y1=\"" << Frame::T << "\" x2=\""
    << Frame::L << "\" y2=\"" << Frame::H - Frame::B
    << "\" stroke=\"black\"/>\n";
  // corner tick labels
  s << "<text x=\"" << Frame::L << "\" y=\"" << Frame::H - Frame::B + 16
    << "\" font-size=\"11\">" << format_label(f.xmin) << "</text>\n";
  s << "<text x=\"" << Frame::W - Frame::R << "\" y=\""
    << Frame::H - Frame::B + 16 << "\" text-anchor=\"end\" font-size=\"11\">"
    << format_label(f.xmax) << "</text>\n";
  s << "<text x=\"" << Frame::L - 4 << "\" y=\"" << Frame::H - Frame::B
    << "\" text-anchor=\"end\" font-size=\"11\">" << format_label(f.ymin)
    << "</text>\n";
  s << "<text x=\"" << Frame::L - 4 << "\" y=\"" << Frame::T + 10
    << "\" text-anchor=\"end\" font-size=\"11\">" << format_label(f.ymax)
    << "</text>\n";
}

}  // namespace

void write_csv(const Table& table, const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // binary: fixed \n line ends
  if (!f) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    f << (i ? "," : "") << table.columns[i];
  f << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw contract_error("write_csv: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i)
      f << (i ? "," : "") << format_double(row[i]);
    f << "\n";
  }
}

LinearFit linear_fit(const std::vector<double>& x,
                     const std::vector<double>& y) {
  LinearFit fit;
  fit.n = x.size();
  if (x.size() != y.size())
    throw precondition_error("linear_fit: length mismatch");
  if (x.size() < 2) return fit;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / x.size(), my = sy / y.size();
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.valid = true;
  return fit;
}

std::string svg_scatter(const std::vector<double>& x,
                        const std::vector<double>& y,
                        const std::string& title, const std::string& xlabel,
                        const std::string& ylabel, const LinearFit* fit) {
  if (x.empty() || x.size() != y.size())
    throw precondition_error("svg_scatter: empty or mismatched data");
  Frame f = make_frame(x, y);
  std::ostringstream s;
  svg_header(s, f, title, xlabel, ylabel);
  if (fit && fit->valid) {
    double y1 = fit->intercept + fit->slope * f.xmin;
    double y2 = fit->intercept + fit->slope * f.xmax;
    s << "<line x1=\"" << format_coord(f.px(f.xmin)) << "\" y1=\""
      << format_coord(f.py(y1)) << "\" x2=\"" << format_coord(f.px(f.xmax))
      << "\" y2=\"" << format_coord(f.py(y2))
      << "\" stroke=\"firebrick\" stroke-width=\"1.5\"/>\n";
    s << "<text x=\"" << Frame::W - Frame::R - 4 << "\" y=\"" << Frame::T + 14
      << "\" text-anchor=\"end\" font-size=\"12\">slope "
      << format_label(fit->slope) << ", R2 " << format_label(fit->r2)
      << "</text>\n";
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    s << "<circle cx=\"" << format_coord(f.px(x[i])) << "\" cy=\""
      << format_coord(f.py(y[i])) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  s << "</svg>\n";
  return s.str();
}

std::string svg_histogram(const std::vector<double>& values, int bins,
                          const std::string& title, const std::string& xlabel) {
  if (values.empty() || bins < 1)
    throw precondition_error("svg_histogram: empty data or no bins");
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1;
  std::vector<int> count(bins, 0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    count[std::min(b, bins - 1)]++;
  }
  int cmax = 0;
  for (int c : count) cmax = std::max(cmax, c);

  std::vector<double> xr{lo, hi}, yr{0.0, static_cast<double>(cmax)};
  Frame f = make_frame(xr, yr);
  std::ostringstream s;
  svg_header(s, f, title, xlabel, "count");
  double bw = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    double x0 = f.px(lo + b * bw), x1 = f.px(lo + (b + 1) * bw);
    double y0 = f.py(0), y1 = f.py(count[b]);
    s << "<rect x=\"" << format_coord(x0) << "\" y=\"" << format_coord(y1)
      << "\" width=\"" << format_coord(x1 - x0 - 1) << "\" height=\""
      << format_coord(y0 - y1)
      << "\" fill=\"steelblue\" stroke=\"white\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_text: cannot open " + path);
  f << content;
}

void save_field(const SolutionField& u, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_field: cannot open " + path);
  const Grid& g = u.grid;
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << "ucprop-field 1\n"
      << g.dim() << ' ' << g.count()[0] << ' ' << g.count()[1] << ' '
      << g.count()[2] << '\n'
      << g.h() << '\n'
      << g.origin()[0] << ' ' << g.origin()[1] << ' ' << g.origin()[2] << "\n";
  f << hdr.str();
  f.write(reinterpret_cast<const char*>(u.u.data()),
          static_cast<std::streamsize>(u.u.size() * sizeof(double)));
}

SolutionField load_field(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_field: cannot open " + path);
  std::string magic;
  int version = 0, dim = 0;
  std::array<int, 3> cnt{};
  double h = 0;
  Point origin{};
  f >> magic >> version >> dim >> cnt[0] >> cnt[1] >> cnt[2] >> h >>
      origin[0] >> origin[1] >> origin[2];
  if (magic != "ucprop-field" || version != 1)
    throw std::runtime_error("load_field: bad header in " + path);
  f.get();  // the newline before the payload
  SolutionField u;
  u.grid = Grid(dim, cnt, h, origin);
  u.u.resize(u.grid.num_nodes());
  f.read(reinterpret_cast<char*>(u.u.data()),
         static_cast<std::streamsize>(u.u.size() * sizeof(double)));
  if (!f) throw std::runtime_error("load_field: truncated payload in " + path);
  return u;
}

}  // namespace ucprop
