#include "agc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "agc/error.hpp"

namespace agc {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using P2 = Eigen::Vector2d;

std::string fmt(double v, const char* f = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

/// Ticks at 1, 2 or 5 times a power of ten.
std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  if (!(span > 0)) return {lo};
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

/// Axes frame with data-to-pixel mapping.
class Canvas {
 public:
  Canvas(double w, double h, double x0, double x1, double y0, double y1)
      : w_(w), h_(h), x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  double px(double x) const { return left + (x - x0_) / (x1_ - x0_) * (w_ - left - right); }
  double py(double y) const { return h_ - bottom - (y - y0_) / (y1_ - y0_) * (h_ - top - bottom); }

  void axes(const std::string& xlabel, const std::string& ylabel, const std::string& title) {
    const double l = left, r = w_ - right, t = top, b = h_ - bottom;
    os_ << "<g stroke=\"#888\" stroke-width=\"0.5\">\n";
    for (double v : nice_ticks(x0_, x1_)) os_ << "<line x1=\"" << fmt(px(v)) << "\" y1=\"" << t << "\" x2=\"" << fmt(px(v)) << "\" y2=\"" << b << "\" stroke-dasharray=\"2,3\"/>\n";
    for (double v : nice_ticks(y0_, y1_)) os_ << "<line x1=\"" << l << "\" y1=\"" << fmt(py(v)) << "\" x2=\"" << r << "\" y2=\"" << fmt(py(v)) << "\" stroke-dasharray=\"2,3\"/>\n";
    os_ << "</g>\n<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << r - l << "\" height=\"" << b - t
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double v : nice_ticks(x0_, x1_)) text(px(v), b + 16, fmt(v), "middle");
    for (double v : nice_ticks(y0_, y1_)) text(l - 6, py(v) + 4, fmt(v), "end");
    text((l + r) / 2, h_ - 12, xlabel, "middle");
    os_ << "<text transform=\"translate(16," << fmt((t + b) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << esc(ylabel) << "</text>\n";
    text((l + r) / 2, 20, title, "middle", "font-size=\"14\"");
  }

  void path(const std::vector<P2>& pts, const std::string& style, bool closed) {
    if (pts.empty()) return;
    os_ << "<path d=\"";
    for (size_t k = 0; k < pts.size(); ++k) {
      os_ << (k ? " L" : "M") << fmt(px(pts[k].x())) << ',' << fmt(py(pts[k].y()));
    }
    os_ << (closed ? " Z" : "") << "\" " << style << "/>\n";
  }

  void dot(const P2& p, double r, const std::string& style) {
    os_ << "<circle cx=\"" << fmt(px(p.x())) << "\" cy=\"" << fmt(py(p.y())) << "\" r=\"" << r << "\" " << style << "/>\n";
  }

  void text(double x, double y, const std::string& s, const char* anchor, const std::string& extra = "") {
    os_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" text-anchor=\"" << anchor << "\" " << extra << '>'
        << esc(s) << "</text>\n";
  }

  /// Legend entries in pixel space, top right of the frame.
  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = top + 16;
    const double x = w_ - right - 190;
    os_ << "<rect x=\"" << x - 8 << "\" y=\"" << top + 4 << "\" width=\"194\" height=\"" << 18 * entries.size() + 8
        << "\" fill=\"white\" fill-opacity=\"0.85\" stroke=\"#ccc\"/>\n";
    for (const auto& [label, style] : entries) {
      os_ << "<line x1=\"" << x << "\" y1=\"" << y - 4 << "\" x2=\"" << x + 24 << "\" y2=\"" << y - 4 << "\" " << style << "/>\n";
      text(x + 30, y, label, "start");
      y += 18;
    }
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

  static constexpr double left = 70, right = 20, top = 32, bottom = 48;

 private:
  double w_, h_, x0_, x1_, y0_, y1_;
  std::ostringstream os_;
};

const char* kPalette[] = {"#1f5fbf", "#2a9d3a", "#d0602a", "#8a3ab9", "#7a7a7a"};

std::pair<double, double> padded(double lo, double hi, double frac = 0.06) {
  if (!(hi > lo)) {
    const double d = std::max(1.0, std::abs(lo)) * 0.1;
    return {lo - d, hi + d};
  }
  const double d = (hi - lo) * frac;
  return {lo - d, hi + d};
}

double cross(const P2& o, const P2& a, const P2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

std::string plot_cost_curves(const std::vector<SweepRecord>& records) {
  std::vector<std::string> graphs;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& r : records) {
    if (std::find(graphs.begin(), graphs.end(), r.graph) == graphs.end()) graphs.push_back(r.graph);
    xlo = std::min(xlo, r.x_max);
    xhi = std::max(xhi, r.x_max);
    if (r.objective) {
      ylo = std::min(ylo, *r.objective);
      yhi = std::max(yhi, *r.objective);
    }
  }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1;
  if (!std::isfinite(ylo)) ylo = 0, yhi = 1;
  const auto [x0, x1] = padded(xlo, xhi, 0.02);
  const auto [y0, y1] = padded(ylo, yhi);
  Canvas c(720, 460, x0, x1, y0, y1);
  c.axes("state bound x_max", "objective", "Cost of synthesized controllers");
  std::vector<std::pair<std::string, std::string>> legend;
  for (size_t g = 0; g < graphs.size(); ++g) {
    const std::string colour = kPalette[g % 5];
    const std::string stroke = "fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"2\"";
    std::vector<const SweepRecord*> rs;
    for (const auto& r : records)
      if (r.graph == graphs[g]) rs.push_back(&r);
    std::sort(rs.begin(), rs.end(), [](auto a, auto b) { return a->x_max < b->x_max; });
    std::vector<P2> run;
    auto flush = [&] {
      if (run.size() > 1) c.path(run, stroke, false);
      run.clear();
    };
    for (const SweepRecord* r : rs) {
      if (!r->objective) {
        flush();
        continue;
      }
      run.emplace_back(r->x_max, *r->objective);
      c.dot(run.back(), 2.5, "fill=\"" + colour + "\"");
    }
    flush();
    legend.emplace_back(graphs[g], stroke);
  }
  c.legend(legend);
  return c.finish();
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> p) {
  std::sort(p.begin(), p.end(), [](const P2& a, const P2& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<P2> h(2 * p.size());
  size_t k = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  return h;
}

std::vector<Eigen::Vector2d> ellipse_outline(const Ellipsoid& e, int segments) {
  const Mat L = symmetric_sqrt(e.shape);
  std::vector<P2> out;
  for (int k = 0; k < segments; ++k) {
    const double th = 2.0 * M_PI * k / segments;
    out.push_back(e.center + L * Eigen::Vector2d(std::cos(th), std::sin(th)));
  }
  return out;
}

std::string state_label(const SystemModel& m, int index) {
  const int n = m.state_dim();
  const int t = index / n;
  const int r = index % n;
  int i = 0;
  while (i + 1 < m.num_subsystems() && m.state_offset(i + 1) <= r) ++i;
  const int k = r - m.state_offset(i);
  std::string s = "x" + std::to_string(i + 1);
  if (m.nx[i] > 1) s += "," + std::to_string(k + 1);
  return s + "(" + std::to_string(t) + ")";
}

ProjectedSets projected_sets(const ProblemInstance& inst, const ContractPolicy& p, std::pair<int, int> coords,
                             int samples, std::uint64_t seed) {
  const int nX = inst.model.state_traj_dim();
  for (int c : {coords.first, coords.second}) {
    if (c < 0 || c >= nX) {
      throw CoordOutOfRange("coordinate " + std::to_string(c) + " outside 0.." + std::to_string(nX - 1));
    }
  }
  ProjectedSets out;
  out.coords = coords;
  const int a = coords.first, b = coords.second;

  std::mt19937_64 rng(seed);
  for (int k = 0; k < samples; ++k) {
    const SimulationResult sim = simulate(inst, p, sample_mixed(inst.sigma_sqrt, rng));
    out.samples.emplace_back(sim.x[a], sim.x[b]);
  }
  out.hull = convex_hull(out.samples);

  const SurrogateLoop l = surrogate_loop(p, inst);
  Mat E = Mat::Zero(2, nX);
  E(0, a) = 1.0;
  E(1, b) = 1.0;
  const Mat& S = inst.disturbance.sigma;
  const Mat S1 = E * l.Pw * S * l.Pw.transpose() * E.transpose();
  const Mat S2 = E * l.Pxi * S * l.Pxi.transpose() * E.transpose();
  const double t1 = std::sqrt(std::max(0.0, S1.trace()));
  const double t2 = std::sqrt(std::max(0.0, S2.trace()));

  // Row of the coupling projection for a trajectory coordinate, if any.
  auto crow = [&](int idx) {
    const auto& ix = inst.projector.full.index;
    const auto it = std::find(ix.begin(), ix.end(), idx);
    return it == ix.end() ? -1 : static_cast<int>(it - ix.begin());
  };
  const int ra = crow(a), rb = crow(b);
  const bool coupled = p.has_contract && ra >= 0 && rb >= 0;

  double alpha = t2 == 0.0 ? 1.0 : (t1 == 0.0 ? 0.0 : t1 / (t1 + t2));
  if (coupled && p.lambda > 0) {
    const double solver_alpha = p.beta / p.lambda;
    if (solver_alpha > 1e-6 && solver_alpha < 1.0 - 1e-6) alpha = solver_alpha;
  }
  Mat shape = Mat::Zero(2, 2);
  if (alpha > 0) shape += S1 / alpha;
  if (alpha < 1) shape += S2 / (1.0 - alpha);
  out.alpha = alpha;
  out.reachable.center = E * l.x_bar;
  out.reachable.shape = 0.5 * (shape + shape.transpose());

  if (coupled) {
    Ellipsoid c;
    c.center = Eigen::Vector2d(p.contract.center[ra], p.contract.center[rb]);
    c.shape = Mat(2, 2);
    c.shape << p.contract.shape(ra, ra), p.contract.shape(ra, rb), p.contract.shape(rb, ra), p.contract.shape(rb, rb);
    out.contract = c;
  }

  // Bounds implied by rows that touch a single state coordinate.
  const ConstraintSet& cs = inst.constraints;
  auto bound = [&](int idx, Interval& iv) {
    for (int r = 0; r < cs.rows(); ++r) {
      const double coef = cs.Fx(r, idx);
      if (coef == 0.0) continue;
      if ((cs.Fx.row(r).array() != 0.0).count() != 1 || cs.Fu.row(r).squaredNorm() != 0.0 ||
          cs.Fw.row(r).squaredNorm() != 0.0) {
        continue;
      }
      if (coef > 0) iv.hi = std::min(iv.hi, cs.g[r] / coef);
      else iv.lo = std::max(iv.lo, cs.g[r] / coef);
    }
  };
  bound(a, out.box_x);
  bound(b, out.box_y);
  return out;
}

std::string render_projected_sets(const ProjectedSets& s, const SystemModel& model) {
  std::vector<P2> reach = ellipse_outline(s.reachable);
  std::vector<P2> contract;  // empty without a contract
  if (s.contract) contract = ellipse_outline(*s.contract);

  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  auto grow = [&](const P2& q) {
    xlo = std::min(xlo, q.x());
    xhi = std::max(xhi, q.x());
    ylo = std::min(ylo, q.y());
    yhi = std::max(yhi, q.y());
  };
  for (const auto* set : std::initializer_list<const std::vector<P2>*>{&reach, &contract, &s.hull})
    for (const P2& q : *set) grow(q);
  for (double v : {s.box_x.lo, s.box_x.hi})
    if (std::isfinite(v)) xlo = std::min(xlo, v), xhi = std::max(xhi, v);
  for (double v : {s.box_y.lo, s.box_y.hi})
    if (std::isfinite(v)) ylo = std::min(ylo, v), yhi = std::max(yhi, v);
  if (!std::isfinite(xlo)) xlo = -1, xhi = 1, ylo = -1, yhi = 1;
  // equal aspect
  const double span = std::max(xhi - xlo, yhi - ylo);
  const double cx = 0.5 * (xlo + xhi), cy = 0.5 * (ylo + yhi);
  const auto [x0, x1] = padded(cx - span / 2, cx + span / 2);
  const auto [y0, y1] = padded(cy - span / 2, cy + span / 2);

  Canvas c(560, 560, x0, x1, y0, y1);
  const std::string xl = state_label(model, s.coords.first);
  const std::string yl = state_label(model, s.coords.second);
  c.axes(xl, yl, "Projected sets (" + xl + ", " + yl + ")");

  const std::string box_style = "fill=\"none\" stroke=\"#444\" stroke-width=\"1.5\"";
  const double bx0 = std::isfinite(s.box_x.lo) ? s.box_x.lo : x0, bx1 = std::isfinite(s.box_x.hi) ? s.box_x.hi : x1;
  const double by0 = std::isfinite(s.box_y.lo) ? s.box_y.lo : y0, by1 = std::isfinite(s.box_y.hi) ? s.box_y.hi : y1;
  const bool has_box = std::isfinite(s.box_x.lo) || std::isfinite(s.box_x.hi) || std::isfinite(s.box_y.lo) ||
                       std::isfinite(s.box_y.hi);
  if (has_box) c.path({{bx0, by0}, {bx1, by0}, {bx1, by1}, {bx0, by1}}, box_style, true);

  const std::string hull_style = "fill=\"#2a9d3a\" fill-opacity=\"0.25\" stroke=\"#2a9d3a\" stroke-width=\"1.5\"";
  const std::string reach_style = "fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\"";
  const std::string contract_style = "fill=\"none\" stroke=\"#d0602a\" stroke-width=\"2\" stroke-dasharray=\"7,4\"";
  c.path(s.hull, hull_style, s.hull.size() > 2);
  c.path(reach, reach_style, true);
  if (s.contract) c.path(contract, contract_style, true);

  std::vector<std::pair<std::string, std::string>> legend{
      {"sampled hull", hull_style}, {"outer ellipse, alpha " + fmt(s.alpha, "%.3g"), reach_style}};
  if (s.contract) legend.emplace_back("contract set", contract_style);
  if (has_box) legend.emplace_back("constraint box", box_style);
  c.legend(legend);
  return c.finish();
}

std::string plot_projected_sets(const ProblemInstance& inst, const ContractPolicy& p, std::pair<int, int> coords,
                                int samples, std::uint64_t seed) {
  return render_projected_sets(projected_sets(inst, p, coords, samples, seed), inst.model);
}

}  // namespace agc
