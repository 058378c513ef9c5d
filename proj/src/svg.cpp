#include "fdpv/svg.hpp"

#include <cmath>
#include <sstream>

#include "fdpv/ibs.hpp"

namespace fdpv::svg {

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

}  // namespace

Panel::Panel(double x, double y, double width, double height)
    : x_(x), y_(y), w_(width), h_(height) {}

void Panel::set_range(double x_min, double x_max, double y_min, double y_max) {
  xmin_ = x_min;
  xmax_ = x_max;
  ymin_ = y_min;
  ymax_ = y_max;
  if (xmax_ == xmin_) xmax_ = xmin_ + 1;
  if (ymax_ == ymin_) ymax_ = ymin_ + 1;
}

double Panel::px(double x) const { return x_ + (x - xmin_) / (xmax_ - xmin_) * w_; }
double Panel::py(double y) const { return y_ + h_ - (y - ymin_) / (ymax_ - ymin_) * h_; }

void Panel::polyline(const Eigen::Ref<const Eigen::ArrayXd>& xs,
                     const Eigen::Ref<const Eigen::ArrayXd>& ys,
                     const std::string& color, double stroke_width) {
  // Decimate long series to at most ~4k points per plot.
  const Eigen::Index n = xs.size();
  const Eigen::Index step = std::max<Eigen::Index>(1, n / 4096);
  std::ostringstream ss;
  ss << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
     << stroke_width << "\" points=\"";
  for (Eigen::Index i = 0; i < n; i += step)
    ss << fmt(px(xs[i])) << "," << fmt(py(ys[i])) << " ";
  if ((n - 1) % step != 0) ss << fmt(px(xs[n - 1])) << "," << fmt(py(ys[n - 1]));
  ss << "\"/>\n";
  body_ += ss.str();
}

void Panel::hline(double y, const std::string& color, const std::string& dash) {
  std::ostringstream ss;
  ss << "<line x1=\"" << fmt(x_) << "\" y1=\"" << fmt(py(y)) << "\" x2=\""
     << fmt(x_ + w_) << "\" y2=\"" << fmt(py(y)) << "\" stroke=\"" << color << "\"";
  if (!dash.empty()) ss << " stroke-dasharray=\"" << dash << "\"";
  ss << "/>\n";
  body_ += ss.str();
}

void Panel::vline(double x, const std::string& color, const std::string& dash) {
  std::ostringstream ss;
  ss << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(y_) << "\" x2=\""
     << fmt(px(x)) << "\" y2=\"" << fmt(y_ + h_) << "\" stroke=\"" << color << "\"";
  if (!dash.empty()) ss << " stroke-dasharray=\"" << dash << "\"";
  ss << "/>\n";
  body_ += ss.str();
}

void Panel::marker(double x, double y, const std::string& color, double radius) {
  std::ostringstream ss;
  ss << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\""
     << radius << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
  body_ += ss.str();
}

void Panel::title(const std::string& text) {
  std::ostringstream ss;
  ss << "<text x=\"" << fmt(x_ + 4) << "\" y=\"" << fmt(y_ - 6)
     << "\" font-family=\"sans-serif\" font-size=\"12\">" << text << "</text>\n";
  body_ += ss.str();
}

void Panel::axes() {
  std::ostringstream ss;
  ss << "<rect x=\"" << fmt(x_) << "\" y=\"" << fmt(y_) << "\" width=\"" << fmt(w_)
     << "\" height=\"" << fmt(h_) << "\" fill=\"none\" stroke=\"#888\"/>\n";
  body_ += ss.str();
}

std::string document(double width, double height, const std::vector<Panel>& panels) {
  std::ostringstream ss;
  ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& p : panels) ss << p.body();
  ss << "</svg>\n";
  return ss.str();
}

std::string detection_figure(const Eigen::Ref<const Eigen::ArrayXd>& path,
                             const FilteredDerivativeTrace& trace,
                             const ChangePointReport& report) {
  const double W = 900, H = 520;
  Panel top(60, 30, W - 90, 200), bottom(60, 290, W - 90, 200);

  Eigen::ArrayXd xs = Eigen::ArrayXd::LinSpaced(path.size(), 0, path.size() - 1);
  top.set_range(0, path.size() - 1, path.minCoeff(), path.maxCoeff());
  top.axes();
  top.title("series");
  top.polyline(xs, path, "#1f77b4");
  for (const auto& r : report.retained) top.vline(r.index, "#d62728", "4 3");

  Eigen::ArrayXd abs_d = trace.values.abs();
  Eigen::ArrayXd dx = Eigen::ArrayXd::LinSpaced(abs_d.size(), trace.offset,
                                                trace.offset + abs_d.size() - 1);
  const double ymax = std::max(abs_d.maxCoeff(), report.threshold_used) * 1.1;
  bottom.set_range(0, path.size() - 1, 0, ymax);
  bottom.axes();
  bottom.title("|D(k,A)| with threshold and candidates");
  bottom.polyline(dx, abs_d, "#1f77b4");
  bottom.hline(report.threshold_used, "#2ca02c", "6 3");
  for (const auto& c : report.potential) bottom.marker(c.index, c.height, "#000000", 4.0);
  for (const auto& r : report.retained) {
    double h = 0;
    for (const auto& c : report.potential)
      if (c.index == r.index) h = c.height;
    bottom.marker(r.index, h, "#d62728", 6.0);
  }
  return document(W, H, {top, bottom});
}

std::string lambda_figure(int points) {
  const double W = 640, H = 360;
  Panel panel(60, 30, W - 90, H - 70);
  Eigen::ArrayXd hs(points), ls(points);
  for (int i = 0; i < points; ++i) {
    const double h = (i + 1) / static_cast<double>(points);  // (0,1]
    hs[i] = h;
    ls[i] = lambda_of_hurst(h);
  }
  panel.set_range(0, 1, 0.25, 0.52);
  panel.axes();
  panel.title("sign-agreement probability vs Hurst index");
  panel.polyline(hs, ls, "#1f77b4", 1.5);
  panel.hline(0.5, "#888", "2 4");
  panel.marker(0.5, 1.0 / 3.0, "#d62728", 4.0);
  return document(W, H, {panel});
}

std::string bench_figure(const std::vector<std::pair<double, double>>& size_time) {
  const double W = 640, H = 360;
  Panel panel(60, 30, W - 90, H - 70);
  Eigen::ArrayXd xs(size_time.size()), ys(size_time.size());
  for (std::size_t i = 0; i < size_time.size(); ++i) {
    xs[i] = std::log2(size_time[i].first);
    ys[i] = std::log2(std::max(size_time[i].second, 1e-9));
  }
  panel.set_range(xs.minCoeff() - 0.5, xs.maxCoeff() + 0.5, ys.minCoeff() - 0.5,
                  ys.maxCoeff() + 0.5);
  panel.axes();
  panel.title("log2 detect time (ms) vs log2 series length");
  panel.polyline(xs, ys, "#1f77b4", 1.5);
  for (std::size_t i = 0; i < size_time.size(); ++i)
    panel.marker(xs[i], ys[i], "#d62728", 3.0);
  return document(W, H, {panel});
}

}  // namespace fdpv::svg
