#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fdpv/detector.hpp"

namespace fdpv::svg {

// Minimal line-plot canvas with data-space axes.
class Panel {
 public:
  Panel(double x, double y, double width, double height);
  void set_range(double x_min, double x_max, double y_min, double y_max);
  void polyline(const Eigen::Ref<const Eigen::ArrayXd>& xs,
                const Eigen::Ref<const Eigen::ArrayXd>& ys,
                const std::string& color, double stroke_width = 1.0);
  void hline(double y, const std::string& color, const std::string& dash = "");
  void vline(double x, const std::string& color, const std::string& dash = "");
  void marker(double x, double y, const std::string& color, double radius = 3.0);
  void title(const std::string& text);
  void axes();

  std::string body() const { return body_; }

 private:
  double px(double x) const;
  double py(double y) const;
  double x_, y_, w_, h_;
  double xmin_ = 0, xmax_ = 1, ymin_ = 0, ymax_ = 1;
  std::string body_;
};

std::string document(double width, double height, const std::vector<Panel>& panels);

/// Two-panel figure: the path above, |D| with the threshold line and
/// candidate markers below.
std::string detection_figure(const Eigen::Ref<const Eigen::ArrayXd>& path,
                             const FilteredDerivativeTrace& trace,
                             const ChangePointReport& report);

/// The Lambda(H) curve over (0,1].
std::string lambda_figure(int points = 512);

/// Log-log time-vs-size plot from benchmark rows.
std::string bench_figure(const std::vector<std::pair<double, double>>& size_time);

}  // namespace fdpv::svg
