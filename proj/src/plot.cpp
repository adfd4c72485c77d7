#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "tnperm/errors.hpp"
#include "tnperm/experiments.hpp"

namespace tnperm {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string render_svg(const std::vector<SuccessCurve>& curves, const std::string& title) {
  constexpr double W = 640, H = 420, left = 60, right = 150, top = 40, bottom = 50;
  const double pw = W - left - right;
  const double ph = H - top - bottom;

  double xmax = 0.0;
  bool any = false;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      xmax = std::max(xmax, p.sigma_e);
      any = true;
    }
  }
  if (!any) throw DomainError("nothing to plot");
  if (xmax <= 0.0) xmax = 1.0;
  auto px = [&](double x) { return left + pw * x / xmax; };
  auto py = [&](double y) { return top + ph * (1.0 - y); };

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      W, H, W, H);
  s += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
  s += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", left + pw / 2,
                   escape(title));

  // Axes and ticks.
  s += fmt::format("<path d=\"M{} {} V{} H{}\" stroke=\"black\" fill=\"none\"/>\n", left, top, top + ph, left + pw);
  for (int k = 0; k <= 5; ++k) {
    const double y = k / 5.0;
    s += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", left, py(y),
                     left + pw, py(y));
    s += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.1f}</text>\n", left - 6, py(y) + 4, y);
    const double x = xmax * k / 5.0;
    s += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", px(x), top + ph + 18, x);
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">noise level sigma_e</text>\n", left + pw / 2,
                   H - 10);
  s += fmt::format(
      "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">success rate</text>\n",
      top + ph / 2, top + ph / 2);

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kColors[i % kColors.size()];
    std::string pts;
    for (const auto& p : curves[i].points) pts += fmt::format("{:.2f},{:.2f} ", px(p.sigma_e), py(p.rate()));
    s += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", pts, color);
    for (const auto& p : curves[i].points) {
      s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(p.sigma_e), py(p.rate()),
                       color);
    }
    const double ly = top + 16 + 18 * static_cast<double>(i);
    s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                     left + pw + 12, ly, left + pw + 32, ly, color);
    s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", left + pw + 38, ly + 4, escape(curves[i].label));
  }
  s += "</svg>\n";
  return s;
}

}  // namespace tnperm
