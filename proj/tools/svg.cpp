#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dissipcert/errors.hpp"

namespace dissipcert::cli {
namespace {

// Canvas geometry shared by both plot kinds.
constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 44.0;
constexpr double kBottom = 52.0;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void open_document(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
     << kHeight << "\">\n"
     << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"#ffffff\"/>\n"
     << "<text x=\"" << px(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"14\" font-weight=\"bold\" "
        "fill=\"#111827\">"
     << escape(title) << "</text>\n";
}

void axis_labels(std::ostringstream& os, const std::string& x_label,
                 const std::string& y_label) {
  os << "<text x=\"" << px(kLeft + (kWidth - kLeft - kRight) / 2) << "\" y=\""
     << px(kHeight - 12) << "\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"12\" fill=\"#111827\">"
     << escape(x_label) << "</text>\n"
     << "<text x=\"16\" y=\"" << px(kTop + (kHeight - kTop - kBottom) / 2)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\" fill=\"#111827\" transform=\"rotate(-90 16 "
     << px(kTop + (kHeight - kTop - kBottom) / 2) << ")\">" << escape(y_label)
     << "</text>\n";
}

void frame(std::ostringstream& os) {
  os << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\""
     << px(kWidth - kLeft - kRight) << "\" height=\""
     << px(kHeight - kTop - kBottom)
     << "\" fill=\"none\" stroke=\"#111827\" stroke-width=\"1\"/>\n";
}

void y_tick(std::ostringstream& os, double ypix, const std::string& label) {
  os << "<line x1=\"" << px(kLeft - 4) << "\" y1=\"" << px(ypix) << "\" x2=\""
     << px(kWidth - kRight) << "\" y2=\"" << px(ypix)
     << "\" stroke=\"#d1d5db\" stroke-width=\"0.5\"/>\n"
     << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(ypix + 4)
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\" "
        "fill=\"#374151\">"
     << label << "</text>\n";
}

void x_tick(std::ostringstream& os, double xpix, const std::string& label) {
  os << "<line x1=\"" << px(xpix) << "\" y1=\"" << px(kTop) << "\" x2=\""
     << px(xpix) << "\" y2=\"" << px(kHeight - kBottom + 4)
     << "\" stroke=\"#d1d5db\" stroke-width=\"0.5\"/>\n"
     << "<text x=\"" << px(xpix) << "\" y=\"" << px(kHeight - kBottom + 16)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"10\" fill=\"#374151\">"
     << label << "</text>\n";
}

}  // namespace

std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<double>& x,
                          const std::vector<double>& y) {
  if (x.size() != y.size())
    throw ArgumentError("line_plot_svg: x and y lengths differ");
  std::vector<double> lx, yv;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && std::isfinite(y[i]) && std::isfinite(std::log10(x[i]))) {
      lx.push_back(std::log10(x[i]));
      yv.push_back(y[i]);
    }
  }
  if (lx.empty())
    throw ArgumentError("line_plot_svg: no plottable points (need x > 0 and "
                        "finite y)");

  double lx0 = *std::min_element(lx.begin(), lx.end());
  double lx1 = *std::max_element(lx.begin(), lx.end());
  if (lx1 - lx0 < 1e-12) {
    lx0 -= 0.5;
    lx1 += 0.5;
  }
  double y0 = std::min(0.0, *std::min_element(yv.begin(), yv.end()));
  double y1 = *std::max_element(yv.begin(), yv.end());
  if (y1 - y0 < 1e-300) y1 = y0 + 1.0;
  y1 += 0.05 * (y1 - y0);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto xpix = [&](double l) { return kLeft + (l - lx0) / (lx1 - lx0) * pw; };
  auto ypix = [&](double v) {
    return kHeight - kBottom - (v - y0) / (y1 - y0) * ph;
  };

  std::ostringstream os;
  open_document(os, title);

  for (int i = 0; i <= 4; ++i) {
    const double v = y0 + (y1 - y0) * i / 4.0;
    y_tick(os, ypix(v), fmt(v));
  }
  const int d0 = static_cast<int>(std::ceil(lx0 - 1e-9));
  const int d1 = static_cast<int>(std::floor(lx1 + 1e-9));
  const int step = (d1 - d0 > 9) ? 2 : 1;
  for (int d = d0; d <= d1; d += step) x_tick(os, xpix(d), fmt(std::pow(10.0, d)));

  os << "<polyline fill=\"none\" stroke=\"#2563eb\" stroke-width=\"1.5\" "
        "points=\"";
  for (std::size_t i = 0; i < lx.size(); ++i) {
    if (i) os << ' ';
    os << px(xpix(lx[i])) << ',' << px(ypix(yv[i]));
  }
  os << "\"/>\n";

  frame(os);
  axis_labels(os, x_label, y_label);
  os << "</svg>\n";
  return os.str();
}

std::string phase_diagram_svg(
    const std::string& title, const std::string& x_label,
    const std::string& y_label, double x0, double x1, double y0, double y1,
    int nx, int ny, const std::vector<int>& cells,
    const std::vector<std::pair<double, double>>& boundary,
    const std::array<std::string, 3>& class_labels) {
  if (nx < 2 || ny < 2)
    throw ArgumentError("phase_diagram_svg: need at least a 2x2 grid");
  if (!(x1 > x0) || !(y1 > y0))
    throw ArgumentError("phase_diagram_svg: empty data rectangle");
  if (cells.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw ArgumentError("phase_diagram_svg: cells must hold nx*ny entries");

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto xpix = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
  auto ypix = [&](double v) {
    return kHeight - kBottom - (v - y0) / (y1 - y0) * ph;
  };
  const double cw = pw / (nx - 1);
  const double ch = ph / (ny - 1);
  static const char* kFills[3] = {"#fca5a5", "#93c5fd", "#fcd34d"};

  std::ostringstream os;
  open_document(os, title);
  os << "<clipPath id=\"plot\"><rect x=\"" << px(kLeft) << "\" y=\""
     << px(kTop) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
     << "\"/></clipPath>\n<g clip-path=\"url(#plot)\">\n";

  for (int j = 0; j < ny; ++j) {
    const double yc = y0 + (y1 - y0) * j / static_cast<double>(ny - 1);
    for (int i = 0; i < nx; ++i) {
      const double xc = x0 + (x1 - x0) * i / static_cast<double>(nx - 1);
      int cls = cells[static_cast<std::size_t>(j) * nx + i];
      if (cls < 0 || cls > 2) cls = 0;
      os << "<rect x=\"" << px(xpix(xc) - cw / 2) << "\" y=\""
         << px(ypix(yc) - ch / 2) << "\" width=\"" << px(cw) << "\" height=\""
         << px(ch) << "\" fill=\"" << kFills[cls] << "\"/>\n";
    }
  }

  if (!boundary.empty()) {
    os << "<polyline fill=\"none\" stroke=\"#111827\" stroke-width=\"2\" "
          "stroke-dasharray=\"6 3\" points=\"";
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      if (i) os << ' ';
      os << px(xpix(boundary[i].first)) << ','
         << px(ypix(boundary[i].second));
    }
    os << "\"/>\n";
  }
  os << "</g>\n";

  for (int i = 0; i <= 4; ++i) {
    const double v = x0 + (x1 - x0) * i / 4.0;
    x_tick(os, xpix(v), fmt(v));
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = y0 + (y1 - y0) * i / 4.0;
    y_tick(os, ypix(v), fmt(v));
  }

  double lx = kLeft;
  for (int c = 0; c < 3; ++c) {
    os << "<rect x=\"" << px(lx) << "\" y=\"30\" width=\"10\" height=\"10\" "
          "fill=\""
       << kFills[c] << "\" stroke=\"#111827\" stroke-width=\"0.5\"/>\n"
       << "<text x=\"" << px(lx + 14) << "\" y=\"39\" "
          "font-family=\"sans-serif\" font-size=\"10\" fill=\"#111827\">"
       << escape(class_labels[static_cast<std::size_t>(c)]) << "</text>\n";
    lx += 20.0 + 7.0 * static_cast<double>(class_labels[static_cast<std::size_t>(c)].size());
  }

  frame(os);
  axis_labels(os, x_label, y_label);
  os << "</svg>\n";
  return os.str();
}

}  // namespace dissipcert::cli
