#pragma once

// Minimal reader for the SVG this library writes: path elements made of
// M, L, C, A and Z commands with absolute coordinates.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <string>
#include <vector>

namespace svg {

struct Pt {
  double x = 0.0;
  double y = 0.0;
};

struct Element {
  std::string id;
  std::string d;
  std::string fill;
};

inline std::vector<Element> elements(const std::string& doc) {
  std::vector<Element> out;
  static const std::regex re(R"re(<path id="([^"]*)" d="([^"]*)" fill="([^"]*)")re");
  for (auto it = std::sregex_iterator(doc.begin(), doc.end(), re); it != std::sregex_iterator(); ++it)
    out.push_back({(*it)[1], (*it)[2], (*it)[3]});
  return out;
}

struct Command {
  char op = 0;
  std::vector<double> args;
};

inline std::vector<Command> commands(const std::string& d) {
  std::vector<Command> out;
  std::size_t i = 0;
  while (i < d.size()) {
    char c = d[i];
    if (std::isalpha(static_cast<unsigned char>(c))) {
      out.push_back({c, {}});
      ++i;
    } else if (c == ' ' || c == ',') {
      ++i;
    } else {
      char* end = nullptr;
      const double v = std::strtod(d.c_str() + i, &end);
      out.back().args.push_back(v);
      i = static_cast<std::size_t>(end - d.c_str());
    }
  }
  return out;
}

struct Cubic {
  Pt p0, c1, c2, p3;
};

/// Every cubic segment together with the current point it starts from.
inline std::vector<Cubic> cubics(const std::string& d) {
  std::vector<Cubic> out;
  Pt cur;
  for (const auto& c : commands(d)) {
    const auto& a = c.args;
    if (c.op == 'M' || c.op == 'L') cur = {a[0], a[1]};
    else if (c.op == 'A') cur = {a[5], a[6]};
    else if (c.op == 'C') {
      out.push_back({cur, {a[0], a[1]}, {a[2], a[3]}, {a[4], a[5]}});
      cur = {a[4], a[5]};
    }
  }
  return out;
}

using Polygon = std::vector<Pt>;

namespace detail {

inline void flatten_arc(Polygon& poly, Pt from, double rx, double ry, bool large, bool sweep, Pt to,
                        int steps) {
  // endpoint to centre parameterization, no rotation
  const double dx = (from.x - to.x) / 2.0;
  const double dy = (from.y - to.y) / 2.0;
  double lambda = (dx * dx) / (rx * rx) + (dy * dy) / (ry * ry);
  if (lambda > 1.0) {
    rx *= std::sqrt(lambda);
    ry *= std::sqrt(lambda);
  }
  const double num = rx * rx * ry * ry - rx * rx * dy * dy - ry * ry * dx * dx;
  const double den = rx * rx * dy * dy + ry * ry * dx * dx;
  double coef = den > 0.0 ? std::sqrt(std::max(0.0, num / den)) : 0.0;
  if (large == sweep) coef = -coef;
  const double cxp = coef * rx * dy / ry;
  const double cyp = -coef * ry * dx / rx;
  const double cx = cxp + (from.x + to.x) / 2.0;
  const double cy = cyp + (from.y + to.y) / 2.0;
  const double a0 = std::atan2((from.y - cy) / ry, (from.x - cx) / rx);
  double a1 = std::atan2((to.y - cy) / ry, (to.x - cx) / rx);
  double delta = a1 - a0;
  const double pi = std::acos(-1.0);
  if (sweep && delta < 0) delta += 2 * pi;
  if (!sweep && delta > 0) delta -= 2 * pi;
  for (int k = 1; k <= steps; ++k) {
    const double a = a0 + delta * k / steps;
    poly.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
  }
  poly.back() = to;
}

}  // namespace detail

/// Closed polygons approximating each subpath.
inline std::vector<Polygon> polygons(const std::string& d, int steps = 24) {
  std::vector<Polygon> out;
  Pt cur;
  for (const auto& c : commands(d)) {
    const auto& a = c.args;
    switch (c.op) {
      case 'M':
        out.emplace_back();
        cur = {a[0], a[1]};
        out.back().push_back(cur);
        break;
      case 'L':
        cur = {a[0], a[1]};
        out.back().push_back(cur);
        break;
      case 'C': {
        const Pt p0 = cur, p1{a[0], a[1]}, p2{a[2], a[3]}, p3{a[4], a[5]};
        for (int k = 1; k <= steps; ++k) {
          const double s = static_cast<double>(k) / steps;
          const double u = 1.0 - s;
          out.back().push_back({u * u * u * p0.x + 3 * u * u * s * p1.x + 3 * u * s * s * p2.x + s * s * s * p3.x,
                                u * u * u * p0.y + 3 * u * u * s * p1.y + 3 * u * s * s * p2.y + s * s * s * p3.y});
        }
        cur = p3;
        break;
      }
      case 'A':
        detail::flatten_arc(out.back(), cur, a[0], a[1], a[3] != 0.0, a[4] != 0.0, {a[5], a[6]}, steps);
        cur = {a[5], a[6]};
        break;
      default:
        break;
    }
  }
  return out;
}

/// Even-odd inside test over all polygons.
inline bool inside(const std::vector<Polygon>& polys, double x, double y) {
  bool in = false;
  for (const auto& poly : polys) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Pt& a = poly[i];
      const Pt& b = poly[j];
      if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
  }
  return in;
}

/// Signed area of all polygons; shoelace formula.
inline double area(const std::vector<Polygon>& polys) {
  double total = 0.0;
  for (const auto& poly : polys) {
    double s = 0.0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
      s += (poly[j].x * poly[i].y - poly[i].x * poly[j].y);
    total += 0.5 * s;
  }
  return total;
}

}  // namespace svg
