#include "dkdv/weight.hpp"

#include <cmath>
#include <sstream>

#include "dkdv/error.hpp"

namespace dkdv {

namespace {

std::string format_param(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

WeightSpec unit_weight(const Grid& grid) {
  WeightSpec w;
  w.family = WeightFamily::Unit;
  w.phi.assign(grid.size(), 1.0);
  w.dphi.assign(grid.size(), 0.0);
  w.d3phi.assign(grid.size(), 0.0);
  w.phi_at_origin = 1.0;
  w.label = "unit";
  return w;
}

WeightSpec polynomial_weight(const Grid& grid, int m) {
  if (m < 0) throw ConfigError("polynomial weight order must be >= 0");
  WeightSpec w;
  w.family = WeightFamily::Polynomial;
  w.m = m;
  const std::size_t n = grid.size();
  w.phi.resize(n);
  w.dphi.resize(n);
  w.d3phi.resize(n);
  const double md = m;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = grid.x(i) + 1.0;
    w.phi[i] = std::pow(y, md);
    w.dphi[i] = m >= 1 ? md * std::pow(y, md - 1.0) : 0.0;
    w.d3phi[i] =
        m >= 3 ? md * (md - 1.0) * (md - 2.0) * std::pow(y, md - 3.0) : 0.0;
  }
  w.phi_at_origin = 1.0;
  w.label = "poly" + std::to_string(m);
  return w;
}

WeightSpec exponential_weight(const Grid& grid, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw ConfigError("exponential weight rate b must be positive");
  }
  WeightSpec w;
  w.family = WeightFamily::Exponential;
  w.b = b;
  const std::size_t n = grid.size();
  w.phi.resize(n);
  w.dphi.resize(n);
  w.d3phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(2.0 * b * grid.x(i));
    w.phi[i] = e;
    w.dphi[i] = 2.0 * b * e;
    w.d3phi[i] = 8.0 * b * b * b * e;
  }
  w.phi_at_origin = 1.0;
  w.label = "exp" + format_param(b);
  return w;
}

WeightSpec linear_weight(const Grid& grid) {
  return custom_weight(
      grid, "linear", [](double x) { return x; }, [](double) { return 1.0; },
      [](double) { return 0.0; });
}

WeightSpec custom_weight(const Grid& grid, const std::string& label,
                         const std::function<double(double)>& phi,
                         const std::function<double(double)>& dphi,
                         const std::function<double(double)>& d3phi) {
  WeightSpec w;
  w.family = WeightFamily::Custom;
  const std::size_t n = grid.size();
  w.phi.resize(n);
  w.dphi.resize(n);
  w.d3phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i);
    w.phi[i] = phi(x);
    w.dphi[i] = dphi(x);
    w.d3phi[i] = d3phi(x);
    if (!(w.phi[i] >= 0.0) || !std::isfinite(w.phi[i])) {
      throw ConfigError("custom weight must be finite and nonnegative");
    }
  }
  w.phi_at_origin = phi(0.0);
  w.label = label;
  return w;
}

WeightSpec build_weight(const Grid& grid, const std::string& family,
                        double param) {
  if (family == "unit") return unit_weight(grid);
  if (family == "linear") return linear_weight(grid);
  if (family == "polynomial") {
    if (param < 0.0 || param != std::floor(param)) {
      throw ConfigError("polynomial weight order must be a nonnegative integer");
    }
    return polynomial_weight(grid, static_cast<int>(param));
  }
  if (family == "exponential") return exponential_weight(grid, param);
  throw ConfigError("unknown weight family '" + family + "'");
}

}  // namespace dkdv
