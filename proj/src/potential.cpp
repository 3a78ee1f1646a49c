#include "qduality/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qduality/errors.hpp"

namespace qduality {

void PhysicalConstants::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ConfigError("constants: hbar must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ConfigError("constants: mass must be positive");
}

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(std::initializer_list<double> values, const char* what) {
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigError(std::string("potential: non-finite parameter in ") + what);
}
}  // namespace

PotentialSpec::PotentialSpec(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [](const potential::Free&) {},
                 [](const potential::Harmonic& h) { require_finite({h.omega, h.center}, "harmonic"); },
                 [](const potential::SquareWell& w) {
                   require_finite({w.depth, w.width}, "square_well");
                   if (!(w.width > 0.0)) throw ConfigError("potential: square_well width must be positive");
                 },
                 [](const potential::Barrier& b) {
                   require_finite({b.height, b.width, b.center}, "barrier");
                   if (!(b.width > 0.0)) throw ConfigError("potential: barrier width must be positive");
                 },
                 [](const potential::Custom& c) {
                   for (double v : c.samples)
                     if (!std::isfinite(v)) throw ConfigError("potential: custom samples must be finite");
                 },
             },
             kind_);
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const potential::Free&) { os << "free"; },
                 [&](const potential::Harmonic& h) { os << "harmonic(omega=" << h.omega << ", center=" << h.center << ")"; },
                 [&](const potential::SquareWell& w) { os << "square_well(depth=" << w.depth << ", width=" << w.width << ")"; },
                 [&](const potential::Barrier& b) {
                   os << "barrier(height=" << b.height << ", width=" << b.width << ", center=" << b.center << ")";
                 },
                 [&](const potential::Custom& c) { os << "custom(" << c.samples.size() << " samples)"; },
             },
             kind_);
  return os.str();
}

RealField PotentialSpec::sample(const Grid& grid, const PhysicalConstants& c) const {
  const std::size_t n = grid.size();
  RealField v(n, 0.0);
  std::visit(overloaded{
                 [](const potential::Free&) {},
                 [&](const potential::Harmonic& h) {
                   const double k = 0.5 * c.mass * h.omega * h.omega;
                   for (std::size_t i = 0; i < n; ++i) v[i] = k * (grid.x(i) - h.center) * (grid.x(i) - h.center);
                 },
                 [&](const potential::SquareWell& w) {
                   for (std::size_t i = 0; i < n; ++i)
                     if (std::abs(grid.x(i)) < 0.5 * w.width) v[i] = -w.depth;
                 },
                 [&](const potential::Barrier& b) {
                   for (std::size_t i = 0; i < n; ++i)
                     if (std::abs(grid.x(i) - b.center) < 0.5 * b.width) v[i] = b.height;
                 },
                 [&](const potential::Custom& cu) {
                   require_length(grid, cu.samples.size(), "custom potential");
                   v = cu.samples;
                 },
             },
             kind_);
  return v;
}

double PotentialSpec::max_abs(const Grid& grid, const PhysicalConstants& c) const {
  const RealField v = sample(grid, c);
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace qduality
