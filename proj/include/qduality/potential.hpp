#pragma once

#include <string>
#include <variant>

#include "qduality/grid.hpp"

namespace qduality {

struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;

  /// Throws ConfigError unless both are strictly positive and finite.
  void validate() const;
  double kinetic_prefactor() const { return hbar * hbar / (2.0 * mass); }
};

namespace potential {
struct Free {};
/// V = m w^2 (x - center)^2 / 2
struct Harmonic {
  double omega = 1.0;
  double center = 0.0;
};
/// V = -depth for |x| < width/2, else 0
struct SquareWell {
  double depth = 1.0;
  double width = 1.0;
};
/// V = height for |x - center| < width/2, else 0
struct Barrier {
  double height = 1.0;
  double width = 1.0;
  double center = 0.0;
};
struct Custom {
  RealField samples;
};
}  // namespace potential

/// Static external potential V(x).
class PotentialSpec {
 public:
  using Kind = std::variant<potential::Free, potential::Harmonic, potential::SquareWell, potential::Barrier,
                            potential::Custom>;

  PotentialSpec() = default;
  PotentialSpec(Kind kind);  // NOLINT(google-explicit-constructor)

  static PotentialSpec free() { return PotentialSpec(potential::Free{}); }
  static PotentialSpec harmonic(double omega, double center = 0.0) {
    return PotentialSpec(potential::Harmonic{omega, center});
  }

  const Kind& kind() const { return kind_; }
  bool is_free() const { return std::holds_alternative<potential::Free>(kind_); }
  std::string describe() const;

  /// Samples V on the grid. Throws ShapeError for a Custom field of the wrong length.
  RealField sample(const Grid& grid, const PhysicalConstants& c) const;
  double max_abs(const Grid& grid, const PhysicalConstants& c) const;

 private:
  Kind kind_ = potential::Free{};
};

}  // namespace qduality
