#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "photon/opalg.hpp"

namespace photon {

/// Wavepacket ξ(t) of a continuous-mode single photon, t ≥ 0.
///
/// Every shape is normalised so that ∫₀^∞ |ξ|² = 1; construction verifies
/// this by quadrature and throws InvariantError otherwise. An optional
/// carrier detuning multiplies ξ by exp(−iΔt) and leaves |ξ|² untouched.
class Pulse {
 public:
  /// |ξ|² is a normal density (mean t0, std sigma) truncated to [0, ∞).
  struct Gaussian {
    double t0;
    double sigma;
  };
  /// ξ = √γ exp(−γ(t − t0)/2) for t ≥ t0, zero before.
  struct DecayingExponential {
    double gamma;
    double t0;
  };
  /// Constant amplitude on [t0, t1].
  struct Square {
    double t0;
    double t1;
  };
  /// Linear interpolation of complex samples; zero outside the grid.
  struct Tabulated {
    std::vector<double> grid;
    std::vector<cplx> values;
  };
  using Shape = std::variant<Gaussian, DecayingExponential, Square, Tabulated>;

  static Pulse gaussian(double t0, double sigma, double detuning = 0.0);
  static Pulse decaying_exponential(double gamma, double t0, double detuning = 0.0);
  static Pulse square(double t0, double t1, double detuning = 0.0);
  /// Samples are renormalised so the interpolant has unit norm.
  static Pulse tabulated(std::vector<double> grid, std::vector<cplx> values,
                         double detuning = 0.0);

  /// ξ(t); throws std::domain_error for t < 0.
  cplx eval(double t) const;
  /// w(t) = ∫_t^∞ |ξ(s)|² ds; throws std::domain_error for t < 0.
  double tail_weight(double t) const;
  /// Time after which ξ vanishes or is negligible (used for quadrature).
  double support_end() const;

  const Shape& shape() const { return shape_; }
  double detuning() const { return detuning_; }
  std::string describe() const;

 private:
  Pulse(Shape shape, double detuning);
  void build_tail_table();
  void verify_normalisation() const;
  cplx envelope(double t) const;

  Shape shape_;
  double detuning_ = 0.0;
  double gauss_norm2_ = 0.0;       // 1 / ∫₀^∞ exp(−(t−t0)²/2σ²)
  std::vector<double> tail_nodes_;  // tabulated: w at each grid node
};

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 50);

}  // namespace photon
