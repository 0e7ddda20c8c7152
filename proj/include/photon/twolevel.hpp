#pragma once

#include <vector>

#include "photon/filter.hpp"
#include "photon/master.hpp"
#include "photon/pulse.hpp"

namespace photon::twolevel {

// Closed-form coefficient equations for S = I, L = √κ σ−, H = ω σz, written
// out by hand in the Pauli basis. They share no code with the generic
// solvers and serve as their oracle.

/// Which version of the printed coefficient equations to use.
///
/// AsPrinted reproduces the published equations literally, including the
/// ż00 line that references z11, the sign of the ξ* z00 term in ẋ01, and (for
/// the filter) the ½-weighted gain and incomplete diffusion terms. It exists
/// to show where the printed set departs from the generic equations.
enum class Transcription { Corrected, AsPrinted };

/// ρ00 = ½(I + x00σx + y00σy + z00σz), ρ01 = ½(x01σx + y01σy + z01σz) = ρ10*,
/// ρ11 = ½(I + x11σx + …). All nine are stored complex so that realness of
/// the 00/11 coefficients can be monitored.
struct BlochMasterCoeffs {
  cplx x00, y00, z00;
  cplx x01, y01, z01;
  cplx x11, y11, z11;

  static BlochMasterCoeffs initial(const StateVector& eta);
  /// Largest imaginary part among the six coefficients that must stay real.
  double max_imag_diagonal() const;
  /// Largest absolute difference from another coefficient set.
  double max_deviation(const BlochMasterCoeffs& o) const;
};

/// Coefficients of the generic master state (x01 = tr[ρ01 σx], …).
BlochMasterCoeffs to_bloch(const GeneralizedState& s);

template <Transcription V = Transcription::Corrected>
BlochMasterCoeffs bloch_master_rhs(const BlochMasterCoeffs& c, cplx xi, double kappa,
                                   double omega);

BlochMasterCoeffs bloch_master_rhs(const BlochMasterCoeffs& c, double t, double kappa,
                                   double omega, const Pulse& p,
                                   Transcription v = Transcription::Corrected);

/// RK4 over the nine equations on the grid k·dt; returns every step.
std::vector<BlochMasterCoeffs> integrate_bloch_master(
    double kappa, double omega, const Pulse& p, const StateVector& eta, double dt, double T,
    Transcription v = Transcription::Corrected);

/// ρ̂jk = ½(ĉjk I + x̂jk σx + ŷjk σy + ẑjk σz). ĉ11 ≡ 1 and is not stored.
/// The 01 coefficients are those of ρ̂01 = ρ̂10*, i.e. of the filter block σ10.
struct BlochFilterCoeffs {
  cplx c00, x00, y00, z00;
  cplx c01, x01, y01, z01;
  cplx x11, y11, z11;

  static constexpr double c11 = 1.0;
  double max_deviation(const BlochFilterCoeffs& o) const;
};

/// Reads the coefficients off a generic filter state (σ11 must have unit trace).
BlochFilterCoeffs to_bloch(const FilterState& s);
/// Inverse of to_bloch.
FilterState from_bloch(const BlochFilterCoeffs& c, double t = 0.0);

/// dW = dY − (√κ x̂11 + ĉ01 ξ + ĉ10 ξ*) dt.
double bloch_innovation(const BlochFilterCoeffs& c, double dY, double dt, double kappa,
                        cplx xi);

/// One Euler–Maruyama step of the coefficient SDEs for the given dW.
template <Transcription V = Transcription::Corrected>
BlochFilterCoeffs bloch_filter_rhs(const BlochFilterCoeffs& c, double dW, double dt,
                                   double kappa, double omega, cplx xi);

BlochFilterCoeffs bloch_filter_rhs(const BlochFilterCoeffs& c, double dW, double dt, double t,
                                   double kappa, double omega, const Pulse& p,
                                   Transcription v = Transcription::Corrected);

}  // namespace photon::twolevel
