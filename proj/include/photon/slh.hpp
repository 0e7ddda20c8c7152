#pragma once

#include "photon/opalg.hpp"
#include "photon/pulse.hpp"

namespace photon {

inline constexpr double kDefaultWFloor = 1e-12;

/// Cascade G ◁ M = (S, L + S L_M, H + H_M + Im[L* S L_M]) for M = (I, L_M, H_M).
/// Both triples must already live on the same space; M must have S_M = I.
SLHTriple series_product(const SLHTriple& G, const SLHTriple& M, const Tolerances& tol = {});

/// Ancilla generating filter M(t) = (I, ξ(t)σ−/√w(t), 0) on C².
/// Once w(t) ≤ w_floor the coupling is switched off.
SLHTriple signal_model(const Pulse& p, double t, double w_floor = kDefaultWFloor);

/// ξ(t)/√w(t), or 0 once w(t) ≤ w_floor.
cplx signal_coupling(const Pulse& p, double t, double w_floor = kDefaultWFloor);

/// Lifts a system operator to ancilla ⊗ system.
Operator lift_system(const Operator& X);
/// Lifts an ancilla (2×2) operator to ancilla ⊗ system of system dimension d.
Operator lift_ancilla(const Operator& A, int system_dim);

/// Ancilla observables Q_jk and weights w_jk(t) that recover the four
/// generalized expectations from the extended system.
struct AncillaObservables {
  enum Block { k11 = 0, k10 = 1, k01 = 2, k00 = 3 };
  static Operator Q(Block b);
  /// w11 = 1, w10 = w01 = √w, w00 = w.
  static double weight(Block b, double w);
};

/// Amplitudes (√w, √(1−w)) of the still-excited and already-emitted branches
/// of the generating filter state.
struct GeneratingFilterWeights {
  double vacuum_amp;
  double one_photon_amp;
};
GeneratingFilterWeights generating_filter_weights(const Pulse& p, double t);

/// The plant G cascaded after the single-photon generating filter.
///
/// Lives on ancilla ⊗ system (dimension 2d). The lifted time-independent
/// parts are built once; the triple at time t is assembled on demand.
class ExtendedSystem {
 public:
  ExtendedSystem(SLHTriple base, Pulse pulse, double w_floor = kDefaultWFloor);

  const SLHTriple& base() const { return base_; }
  const Pulse& pulse() const { return pulse_; }
  double w_floor() const { return w_floor_; }
  int system_dim() const { return base_.dim(); }
  int dim() const { return 2 * base_.dim(); }

  /// (S̃, L̃(t), H̃(t)) = G ◁ M(t).
  SLHTriple triple(double t) const;

  /// Generator of G ◁ M(t) on a product A ⊗ X, assembled from the
  /// Evans–Hudson maps of G.
  Operator generator(double t, const Operator& A, const Operator& X) const;

  /// Initial state |e⟩⟨e| ⊗ |η⟩⟨η|.
  Operator initial_state(const StateVector& eta) const;

 private:
  SLHTriple base_;
  Pulse pulse_;
  double w_floor_;
  Operator S_lift_, L_lift_, H_lift_;
  Operator lower_S_;      // σ− ⊗ S
  Operator im_partner_;   // σ− ⊗ L*S, for Im[L* S L0]
};

/// Free-function form of ExtendedSystem::generator.
Operator extended_generator(const ExtendedSystem& ext, double t, const Operator& A,
                            const Operator& X);

}  // namespace photon
