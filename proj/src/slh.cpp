#include "photon/slh.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace photon {

namespace {

// Im[A] = (A − A*)/(2i)
Operator imag_part(const Operator& a) {
  return (a - a.adjoint()) * cplx(0.0, -0.5);
}

}  // namespace

SLHTriple series_product(const SLHTriple& G, const SLHTriple& M, const Tolerances& tol) {
  if (G.dim() != M.dim()) {
    std::ostringstream msg;
    msg << "series_product: dimension mismatch (" << G.dim() << " vs " << M.dim() << ")";
    throw DimensionError(msg.str());
  }
  if (!is_unitary(M.S(), tol.structural) ||
      max_abs(M.S() - identity(M.dim())) > tol.structural) {
    throw std::invalid_argument("series_product: the upstream system must have S = I");
  }
  Operator L = G.L();
  L.noalias() += G.S() * M.L();
  Operator H = G.H() + M.H();
  H += imag_part(G.L().adjoint() * G.S() * M.L());
  return SLHTriple::unchecked(G.S(), std::move(L), std::move(H));
}

cplx signal_coupling(const Pulse& p, double t, double w_floor) {
  const double w = p.tail_weight(t);
  if (w <= w_floor) return 0.0;
  return p.eval(t) / std::sqrt(w);
}

SLHTriple signal_model(const Pulse& p, double t, double w_floor) {
  return SLHTriple::unchecked(identity(2), signal_coupling(p, t, w_floor) * pauli::lower(),
                              zeros(2));
}

Operator lift_system(const Operator& X) { return kron(identity(2), X); }

Operator lift_ancilla(const Operator& A, int system_dim) {
  return kron(A, identity(system_dim));
}

Operator AncillaObservables::Q(Block b) {
  switch (b) {
    case k11: return identity(2);
    case k10: return pauli::lower();
    case k01: return pauli::raise();
    case k00: return pauli::number();
  }
  throw std::invalid_argument("AncillaObservables::Q: bad block");
}

double AncillaObservables::weight(Block b, double w) {
  switch (b) {
    case k11: return 1.0;
    case k10:
    case k01: return std::sqrt(w);
    case k00: return w;
  }
  throw std::invalid_argument("AncillaObservables::weight: bad block");
}

GeneratingFilterWeights generating_filter_weights(const Pulse& p, double t) {
  const double w = p.tail_weight(t);
  return {std::sqrt(w), std::sqrt(1.0 - w)};
}

ExtendedSystem::ExtendedSystem(SLHTriple base, Pulse pulse, double w_floor)
    : base_(std::move(base)), pulse_(std::move(pulse)), w_floor_(w_floor) {
  if (!(w_floor_ > 0.0)) throw std::invalid_argument("ExtendedSystem: w_floor must be > 0");
  S_lift_ = lift_system(base_.S());
  L_lift_ = lift_system(base_.L());
  H_lift_ = lift_system(base_.H());
  lower_S_ = kron(pauli::lower(), base_.S());
  im_partner_ = kron(pauli::lower(), base_.L().adjoint() * base_.S());
}

SLHTriple ExtendedSystem::triple(double t) const {
  const cplx a = signal_coupling(pulse_, t, w_floor_);
  Operator L = L_lift_ + a * lower_S_;
  // Im[L* S L0] with L0 = a σ− ⊗ I  →  Im[a σ− ⊗ L*S]
  Operator H = H_lift_ + imag_part(a * im_partner_);
  return SLHTriple::unchecked(S_lift_, std::move(L), std::move(H));
}

Operator ExtendedSystem::generator(double t, const Operator& A, const Operator& X) const {
  if (A.rows() != 2 || A.cols() != 2) throw DimensionError("extended generator: A must be 2x2");
  const SLHTriple& G = base_;
  require_same_dim(G.L(), X, "extended generator");
  const Operator L0 = signal_coupling(pulse_, t, w_floor_) * pauli::lower();
  const Operator L0d = L0.adjoint();
  const Operator& S = G.S();
  const Operator& L = G.L();

  Operator out = kron(A, lindblad_heisenberg(G, X));
  out += kron(dissipator_heisenberg(L0, A), X);
  out += kron(L0d * A, S.adjoint() * commutator(X, L));
  out += kron(A * L0, commutator(L.adjoint(), X) * S);
  out += kron(L0d * A * L0, S.adjoint() * X * S - X);
  return out;
}

Operator ExtendedSystem::initial_state(const StateVector& eta) const {
  if (eta.size() != system_dim()) {
    throw DimensionError("ExtendedSystem::initial_state: eta has wrong dimension");
  }
  return kron(pauli::number(), projector(eta));
}

Operator extended_generator(const ExtendedSystem& ext, double t, const Operator& A,
                            const Operator& X) {
  return ext.generator(t, A, X);
}

}  // namespace photon
