#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "photon/opalg.hpp"
#include "photon/pulse.hpp"
#include "photon/slh.hpp"

namespace photon {

/// A Hermitian (or at least named) operator whose expectations are recorded.
struct NamedOperator {
  std::string name;
  Operator op;
};

/// Uniform grid t_k = k·dt, k = 0..n_steps.
struct TimeGrid {
  double dt = 1e-3;
  std::size_t n_steps = 0;

  static TimeGrid from_horizon(double dt, double T);
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  double horizon() const { return time(n_steps); }
};

/// Raised when an integration leaves its invariant envelope.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(double t, std::string invariant, double magnitude);
  double time() const { return time_; }
  const std::string& invariant() const { return invariant_; }
  double magnitude() const { return magnitude_; }

 private:
  double time_;
  std::string invariant_;
  double magnitude_;
};

/// The four generalized density operators ρ11, ρ10, ρ01, ρ00.
///
/// Expectations pair through ⟨ρ, X⟩ = tr[ρ* X], so μ10(X) = tr[ρ01 X].
struct GeneralizedState {
  Operator rho11, rho10, rho01, rho00;
  double t = 0.0;

  /// ρ11 = ρ00 = |η⟩⟨η|, cross blocks zero.
  static GeneralizedState initial(const StateVector& eta);

  int dim() const { return static_cast<int>(rho11.rows()); }
  const Operator& block(int jk) const;
  /// ⟨ρjk, X⟩ for jk ∈ {0:11, 1:10, 2:01, 3:00}.
  cplx expectation(int jk, const Operator& X) const;

  GeneralizedState& operator+=(const GeneralizedState& o);
  GeneralizedState& operator*=(double h);
};
GeneralizedState operator+(GeneralizedState a, const GeneralizedState& b);
GeneralizedState operator*(double h, GeneralizedState a);

inline constexpr std::array<const char*, 4> kBlockLabels{"11", "10", "01", "00"};

/// Time derivative of the coupled single-photon master equations (Schrödinger form).
GeneralizedState master_rhs(const GeneralizedState& s, double t, const SLHTriple& G,
                            const Pulse& p);
/// Same, with ξ(t) supplied directly.
GeneralizedState master_rhs(const GeneralizedState& s, cplx xi, const SLHTriple& G);

/// Heisenberg-form right-hand sides d/dt μjk(X), evaluated from the current
/// state via the Evans–Hudson maps. Used to cross-check the Schrödinger form.
std::array<cplx, 4> master_rhs_heisenberg(const GeneralizedState& s, double t,
                                          const SLHTriple& G, const Pulse& p,
                                          const Operator& X);

struct MasterOptions {
  std::vector<NamedOperator> observables;
  std::size_t snapshot_stride = 100;
  double abort_threshold = 1e-6;
};

struct InvariantSummary {
  double max_trace_drift = 0.0;        // max |tr ρ11 − 1|, |tr ρ00 − 1|
  double max_cross_trace = 0.0;        // max |tr ρ10|, |tr ρ01|
  double max_cross_asymmetry = 0.0;    // max ‖ρ01 − ρ10*‖
  double max_hermiticity_defect = 0.0; // ρ11, ρ00
  double min_eigenvalue = 1.0;         // over ρ11, ρ00
};

struct MasterRun {
  TimeGrid grid;
  std::vector<std::string> observable_names;
  /// expectations[obs][jk][k] = ⟨ρjk(t_k), X_obs⟩
  std::vector<std::array<std::vector<cplx>, 4>> expectations;
  std::size_t snapshot_stride = 1;
  std::vector<GeneralizedState> snapshots;  // at k = 0, stride, 2·stride, …
  InvariantSummary invariants;

  std::size_t observable_index(const std::string& name) const;
};

/// Classical RK4 over the coupled system from ρ11 = ρ00 = |η⟩⟨η|.
MasterRun integrate_master(const SLHTriple& G, const Pulse& p, const StateVector& eta,
                           double dt, double T, const MasterOptions& opts = {});

struct VacuumRun {
  TimeGrid grid;
  std::vector<std::string> observable_names;
  std::vector<std::vector<cplx>> expectations;  // [obs][k] = tr[ρ(t_k) X]
  std::size_t snapshot_stride = 1;
  std::vector<Operator> snapshots;
  double max_trace_drift = 0.0;
  double max_hermiticity_defect = 0.0;
};

/// RK4 on ρ̇ = 𝒢*(ρ).
VacuumRun integrate_vacuum_master(const SLHTriple& G, const Operator& rho0, double dt,
                                  double T, const MasterOptions& opts = {});

struct EmbeddingRun {
  TimeGrid grid;
  std::vector<std::string> observable_names;
  /// mu[obs][jk][k] = tr[ρ̃(t_k)(Q_jk ⊗ X)] / w_jk(t_k); NaN once w_jk ≤ w_floor.
  std::vector<std::array<std::vector<cplx>, 4>> mu;
  std::vector<double> tail_weight;       // w(t_k)
  std::vector<double> ancilla_excited;   // tr[ρ̃ (n ⊗ I)]
  std::size_t snapshot_stride = 1;
  std::vector<Operator> snapshots;       // extended states
  std::size_t suppressed = 0;            // entries skipped because w_jk ≤ w_floor
};

/// Integrates the extended (ancilla ⊗ system) vacuum master equation from
/// |e⟩⟨e| ⊗ |η⟩⟨η| and reads the four generalized expectations back out.
EmbeddingRun embedding_oracle(const SLHTriple& G, const Pulse& p, const StateVector& eta,
                              double dt, double T, const MasterOptions& opts = {},
                              double w_floor = kDefaultWFloor);

/// RK4 for the time-dependent extended vacuum master equation.
Operator extended_master_step(const ExtendedSystem& ext, const Operator& rho, double t,
                              double dt);

}  // namespace photon
