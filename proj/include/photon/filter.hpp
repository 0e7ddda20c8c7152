#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "photon/master.hpp"
#include "photon/opalg.hpp"
#include "photon/pulse.hpp"
#include "photon/rng.hpp"
#include "photon/slh.hpp"

namespace photon {

/// Conditional blocks of the single-photon filter, πjk(X) = tr[σjk X].
///
/// σ11 is the conditional density operator of the system. Note the pairing
/// differs from GeneralizedState: σ10 here evolves like ρ01 there.
struct FilterState {
  Operator sigma11, sigma10, sigma01, sigma00;
  double t = 0.0;

  static FilterState initial(const StateVector& eta);
  const Operator& block(int jk) const;
  cplx expectation(int jk, const Operator& X) const { return trace_product(block(jk), X); }
};

/// Discretised homodyne record: increments dY over a uniform grid.
struct MeasurementRecord {
  double dt = 0.0;
  std::vector<double> dY;
  std::uint64_t seed = 0;
  std::string generator;  // free-form provenance; not serialised

  double horizon() const { return dt * static_cast<double>(dY.size()); }
};

/// Text format: `dt=<float> n=<int> seed=<uint64>` then one dY per line,
/// 17 significant digits.
void write_record(std::ostream& os, const MeasurementRecord& rec);
MeasurementRecord read_record(std::istream& is);
void save_record(const std::string& path, const MeasurementRecord& rec);
MeasurementRecord load_record(const std::string& path);

/// Thrown when a stochastic step produces NaN/Inf or a non-real gain.
class FilterError : public std::runtime_error {
 public:
  FilterError(double t, const std::string& what);
  double time() const { return time_; }

 private:
  double time_;
};

/// K_t = π11(L + L*) + π10(S) ξ + π01(S*) ξ*. Throws FilterError when the
/// imaginary residue exceeds 1e−10.
double gain(const FilterState& s, const SLHTriple& G, cplx xi);
double gain(const FilterState& s, const SLHTriple& G, const Pulse& p, double t);

struct StepResult {
  double gain = 0.0;
  double dW = 0.0;
};

/// One Euler–Maruyama step of the coupled filter, in place. dW = dY − K dt.
StepResult filter_step(FilterState& s, double dY, double dt, const SLHTriple& G, cplx xi,
                       bool renormalize = false);
/// Returns the advanced state; ξ is taken from the pulse at s.t.
FilterState filter_step(const FilterState& s, double dY, double dt, const SLHTriple& G,
                        const Pulse& p);

/// The same step written on expectations: the updated πjk(X) obtained from
/// the Heisenberg-form SDEs. The 01 equation is the adjoint of the 10 one.
std::array<cplx, 4> filter_step_heisenberg(const FilterState& s, double dY, double dt,
                                           const SLHTriple& G, cplx xi, const Operator& X);

/// Vacuum-field homodyne filter step in place, K = tr[ρ (L + L*)].
StepResult vacuum_filter_step(Operator& rho, double dY, double dt, const SLHTriple& G);
Operator vacuum_filter_step(const Operator& rho, double dY, double dt, const SLHTriple& G);

struct TrajectoryOptions {
  std::vector<NamedOperator> observables;
  /// Store per-step series (π11, extended cross-check, Y, W). Off for ensembles.
  bool record_series = true;
  /// Store FilterState every `snapshot_stride` steps; 0 disables.
  std::size_t snapshot_stride = 0;
  /// Times at which observable values are sampled for ensemble reduction.
  std::vector<double> checkpoints;
  double w_floor = kDefaultWFloor;
  double cross_check_tolerance = 1e-2;
  bool renormalize = false;
};

/// Record produced by the extended system together with what its
/// conditional state predicted for each observable.
struct GeneratedRecord {
  MeasurementRecord record;
  std::vector<std::vector<double>> extended;  // [obs][k] = tr[ρ̃c(t_k)(I ⊗ X)]
  std::vector<Operator> snapshots;            // ρ̃c at the snapshot stride
};

/// Propagates ρ̃c with the vacuum filter of G ◁ M(t) and emits
/// dY_k = tr[(L̃ + L̃*)ρ̃c] dt + dW_k for the supplied Brownian increments.
GeneratedRecord generate_record(const ExtendedSystem& ext, const StateVector& eta, double dt,
                                const std::vector<double>& noise,
                                const TrajectoryOptions& opts = {});
/// Same, drawing dW_k ~ N(0, dt) from the (seed, trajectory) Philox stream.
GeneratedRecord generate_record(const ExtendedSystem& ext, const StateVector& eta, double dt,
                                double T, std::uint64_t seed, std::uint64_t trajectory = 0,
                                const TrajectoryOptions& opts = {});

struct TrajectoryRun {
  TimeGrid grid;
  std::vector<std::string> observable_names;
  // Per-step series, index k = 0..n (only when record_series).
  std::vector<std::vector<double>> pi11;      // [obs][k] = Re π11(X)
  std::vector<std::vector<double>> extended;  // [obs][k]; empty for record-driven runs
  std::vector<double> Y;                      // cumulative record, Y(0) = 0
  std::vector<double> W;                      // cumulative innovations, W(0) = 0
  std::vector<double> dY;                     // [k] for k = 0..n−1
  std::vector<double> dW;
  std::vector<double> gain;
  std::vector<FilterState> snapshots;
  // Checkpoint samples [obs][c] of π11(X).
  std::vector<double> checkpoint_times;
  std::vector<std::vector<double>> checkpoint_values;
  double W_final = 0.0;
  // Diagnostics.
  double max_cross_asymmetry = 0.0;   // ‖σ01 − σ10*‖
  double max_trace_drift = 0.0;       // |tr σ11 − 1|
  std::vector<double> max_cross_check;  // [obs] sup_t |π11(X) − tr[ρ̃c (I⊗X)]|
  bool cross_check_flagged = false;
};

/// Runs the single-photon filter on an existing record. When `generated` is
/// given its extended predictions are used for the cross-check.
TrajectoryRun run_filter(const SLHTriple& G, const Pulse& p, const StateVector& eta,
                         const MeasurementRecord& rec, const TrajectoryOptions& opts = {},
                         const GeneratedRecord* generated = nullptr);

/// Generates a record from the extended system and filters it.
TrajectoryRun run_trajectory(const SLHTriple& G, const Pulse& p, const StateVector& eta,
                             double dt, double T, std::uint64_t seed,
                             std::uint64_t trajectory = 0, const TrajectoryOptions& opts = {});

struct EnsembleResult {
  std::vector<double> checkpoint_times;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> mean;    // [obs][c]
  std::vector<std::vector<double>> stderr_; // [obs][c]
  std::vector<double> W_final;              // per trajectory
  double W_mean = 0.0;
  double W_var = 0.0;                       // unbiased sample variance
  std::size_t n_traj = 0;
  double max_trace_drift = 0.0;
  double max_cross_asymmetry = 0.0;
};

/// Number of worker threads: PHOTON_FILTER_THREADS if set, else `requested`
/// if > 0, else hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Independent trajectories (seed, 0..n_traj−1) on a worker pool. Reduction
/// happens in trajectory order, so results do not depend on scheduling.
EnsembleResult run_ensemble(const SLHTriple& G, const Pulse& p, const StateVector& eta,
                            double dt, double T, std::uint64_t seed, std::size_t n_traj,
                            const TrajectoryOptions& opts, unsigned threads = 0);

}  // namespace photon
