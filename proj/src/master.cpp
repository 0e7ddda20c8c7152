#include "photon/master.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace photon {

namespace {

std::string describe_breach(double t, const std::string& invariant, double magnitude) {
  std::ostringstream msg;
  msg << "integration aborted at t=" << t << ": " << invariant << " = " << magnitude;
  return msg.str();
}

// tr[a* b]
cplx inner(const Operator& a, const Operator& b) { return trace_product(a.adjoint(), b); }

template <typename State, typename Rhs>
State rk4(const State& y, double t, double dt, const Rhs& f) {
  const State k1 = f(y, t);
  const State k2 = f(y + (0.5 * dt) * k1, t + 0.5 * dt);
  const State k3 = f(y + (0.5 * dt) * k2, t + 0.5 * dt);
  const State k4 = f(y + dt * k3, t + dt);
  State out = y;
  out += (dt / 6.0) * k1;
  out += (dt / 3.0) * k2;
  out += (dt / 3.0) * k3;
  out += (dt / 6.0) * k4;
  return out;
}

void check_eta(const StateVector& eta, int dim) {
  if (eta.size() != dim) throw DimensionError("initial state has wrong dimension");
  if (std::abs(eta.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("initial state must be a unit vector");
  }
}

void require_step(double dt, double T) {
  if (!(dt > 0.0) || !(T >= dt)) throw std::invalid_argument("need dt > 0 and T >= dt");
}

}  // namespace

TimeGrid TimeGrid::from_horizon(double dt, double T) {
  require_step(dt, T);
  const double steps = T / dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
    std::ostringstream msg;
    msg << "horizon T=" << T << " is not an integer multiple of dt=" << dt;
    throw std::invalid_argument(msg.str());
  }
  return TimeGrid{dt, static_cast<std::size_t>(rounded)};
}

IntegrationError::IntegrationError(double t, std::string invariant, double magnitude)
    : std::runtime_error(describe_breach(t, invariant, magnitude)),
      time_(t),
      invariant_(std::move(invariant)),
      magnitude_(magnitude) {}

GeneralizedState GeneralizedState::initial(const StateVector& eta) {
  const Operator p = projector(eta);
  const Operator z = zeros(static_cast<int>(eta.size()));
  return GeneralizedState{p, z, z, p, 0.0};
}

const Operator& GeneralizedState::block(int jk) const {
  switch (jk) {
    case 0: return rho11;
    case 1: return rho10;
    case 2: return rho01;
    case 3: return rho00;
  }
  throw std::out_of_range("GeneralizedState::block");
}

cplx GeneralizedState::expectation(int jk, const Operator& X) const {
  return inner(block(jk), X);
}

GeneralizedState& GeneralizedState::operator+=(const GeneralizedState& o) {
  rho11 += o.rho11;
  rho10 += o.rho10;
  rho01 += o.rho01;
  rho00 += o.rho00;
  return *this;
}

GeneralizedState& GeneralizedState::operator*=(double h) {
  rho11 *= h;
  rho10 *= h;
  rho01 *= h;
  rho00 *= h;
  return *this;
}

GeneralizedState operator+(GeneralizedState a, const GeneralizedState& b) {
  a += b;
  return a;
}

GeneralizedState operator*(double h, GeneralizedState a) {
  a *= h;
  return a;
}

GeneralizedState master_rhs(const GeneralizedState& s, cplx xi, const SLHTriple& G) {
  require_same_dim(s.rho11, G.L(), "master_rhs");
  const Operator& S = G.S();
  const Operator& L = G.L();
  const Operator Sd = S.adjoint();
  const Operator Ld = L.adjoint();
  const cplx xic = std::conj(xi);

  GeneralizedState d;
  d.t = s.t;
  d.rho00 = lindblad_schrodinger(G, s.rho00);

  d.rho10 = lindblad_schrodinger(G, s.rho10);
  d.rho10 += xi * commutator(S * s.rho00, Ld);

  d.rho01 = lindblad_schrodinger(G, s.rho01);
  d.rho01 += xic * commutator(L, s.rho00 * Sd);

  d.rho11 = lindblad_schrodinger(G, s.rho11);
  d.rho11 += xi * commutator(S * s.rho01, Ld);
  d.rho11 += xic * commutator(L, s.rho10 * Sd);
  d.rho11 += std::norm(xi) * (S * s.rho00 * Sd - s.rho00);
  return d;
}

GeneralizedState master_rhs(const GeneralizedState& s, double t, const SLHTriple& G,
                            const Pulse& p) {
  return master_rhs(s, p.eval(t), G);
}

std::array<cplx, 4> master_rhs_heisenberg(const GeneralizedState& s, double t,
                                          const SLHTriple& G, const Pulse& p,
                                          const Operator& X) {
  const cplx xi = p.eval(t);
  const Operator& S = G.S();
  const Operator& L = G.L();
  const Operator gen = lindblad_heisenberg(G, X);
  const Operator emit = S.adjoint() * commutator(X, L);           // S*[X, L]
  const Operator absorb = commutator(L.adjoint(), X) * S;         // [L*, X] S
  const Operator scatter = S.adjoint() * X * S - X;               // S*XS − X
  auto mu = [&](int jk, const Operator& Y) { return s.expectation(jk, Y); };
  return {
      mu(0, gen) + mu(2, emit) * std::conj(xi) + mu(1, absorb) * xi +
          mu(3, scatter) * std::norm(xi),
      mu(1, gen) + mu(3, emit) * std::conj(xi),
      mu(2, gen) + mu(3, absorb) * xi,
      mu(3, gen),
  };
}

std::size_t MasterRun::observable_index(const std::string& name) const {
  const auto it = std::find(observable_names.begin(), observable_names.end(), name);
  if (it == observable_names.end()) throw std::out_of_range("unknown observable " + name);
  return static_cast<std::size_t>(std::distance(observable_names.begin(), it));
}

MasterRun integrate_master(const SLHTriple& G, const Pulse& p, const StateVector& eta,
                           double dt, double T, const MasterOptions& opts) {
  check_eta(eta, G.dim());
  MasterRun run;
  run.grid = TimeGrid::from_horizon(dt, T);
  run.snapshot_stride = std::max<std::size_t>(1, opts.snapshot_stride);
  for (const auto& o : opts.observables) {
    require_same_dim(o.op, G.L(), "integrate_master observable");
    run.observable_names.push_back(o.name);
  }
  run.expectations.resize(opts.observables.size());
  for (auto& e : run.expectations) {
    for (auto& series : e) series.reserve(run.grid.n_steps + 1);
  }

  auto record = [&](const GeneralizedState& s, std::size_t k) {
    for (std::size_t i = 0; i < opts.observables.size(); ++i) {
      for (int jk = 0; jk < 4; ++jk) {
        run.expectations[i][jk].push_back(s.expectation(jk, opts.observables[i].op));
      }
    }
    if (k % run.snapshot_stride == 0) run.snapshots.push_back(s);

    auto& inv = run.invariants;
    const double t = s.t;
    const double drift = std::max(std::abs(s.rho11.trace() - 1.0),
                                  std::abs(s.rho00.trace() - 1.0));
    const double cross = std::max(std::abs(s.rho10.trace()), std::abs(s.rho01.trace()));
    const double asym = max_abs(s.rho01 - s.rho10.adjoint());
    const double herm = std::max(hermiticity_defect(s.rho11), hermiticity_defect(s.rho00));
    const double eig = std::min(min_eigenvalue(s.rho11), min_eigenvalue(s.rho00));
    inv.max_trace_drift = std::max(inv.max_trace_drift, drift);
    inv.max_cross_trace = std::max(inv.max_cross_trace, cross);
    inv.max_cross_asymmetry = std::max(inv.max_cross_asymmetry, asym);
    inv.max_hermiticity_defect = std::max(inv.max_hermiticity_defect, herm);
    inv.min_eigenvalue = std::min(inv.min_eigenvalue, eig);

    const double limit = opts.abort_threshold;
    if (!is_finite(s.rho11) || !is_finite(s.rho10) || !is_finite(s.rho00)) {
      throw IntegrationError(t, "non-finite state", std::numeric_limits<double>::infinity());
    }
    if (drift >= limit) throw IntegrationError(t, "trace drift", drift);
    if (cross >= limit) throw IntegrationError(t, "cross-block trace", cross);
    if (asym >= limit) throw IntegrationError(t, "cross-block asymmetry", asym);
    if (herm >= limit) throw IntegrationError(t, "hermiticity defect", herm);
    if (eig <= -limit) throw IntegrationError(t, "negative eigenvalue", eig);
  };

  auto f = [&](const GeneralizedState& s, double t) { return master_rhs(s, t, G, p); };
  GeneralizedState state = GeneralizedState::initial(eta);
  record(state, 0);
  for (std::size_t k = 0; k < run.grid.n_steps; ++k) {
    const double t = run.grid.time(k);
    state = rk4(state, t, dt, f);
    state.t = run.grid.time(k + 1);
    record(state, k + 1);
  }
  return run;
}

VacuumRun integrate_vacuum_master(const SLHTriple& G, const Operator& rho0, double dt,
                                  double T, const MasterOptions& opts) {
  require_same_dim(rho0, G.L(), "integrate_vacuum_master");
  VacuumRun run;
  run.grid = TimeGrid::from_horizon(dt, T);
  run.snapshot_stride = std::max<std::size_t>(1, opts.snapshot_stride);
  for (const auto& o : opts.observables) run.observable_names.push_back(o.name);
  run.expectations.resize(opts.observables.size());

  const cplx tr0 = rho0.trace();
  auto record = [&](const Operator& rho, std::size_t k) {
    for (std::size_t i = 0; i < opts.observables.size(); ++i) {
      run.expectations[i].push_back(trace_product(rho, opts.observables[i].op));
    }
    if (k % run.snapshot_stride == 0) run.snapshots.push_back(rho);
    const double drift = std::abs(rho.trace() - tr0);
    run.max_trace_drift = std::max(run.max_trace_drift, drift);
    run.max_hermiticity_defect = std::max(run.max_hermiticity_defect, hermiticity_defect(rho));
    if (!is_finite(rho)) {
      throw IntegrationError(run.grid.time(k), "non-finite state",
                             std::numeric_limits<double>::infinity());
    }
    if (drift >= opts.abort_threshold) {
      throw IntegrationError(run.grid.time(k), "trace drift", drift);
    }
  };

  auto f = [&](const Operator& rho, double) { return Operator(lindblad_schrodinger(G, rho)); };
  Operator rho = rho0;
  record(rho, 0);
  for (std::size_t k = 0; k < run.grid.n_steps; ++k) {
    rho = rk4(rho, run.grid.time(k), dt, f);
    record(rho, k + 1);
  }
  return run;
}

Operator extended_master_step(const ExtendedSystem& ext, const Operator& rho, double t,
                              double dt) {
  auto f = [&](const Operator& r, double s) {
    return Operator(lindblad_schrodinger(ext.triple(s), r));
  };
  return rk4(rho, t, dt, f);
}

EmbeddingRun embedding_oracle(const SLHTriple& G, const Pulse& p, const StateVector& eta,
                              double dt, double T, const MasterOptions& opts,
                              double w_floor) {
  check_eta(eta, G.dim());
  const ExtendedSystem ext(G, p, w_floor);
  EmbeddingRun run;
  run.grid = TimeGrid::from_horizon(dt, T);
  run.snapshot_stride = std::max<std::size_t>(1, opts.snapshot_stride);
  const int d = G.dim();

  // Lifted Q_jk ⊗ X for every observable, computed once.
  std::vector<std::array<Operator, 4>> lifted;
  for (const auto& o : opts.observables) {
    require_same_dim(o.op, G.L(), "embedding_oracle observable");
    run.observable_names.push_back(o.name);
    std::array<Operator, 4> q;
    for (int jk = 0; jk < 4; ++jk) {
      q[jk] = kron(AncillaObservables::Q(static_cast<AncillaObservables::Block>(jk)), o.op);
    }
    lifted.push_back(std::move(q));
  }
  run.mu.resize(opts.observables.size());
  const Operator excited = lift_ancilla(pauli::number(), d);

  auto record = [&](const Operator& rho, std::size_t k) {
    const double t = run.grid.time(k);
    const double w = p.tail_weight(t);
    run.tail_weight.push_back(w);
    run.ancilla_excited.push_back(trace_product(rho, excited).real());
    if (k % run.snapshot_stride == 0) run.snapshots.push_back(rho);
    if (!is_finite(rho)) {
      throw IntegrationError(t, "non-finite extended state",
                             std::numeric_limits<double>::infinity());
    }
    for (std::size_t i = 0; i < lifted.size(); ++i) {
      for (int jk = 0; jk < 4; ++jk) {
        const auto block = static_cast<AncillaObservables::Block>(jk);
        const double wjk = AncillaObservables::weight(block, w);
        // tr[ρ̃ (Q_jk ⊗ X)] / w_jk = ⟨ρjk, X⟩
        const cplx numer = trace_product(rho, lifted[i][jk]);
        if (wjk > w_floor) {
          run.mu[i][jk].push_back(numer / wjk);
        } else {
          if (std::abs(numer) > opts.abort_threshold) {
            throw IntegrationError(t, "embedding breakdown (w_jk below floor)",
                                   std::abs(numer));
          }
          ++run.suppressed;
          run.mu[i][jk].push_back(cplx(std::numeric_limits<double>::quiet_NaN(), 0.0));
        }
      }
    }
  };

  Operator rho = ext.initial_state(eta);
  record(rho, 0);
  for (std::size_t k = 0; k < run.grid.n_steps; ++k) {
    rho = extended_master_step(ext, rho, run.grid.time(k), dt);
    record(rho, k + 1);
  }
  return run;
}

}  // namespace photon
