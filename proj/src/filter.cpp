#include "photon/filter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace photon {

namespace {

constexpr double kGainImagTol = 1e-10;

std::string at_time(double t, const std::string& what) {
  std::ostringstream msg;
  msg << "filter step at t=" << t << ": " << what;
  return msg.str();
}

void check_eta(const StateVector& eta, int dim) {
  if (eta.size() != dim) throw DimensionError("initial state has wrong dimension");
  if (std::abs(eta.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("initial state must be a unit vector");
  }
}

double real_gain(cplx k, double t) {
  if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) {
    throw FilterError(t, "non-finite gain");
  }
  if (std::abs(k.imag()) > kGainImagTol * std::max(1.0, std::abs(k.real()))) {
    std::ostringstream msg;
    msg << "gain has imaginary part " << k.imag();
    throw FilterError(t, msg.str());
  }
  return k.real();
}

cplx gain_complex(const FilterState& s, const SLHTriple& G, cplx xi) {
  const Operator& L = G.L();
  const Operator& S = G.S();
  cplx k = trace_product(s.sigma11, L) + trace_product(s.sigma11, G.Ld());
  k += trace_product(s.sigma10, S) * xi;
  k += trace_product(s.sigma01, S.adjoint()) * std::conj(xi);
  return k;
}

std::size_t checkpoint_index(double t, const TimeGrid& grid) {
  const double k = std::round(t / grid.dt);
  if (t < 0.0 || k > static_cast<double>(grid.n_steps) ||
      std::abs(k * grid.dt - t) > 1e-9 * std::max(1.0, t)) {
    std::ostringstream msg;
    msg << "checkpoint t=" << t << " is not on the time grid";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<std::size_t>(k);
}

// Step kernels on fixed-size copies for the common dimensions; Eigen::Dynamic
// covers the rest. Every block is read before any is written.
template <int N>
using Mat = Eigen::Matrix<cplx, N, N>;

template <int N>
Mat<N> fixed(const Operator& a) {
  return Eigen::Map<const Mat<N>>(a.data(), a.rows(), a.cols());
}

template <int N>
void add_into(Operator& a, const Mat<N>& d) {
  Eigen::Map<Mat<N>>(a.data(), a.rows(), a.cols()) += d;
}

// 𝒢*(σ)dt + (Lσ + σL* − Kσ)dW
template <int N>
Mat<N> vacuum_increment(const Mat<N>& sigma, const Mat<N>& L, const Mat<N>& Ld,
                        const Mat<N>& A, double K, double dt, double dW) {
  const Mat<N> Ls = L * sigma;
  Mat<N> d = Ls * Ld;
  d.noalias() += A * sigma;
  d.noalias() += sigma * A.adjoint();
  d *= dt;
  d += dW * Ls;
  d.noalias() += dW * (sigma * Ld);
  d -= (K * dW) * sigma;
  return d;
}

template <int N>
void vacuum_kernel(Operator& rho, const SLHTriple& G, double K, double dt, double dW) {
  const Mat<N> r = fixed<N>(rho);
  add_into<N>(rho, vacuum_increment<N>(r, fixed<N>(G.L()), fixed<N>(G.Ld()), fixed<N>(G.A()),
                                       K, dt, dW));
}

void vacuum_advance(Operator& rho, const SLHTriple& G, double K, double dt, double dW) {
  switch (G.dim()) {
    case 2: vacuum_kernel<2>(rho, G, K, dt, dW); break;
    case 4: vacuum_kernel<4>(rho, G, K, dt, dW); break;
    default: vacuum_kernel<Eigen::Dynamic>(rho, G, K, dt, dW);
  }
}

template <int N>
void filter_kernel(FilterState& s, const SLHTriple& G, cplx xi, double K, double dt,
                   double dW) {
  const Mat<N> L = fixed<N>(G.L()), Ld = fixed<N>(G.Ld()), A = fixed<N>(G.A());
  const Mat<N> s11 = fixed<N>(s.sigma11), s10 = fixed<N>(s.sigma10);
  const Mat<N> s01 = fixed<N>(s.sigma01), s00 = fixed<N>(s.sigma00);
  const cplx xic = std::conj(xi);

  // ([L, B]dt + B dW) c
  auto emit = [&](const Mat<N>& B, cplx c) {
    Mat<N> d = (c * dt) * (L * B);
    d.noalias() -= (c * dt) * (B * L);
    d += (c * dW) * B;
    return d;
  };
  // ([B, L*]dt + B dW) c
  auto absorb = [&](const Mat<N>& B, cplx c) {
    Mat<N> d = (c * dt) * (B * Ld);
    d.noalias() -= (c * dt) * (Ld * B);
    d += (c * dW) * B;
    return d;
  };

  Mat<N> d11 = vacuum_increment<N>(s11, L, Ld, A, K, dt, dW);
  Mat<N> d10 = vacuum_increment<N>(s10, L, Ld, A, K, dt, dW);
  Mat<N> d01 = vacuum_increment<N>(s01, L, Ld, A, K, dt, dW);
  const Mat<N> d00 = vacuum_increment<N>(s00, L, Ld, A, K, dt, dW);
  if (xi != 0.0) {
    if (G.S_is_identity()) {
      d11 += emit(s01, xic);
      d11 += absorb(s10, xi);
      d10 += emit(s00, xic);
      d01 += absorb(s00, xi);
    } else {
      const Mat<N> S = fixed<N>(G.S());
      const Mat<N> s00_Sd = s00 * S.adjoint();
      const Mat<N> S_s00 = S * s00;
      d11 += emit(s01 * S.adjoint(), xic);
      d11 += absorb(S * s10, xi);
      d11 += (std::norm(xi) * dt) * (S_s00 * S.adjoint() - s00);
      d10 += emit(s00_Sd, xic);
      d01 += absorb(S_s00, xi);
    }
  }
  add_into<N>(s.sigma11, d11);
  add_into<N>(s.sigma10, d10);
  add_into<N>(s.sigma01, d01);
  add_into<N>(s.sigma00, d00);
}

}  // namespace

FilterError::FilterError(double t, const std::string& what)
    : std::runtime_error(at_time(t, what)), time_(t) {}

FilterState FilterState::initial(const StateVector& eta) {
  const Operator p = projector(eta);
  const Operator z = zeros(static_cast<int>(eta.size()));
  return FilterState{p, z, z, p, 0.0};
}

const Operator& FilterState::block(int jk) const {
  switch (jk) {
    case 0: return sigma11;
    case 1: return sigma10;
    case 2: return sigma01;
    case 3: return sigma00;
  }
  throw std::out_of_range("FilterState::block");
}

void write_record(std::ostream& os, const MeasurementRecord& rec) {
  os << std::setprecision(17) << "dt=" << rec.dt << " n=" << rec.dY.size()
     << " seed=" << rec.seed << '\n';
  for (const double v : rec.dY) os << v << '\n';
}

MeasurementRecord read_record(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("record: missing header line");
  MeasurementRecord rec;
  std::size_t n = 0;
  {
    std::istringstream hs(header);
    std::string field;
    bool have_dt = false, have_n = false, have_seed = false;
    while (hs >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw std::runtime_error("record: malformed header field " + field);
      const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
      try {
        if (key == "dt") {
          rec.dt = std::stod(value);
          have_dt = true;
        } else if (key == "n") {
          n = std::stoull(value);
          have_n = true;
        } else if (key == "seed") {
          rec.seed = std::stoull(value);
          have_seed = true;
        } else {
          throw std::runtime_error("record: unknown header key " + key);
        }
      } catch (const std::logic_error&) {
        throw std::runtime_error("record: bad value for header key " + key);
      }
    }
    if (!have_dt || !have_n || !have_seed) {
      throw std::runtime_error("record: header must contain dt, n and seed");
    }
    if (!(rec.dt > 0.0)) throw std::runtime_error("record: dt must be > 0");
  }
  rec.dY.reserve(n);
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || !std::isfinite(v)) {
      throw std::runtime_error("record: bad increment on line " + std::to_string(lineno));
    }
    rec.dY.push_back(v);
  }
  if (rec.dY.size() != n) {
    throw std::runtime_error("record: header announces " + std::to_string(n) +
                             " increments, found " + std::to_string(rec.dY.size()));
  }
  return rec;
}

void save_record(const std::string& path, const MeasurementRecord& rec) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_record(os, rec);
}

MeasurementRecord load_record(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open record file " + path);
  return read_record(is);
}

double gain(const FilterState& s, const SLHTriple& G, cplx xi) {
  require_same_dim(s.sigma11, G.L(), "gain");
  return real_gain(gain_complex(s, G, xi), s.t);
}

double gain(const FilterState& s, const SLHTriple& G, const Pulse& p, double t) {
  return gain(s, G, p.eval(t));
}

StepResult filter_step(FilterState& s, double dY, double dt, const SLHTriple& G, cplx xi,
                       bool renormalize) {
  if (!(dt > 0.0)) throw std::invalid_argument("filter_step: dt must be > 0");
  require_same_dim(s.sigma11, G.L(), "filter_step");
  StepResult r;
  r.gain = real_gain(gain_complex(s, G, xi), s.t);
  r.dW = dY - r.gain * dt;
  switch (G.dim()) {
    case 2: filter_kernel<2>(s, G, xi, r.gain, dt, r.dW); break;
    case 4: filter_kernel<4>(s, G, xi, r.gain, dt, r.dW); break;
    default: filter_kernel<Eigen::Dynamic>(s, G, xi, r.gain, dt, r.dW);
  }
  s.t += dt;

  if (renormalize) {
    const double tr = s.sigma11.trace().real();
    s.sigma11 /= tr;
    s.sigma10 /= tr;
    s.sigma01 /= tr;
    s.sigma00 /= tr;
  }
  if (!is_finite(s.sigma11) || !is_finite(s.sigma10) || !is_finite(s.sigma01) ||
      !is_finite(s.sigma00)) {
    throw FilterError(s.t, "non-finite conditional state");
  }
  return r;
}

FilterState filter_step(const FilterState& s, double dY, double dt, const SLHTriple& G,
                        const Pulse& p) {
  FilterState out = s;
  filter_step(out, dY, dt, G, p.eval(s.t));
  return out;
}

std::array<cplx, 4> filter_step_heisenberg(const FilterState& s, double dY, double dt,
                                           const SLHTriple& G, cplx xi, const Operator& X) {
  const Operator& L = G.L();
  const Operator& S = G.S();
  const Operator Ld = L.adjoint();
  const Operator Sd = S.adjoint();
  const cplx xic = std::conj(xi);
  const double K = real_gain(gain_complex(s, G, xi), s.t);
  const double dW = dY - K * dt;

  auto pi = [&](int jk, const Operator& Y) { return s.expectation(jk, Y); };
  const Operator gen = lindblad_heisenberg(G, X);
  const Operator emit = Sd * commutator(X, L);        // S*[X, L]
  const Operator absorb = commutator(Ld, X) * S;      // [L*, X] S
  const Operator scatter = Sd * X * S - X;
  const Operator meas = X * L + Ld * X;               // XL + L*X

  const cplx p11 = pi(0, X), p10 = pi(1, X), p01 = pi(2, X), p00 = pi(3, X);
  const cplx n11 = p11 + (pi(0, gen) + pi(2, emit) * xic + pi(1, absorb) * xi +
                          pi(3, scatter) * std::norm(xi)) * dt +
                   (pi(0, meas) + pi(2, Sd * X) * xic + pi(1, X * S) * xi - p11 * K) * dW;
  const cplx n10 = p10 + (pi(1, gen) + pi(3, emit) * xic) * dt +
                   (pi(1, meas) + pi(3, Sd * X) * xic - p10 * K) * dW;
  const cplx n01 = p01 + (pi(2, gen) + pi(3, absorb) * xi) * dt +
                   (pi(2, meas) + pi(3, X * S) * xi - p01 * K) * dW;
  const cplx n00 = p00 + pi(3, gen) * dt + (pi(3, meas) - p00 * K) * dW;
  return {n11, n10, n01, n00};
}

StepResult vacuum_filter_step(Operator& rho, double dY, double dt, const SLHTriple& G) {
  if (!(dt > 0.0)) throw std::invalid_argument("vacuum_filter_step: dt must be > 0");
  require_same_dim(rho, G.L(), "vacuum_filter_step");
  StepResult r;
  r.gain = real_gain(trace_product(rho, G.L()) + trace_product(rho, G.Ld()), 0.0);
  r.dW = dY - r.gain * dt;
  vacuum_advance(rho, G, r.gain, dt, r.dW);
  if (!is_finite(rho)) throw FilterError(0.0, "non-finite vacuum filter state");
  return r;
}

Operator vacuum_filter_step(const Operator& rho, double dY, double dt, const SLHTriple& G) {
  Operator out = rho;
  vacuum_filter_step(out, dY, dt, G);
  return out;
}

GeneratedRecord generate_record(const ExtendedSystem& ext, const StateVector& eta, double dt,
                                const std::vector<double>& noise,
                                const TrajectoryOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("generate_record: dt must be > 0");
  check_eta(eta, ext.system_dim());
  GeneratedRecord out;
  out.record.dt = dt;
  out.record.dY.resize(noise.size());

  std::vector<Operator> lifted;
  for (const auto& o : opts.observables) lifted.push_back(lift_system(o.op));
  out.extended.resize(lifted.size());
  if (opts.record_series) {
    for (auto& e : out.extended) e.reserve(noise.size() + 1);
  }
  auto observe = [&](const Operator& rho) {
    if (!opts.record_series) return;
    for (std::size_t i = 0; i < lifted.size(); ++i) {
      out.extended[i].push_back(trace_product(rho, lifted[i]).real());
    }
  };

  Operator rho = ext.initial_state(eta);
  observe(rho);
  for (std::size_t k = 0; k < noise.size(); ++k) {
    const double t = static_cast<double>(k) * dt;
    if (opts.snapshot_stride && k % opts.snapshot_stride == 0) out.snapshots.push_back(rho);
    const SLHTriple g = ext.triple(t);
    const double predicted =
        (trace_product(rho, g.L()) + trace_product(rho, g.Ld())).real();
    out.record.dY[k] = predicted * dt + noise[k];
    vacuum_advance(rho, g, predicted, dt, noise[k]);
    if (!std::isfinite(predicted) || !is_finite(rho)) {
      throw FilterError(t, "extended system: non-finite conditional state");
    }
    observe(rho);
  }
  return out;
}

GeneratedRecord generate_record(const ExtendedSystem& ext, const StateVector& eta, double dt,
                                double T, std::uint64_t seed, std::uint64_t trajectory,
                                const TrajectoryOptions& opts) {
  const TimeGrid grid = TimeGrid::from_horizon(dt, T);
  const NormalStream stream(seed, trajectory);
  GeneratedRecord out =
      generate_record(ext, eta, dt, wiener_increments(stream, grid.n_steps, dt), opts);
  out.record.seed = seed;
  std::ostringstream gen;
  gen << "extended system; system dim " << ext.system_dim() << "; pulse "
      << ext.pulse().describe() << "; trajectory " << trajectory;
  out.record.generator = gen.str();
  return out;
}

TrajectoryRun run_filter(const SLHTriple& G, const Pulse& p, const StateVector& eta,
                         const MeasurementRecord& rec, const TrajectoryOptions& opts,
                         const GeneratedRecord* generated) {
  check_eta(eta, G.dim());
  if (!(rec.dt > 0.0)) throw std::invalid_argument("run_filter: record dt must be > 0");
  TrajectoryRun run;
  run.grid = TimeGrid{rec.dt, rec.dY.size()};
  const std::size_t n = rec.dY.size();
  const std::size_t n_obs = opts.observables.size();
  for (const auto& o : opts.observables) {
    require_same_dim(o.op, G.L(), "run_filter observable");
    run.observable_names.push_back(o.name);
  }
  const bool cross = generated != nullptr && opts.record_series;
  if (generated && generated->record.dY.size() != n) {
    throw std::invalid_argument("run_filter: generated record does not match record length");
  }

  std::vector<std::size_t> cp_index;
  for (const double c : opts.checkpoints) cp_index.push_back(checkpoint_index(c, run.grid));
  run.checkpoint_times = opts.checkpoints;
  run.checkpoint_values.assign(n_obs, std::vector<double>(cp_index.size(), 0.0));

  if (opts.record_series) {
    run.pi11.assign(n_obs, {});
    for (auto& v : run.pi11) v.reserve(n + 1);
    run.Y.reserve(n + 1);
    run.W.reserve(n + 1);
    run.dY = rec.dY;
    run.dW.reserve(n);
    run.gain.reserve(n);
    if (cross) run.extended = generated->extended;
  }
  run.max_cross_check.assign(n_obs, 0.0);

  FilterState s = FilterState::initial(eta);
  double Y = 0.0, W = 0.0;
  auto observe = [&](std::size_t k) {
    run.max_cross_asymmetry =
        std::max(run.max_cross_asymmetry, max_abs(s.sigma01 - s.sigma10.adjoint()));
    run.max_trace_drift = std::max(run.max_trace_drift, std::abs(s.sigma11.trace() - 1.0));
    for (std::size_t c = 0; c < cp_index.size(); ++c) {
      if (cp_index[c] == k) {
        for (std::size_t i = 0; i < n_obs; ++i) {
          run.checkpoint_values[i][c] = s.expectation(0, opts.observables[i].op).real();
        }
      }
    }
    if (opts.snapshot_stride && k % opts.snapshot_stride == 0) run.snapshots.push_back(s);
    if (!opts.record_series) return;
    for (std::size_t i = 0; i < n_obs; ++i) {
      const double v = s.expectation(0, opts.observables[i].op).real();
      run.pi11[i].push_back(v);
      if (cross) {
        run.max_cross_check[i] =
            std::max(run.max_cross_check[i], std::abs(v - generated->extended[i][k]));
      }
    }
    run.Y.push_back(Y);
    run.W.push_back(W);
  };

  observe(0);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = run.grid.time(k);
    s.t = t;
    const StepResult r = filter_step(s, rec.dY[k], rec.dt, G, p.eval(t), opts.renormalize);
    s.t = run.grid.time(k + 1);
    Y += rec.dY[k];
    W += r.dW;
    if (opts.record_series) {
      run.dW.push_back(r.dW);
      run.gain.push_back(r.gain);
    }
    observe(k + 1);
  }
  run.W_final = W;
  for (std::size_t i = 0; i < n_obs; ++i) {
    if (run.max_cross_check[i] > opts.cross_check_tolerance) run.cross_check_flagged = true;
  }
  return run;
}

TrajectoryRun run_trajectory(const SLHTriple& G, const Pulse& p, const StateVector& eta,
                             double dt, double T, std::uint64_t seed, std::uint64_t trajectory,
                             const TrajectoryOptions& opts) {
  const ExtendedSystem ext(G, p, opts.w_floor);
  const GeneratedRecord gen = generate_record(ext, eta, dt, T, seed, trajectory, opts);
  return run_filter(G, p, eta, gen.record, opts, &gen);
}

unsigned resolve_threads(unsigned requested) {
  if (const char* env = std::getenv("PHOTON_FILTER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

EnsembleResult run_ensemble(const SLHTriple& G, const Pulse& p, const StateVector& eta,
                            double dt, double T, std::uint64_t seed, std::size_t n_traj,
                            const TrajectoryOptions& opts, unsigned threads) {
  if (n_traj < 2) throw std::invalid_argument("run_ensemble: need at least 2 trajectories");
  TrajectoryOptions per = opts;
  per.record_series = false;
  per.snapshot_stride = 0;
  const ExtendedSystem ext(G, p, opts.w_floor);
  const TimeGrid grid = TimeGrid::from_horizon(dt, T);

  struct Slot {
    std::vector<std::vector<double>> values;
    double W = 0.0, drift = 0.0, asym = 0.0;
  };
  std::vector<Slot> slots(n_traj);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= n_traj) return;
      try {
        const NormalStream stream(seed, j);
        const GeneratedRecord gen = generate_record(
            ext, eta, dt, wiener_increments(stream, grid.n_steps, dt), per);
        const TrajectoryRun run = run_filter(G, p, eta, gen.record, per);
        slots[j] = Slot{run.checkpoint_values, run.W_final, run.max_trace_drift,
                        run.max_cross_asymmetry};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_traj);
        return;
      }
    }
  };
  const unsigned n_threads =
      std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(n_traj));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  EnsembleResult res;
  res.n_traj = n_traj;
  res.checkpoint_times = opts.checkpoints;
  for (const auto& o : opts.observables) res.observable_names.push_back(o.name);
  const std::size_t n_obs = opts.observables.size(), n_cp = opts.checkpoints.size();
  res.mean.assign(n_obs, std::vector<double>(n_cp, 0.0));
  res.stderr_.assign(n_obs, std::vector<double>(n_cp, 0.0));
  const double N = static_cast<double>(n_traj);
  for (std::size_t i = 0; i < n_obs; ++i) {
    for (std::size_t c = 0; c < n_cp; ++c) {
      double sum = 0.0;
      for (const auto& s : slots) sum += s.values[i][c];
      const double mean = sum / N;
      double ss = 0.0;
      for (const auto& s : slots) ss += (s.values[i][c] - mean) * (s.values[i][c] - mean);
      res.mean[i][c] = mean;
      res.stderr_[i][c] = std::sqrt(ss / (N - 1.0) / N);
    }
  }
  double wsum = 0.0;
  for (const auto& s : slots) {
    res.W_final.push_back(s.W);
    wsum += s.W;
    res.max_trace_drift = std::max(res.max_trace_drift, s.drift);
    res.max_cross_asymmetry = std::max(res.max_cross_asymmetry, s.asym);
  }
  res.W_mean = wsum / N;
  double wss = 0.0;
  for (const double w : res.W_final) wss += (w - res.W_mean) * (w - res.W_mean);
  res.W_var = wss / (N - 1.0);
  return res;
}

}  // namespace photon
