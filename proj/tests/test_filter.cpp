#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "photon/filter.hpp"
#include "test_util.hpp"

using namespace photon;
using testutil::dist;

namespace {

const cplx I{0.0, 1.0};

// A state satisfying the filter invariants: tr σ11 = 1, σ01 = σ10*.
FilterState random_filter_state(int d, std::mt19937_64& rng) {
  FilterState s;
  s.sigma11 = testutil::random_density(d, rng);
  s.sigma00 = testutil::random_hermitian(d, rng);
  s.sigma10 = 0.5 * testutil::random_matrix(d, rng);
  s.sigma01 = s.sigma10.adjoint();
  return s;
}

SLHTriple random_triple(int d, std::mt19937_64& rng) {
  return SLHTriple(testutil::random_unitary(d, rng), 0.8 * testutil::random_matrix(d, rng),
                   testutil::random_hermitian(d, rng));
}

}  // namespace

TEST_CASE("gain examples") {
  std::mt19937_64 rng(41);
  const SLHTriple G = random_triple(3, rng);
  const FilterState s = random_filter_state(3, rng);
  const double expect = (s.sigma11 * (G.L() + G.L().adjoint())).trace().real();
  CHECK(gain(s, G, cplx{0.0, 0.0}) == doctest::Approx(expect).epsilon(1e-13));

  const SLHTriple tl = two_level_system(1.0, 0.5);
  const FilterState g = FilterState::initial(StateVector::Unit(2, 0));
  CHECK(gain(g, tl, Pulse::gaussian(3.0, 1.0, 0.5), 0.0) == 0.0);

  for (int i = 0; i < 100; ++i) {
    const int d = 1 + i % 4;
    const SLHTriple Gi = random_triple(d, rng);
    const FilterState si = random_filter_state(d, rng);
    const cplx xi{std::normal_distribution<double>()(rng), std::normal_distribution<double>()(rng)};
    CHECK_NOTHROW(gain(si, Gi, xi));
  }

  // A state whose cross blocks are not adjoint produces a complex gain.
  FilterState broken = random_filter_state(2, rng);
  broken.sigma01 = 3.0 * I * broken.sigma01;
  CHECK_THROWS_AS(gain(broken, two_level_system(1.0, 0.0), cplx{0.7, 0.2}), FilterError);
}

TEST_CASE("zero innovation without a pulse is an Euler step of the vacuum master equation") {
  std::mt19937_64 rng(42);
  const SLHTriple G = random_triple(3, rng);
  FilterState s = random_filter_state(3, rng);
  const Operator before = s.sigma11;
  const double dt = 1e-3;
  const double K = gain(s, G, cplx{0.0, 0.0});
  const StepResult r = filter_step(s, K * dt, dt, G, cplx{0.0, 0.0});
  CHECK(r.dW == 0.0);
  CHECK(dist(s.sigma11, before + dt * lindblad_schrodinger(G, before)) < 1e-14);
}

TEST_CASE("Schrödinger and Heisenberg forms of a step agree") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + i % 4;
    const SLHTriple G = random_triple(d, rng);
    const FilterState s = random_filter_state(d, rng);
    const Operator X = testutil::random_hermitian(d, rng);
    const cplx xi{n(rng), n(rng)};
    const double dt = 1e-3, dY = 0.03 * n(rng);
    const auto h = filter_step_heisenberg(s, dY, dt, G, xi, X);
    FilterState next = s;
    filter_step(next, dY, dt, G, xi);
    for (int jk = 0; jk < 4; ++jk) worst = std::max(worst, std::abs(next.expectation(jk, X) - h[jk]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("trace of sigma11 is preserved by every step") {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + i % 4;
    const SLHTriple G = random_triple(d, rng);
    FilterState s = random_filter_state(d, rng);
    filter_step(s, 0.05 * n(rng), 1e-3, G, cplx{n(rng), n(rng)});
    worst = std::max(worst, std::abs(s.sigma11.trace() - 1.0));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("the cross-index gain printed with swapped blocks breaks trace preservation") {
  // Diffusion coefficient of tr σ11 is
  //   π11(L + L*) + ξ π10(S) + ξ* π01(S*) − K.
  // It vanishes for the gain in filter.cpp, but not for
  //   K' = π11(L + L*) + π01(S) ξ + π10(S*) ξ*
  // once ξ is complex.
  std::mt19937_64 rng(45);
  const SLHTriple G = two_level_system(1.0, 0.5);
  const FilterState s = random_filter_state(2, rng);
  const cplx xi = Pulse::gaussian(3.0, 1.0, 0.6).eval(2.6);
  REQUIRE(std::abs(xi.imag()) > 0.1);
  const cplx base = s.expectation(0, G.L() + G.L().adjoint());
  const cplx lead = base + xi * s.expectation(1, G.S()) + std::conj(xi) * s.expectation(2, G.S().adjoint());
  const cplx swapped =
      base + xi * s.expectation(2, G.S()) + std::conj(xi) * s.expectation(1, G.S().adjoint());
  CHECK(std::abs(lead - gain(s, G, xi)) < 1e-14);
  CHECK(std::abs(swapped.imag()) < 1e-14);  // real as well, so only the trace exposes it
  CHECK(std::abs(lead - swapped) > 1e-2);
}

TEST_CASE("vacuum filter") {
  std::mt19937_64 rng(46);
  const Operator H = testutil::random_hermitian(3, rng);
  const SLHTriple closed(identity(3), zeros(3), H);
  const Operator rho = testutil::random_density(3, rng);
  const Operator a = vacuum_filter_step(rho, 0.37, 1e-3, closed);
  const Operator b = vacuum_filter_step(rho, -2.0, 1e-3, closed);
  CHECK(dist(a, b) == 0.0);
  CHECK(dist(a, rho + 1e-3 * I * commutator(rho, H)) < 1e-15);
}

TEST_CASE("without a pulse the filter reduces to the vacuum filter") {
  std::mt19937_64 rng(47);
  const SLHTriple G = random_triple(3, rng);
  const StateVector eta = testutil::random_matrix(3, rng).col(0).normalized();
  FilterState s = FilterState::initial(eta);
  Operator rho = projector(eta);
  const NormalStream stream(5, 0);
  double worst = 0.0;
  for (int k = 0; k < 3000; ++k) {
    const double dY = std::sqrt(1e-3) * stream.normal(k);
    filter_step(s, dY, 1e-3, G, cplx{0.0, 0.0});
    vacuum_filter_step(rho, dY, 1e-3, G);
    worst = std::max(worst, dist(s.sigma11, rho));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("record file round trip") {
  MeasurementRecord rec;
  rec.dt = 1e-4;
  rec.seed = 18446744073709551557ull;
  const NormalStream stream(3, 1);
  for (int k = 0; k < 500; ++k) rec.dY.push_back(stream.normal(k) * 1e-2 + 1e-300 * k);
  std::stringstream buf;
  write_record(buf, rec);
  const std::string text = buf.str();
  CHECK(text.rfind("dt=0.0001 n=500 seed=18446744073709551557\n", 0) == 0);
  const MeasurementRecord back = read_record(buf);
  CHECK(back.dt == rec.dt);
  CHECK(back.seed == rec.seed);
  REQUIRE(back.dY.size() == rec.dY.size());
  for (std::size_t k = 0; k < rec.dY.size(); ++k) CHECK(back.dY[k] == rec.dY[k]);

  std::stringstream bad_header("dt=1e-3 n=4\n0.1\n0.2\n0.3\n0.4\n");
  CHECK_THROWS(read_record(bad_header));
  std::stringstream short_body("dt=1e-3 n=4 seed=1\n0.1\n0.2\n");
  CHECK_THROWS(read_record(short_body));
  std::stringstream garbage("dt=1e-3 n=2 seed=1\n0.1\nabc\n");
  CHECK_THROWS(read_record(garbage));
}

TEST_CASE("records are reproducible and filter reruns are exact") {
  const SLHTriple G = two_level_system(1.0, 0.5);
  const Pulse p = Pulse::gaussian(3.0, 1.0);
  const ExtendedSystem ext(G, p);
  const StateVector eta = StateVector::Unit(2, 0);
  TrajectoryOptions opts;
  opts.observables = {{"sz", pauli::sz()}};
  const GeneratedRecord a = generate_record(ext, eta, 1e-3, 6.0, 99, 4, opts);
  const GeneratedRecord b = generate_record(ext, eta, 1e-3, 6.0, 99, 4, opts);
  const GeneratedRecord c = generate_record(ext, eta, 1e-3, 6.0, 99, 5, opts);
  CHECK(a.record.dY == b.record.dY);
  CHECK(a.record.dY != c.record.dY);

  std::stringstream buf;
  write_record(buf, a.record);
  const MeasurementRecord loaded = read_record(buf);
  const TrajectoryRun direct = run_filter(G, p, eta, a.record, opts, &a);
  const TrajectoryRun rerun = run_filter(G, p, eta, loaded, opts);
  CHECK(direct.pi11 == rerun.pi11);
  CHECK(direct.W == rerun.W);

  // dW_k + K_k dt reproduces dY_k.
  double recon = 0.0;
  for (std::size_t k = 0; k < direct.dW.size(); ++k) {
    recon = std::max(recon, std::abs(direct.dW[k] + direct.gain[k] * 1e-3 - direct.dY[k]));
  }
  CHECK(recon <= 1e-16);
  CHECK(direct.max_cross_asymmetry <= 1e-10);
  CHECK(direct.max_cross_check[0] <= 1e-2);
  CHECK_FALSE(direct.cross_check_flagged);
}

TEST_CASE("trace drift bound at dt = 1e-4") {
  const TrajectoryRun run = run_trajectory(two_level_system(1.0, 0.5), Pulse::gaussian(3.0, 1.0),
                                           StateVector::Unit(2, 0), 1e-4, 6.0, 3, 0);
  CHECK(run.max_trace_drift <= 5e-3 * 6.0);
  CHECK(run.max_cross_asymmetry <= 1e-10);
}

TEST_CASE("ensemble results do not depend on the thread count") {
  const SLHTriple G = two_level_system(1.0, 0.5);
  const Pulse p = Pulse::gaussian(1.0, 0.4);
  TrajectoryOptions opts;
  opts.observables = {{"sz", pauli::sz()}, {"sx", pauli::sx()}};
  opts.checkpoints = {0.5, 1.0, 2.0};
  const auto one = run_ensemble(G, p, StateVector::Unit(2, 0), 1e-3, 2.0, 8, 12, opts, 1);
  const auto three = run_ensemble(G, p, StateVector::Unit(2, 0), 1e-3, 2.0, 8, 12, opts, 3);
  CHECK(one.mean == three.mean);
  CHECK(one.stderr_ == three.stderr_);
  CHECK(one.W_final == three.W_final);
  CHECK_THROWS(run_ensemble(G, p, StateVector::Unit(2, 0), 1e-3, 2.0, 8, 12,
                            TrajectoryOptions{{}, false, 0, {0.0005}}, 1));
}

TEST_CASE("vacuum filter ensemble matches the vacuum master equation") {
  const SLHTriple G = two_level_system(1.0, 0.5);
  StateVector eta(2);
  eta << std::sqrt(0.2), std::sqrt(0.8);
  const double dt = 1e-3, T = 4.0;
  const int n_rec = 500, n = static_cast<int>(T / dt);
  std::vector<std::vector<double>> sz(4, std::vector<double>(n_rec));
  for (int j = 0; j < n_rec; ++j) {
    const NormalStream stream(77, j);
    Operator rho = projector(eta);
    for (int k = 0; k < n; ++k) {
      const double K = (trace_product(rho, G.L()) + trace_product(rho, G.L().adjoint())).real();
      vacuum_filter_step(rho, K * dt + std::sqrt(dt) * stream.normal(k), dt, G);
      if ((k + 1) % 1000 == 0) sz[(k + 1) / 1000 - 1][j] = trace_product(rho, pauli::sz()).real();
    }
  }
  MasterOptions mopts;
  mopts.observables = {{"sz", pauli::sz()}};
  const VacuumRun ref = integrate_vacuum_master(G, projector(eta), dt, T, mopts);
  for (int c = 0; c < 4; ++c) {
    double m = 0, ss = 0;
    for (double v : sz[c]) m += v;
    m /= n_rec;
    for (double v : sz[c]) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / (n_rec - 1) / n_rec);
    CHECK(std::abs(m - ref.expectations[0][(c + 1) * 1000].real()) <= 3.0 * se);
  }
}

TEST_CASE("record statistics of a bare ancilla") {
  // G = (I, 0, 0) and a square pulse on [0, 1]: the mean integrated record is
  // the integrated gain of the deterministic extended master run.
  const SLHTriple trivial(identity(1), zeros(1), zeros(1));
  const Pulse p = Pulse::square(0.0, 1.0);
  const ExtendedSystem ext(trivial, p);
  const StateVector eta = StateVector::Ones(1);
  const double dt = 1e-3, T = 1.2;
  const int n_rec = 4000;

  double expected = 0.0;
  Operator rho = ext.initial_state(eta);
  const TimeGrid grid = TimeGrid::from_horizon(dt, T);
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time(k);
    const Operator L = ext.triple(t).L();
    expected += (trace_product(rho, L) + trace_product(rho, L.adjoint())).real() * dt;
    rho = extended_master_step(ext, rho, t, dt);
  }

  double m = 0, ss = 0;
  std::vector<double> totals(n_rec);
  for (int j = 0; j < n_rec; ++j) {
    const GeneratedRecord g = generate_record(ext, eta, dt, T, 2024, j);
    double y = 0.0;
    for (double v : g.record.dY) y += v;
    totals[j] = y;
    m += y;
  }
  m /= n_rec;
  for (double y : totals) ss += (y - m) * (y - m);
  const double se = std::sqrt(ss / (n_rec - 1) / n_rec);
  CHECK(std::abs(m - expected) <= 3.0 * se);
}

TEST_CASE("record paths converge under refinement") {
  // Y on the coarse grid for dt, dt/2, dt/4 driven by one Brownian path.
  const SLHTriple G = two_level_system(1.0, 0.5);
  const Pulse p = Pulse::gaussian(2.0, 0.7);
  const ExtendedSystem ext(G, p);
  const StateVector eta = StateVector::Unit(2, 0);
  const double dt = 4e-3, T = 4.0;
  double e1_total = 0.0, e2_total = 0.0;
  for (int path = 0; path < 4; ++path) {
    const std::size_t n4 = static_cast<std::size_t>(std::llround(4.0 * T / dt));
    const auto fine = wiener_increments(NormalStream(31, path), n4, dt / 4.0);
    const auto mid = coarsen_increments(fine, 2);
    const auto coarse = coarsen_increments(fine, 4);
    auto Y = [&](double h, const std::vector<double>& noise, std::size_t stride) {
      const auto rec = generate_record(ext, eta, h, noise).record;
      std::vector<double> out;
      double y = 0.0;
      for (std::size_t k = 0; k < rec.dY.size(); ++k) {
        y += rec.dY[k];
        if ((k + 1) % stride == 0) out.push_back(y);
      }
      return out;
    };
    const auto y1 = Y(dt, coarse, 1), y2 = Y(dt / 2, mid, 2), y4 = Y(dt / 4, fine, 4);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < y1.size(); ++i) {
      e1 = std::max(e1, std::abs(y1[i] - y2[i]));
      e2 = std::max(e2, std::abs(y2[i] - y4[i]));
    }
    e1_total += e1;
    e2_total += e2;
  }
  CHECK(e2_total < e1_total / 1.3);
}
