#include <doctest.h>

#include <cmath>
#include <random>

#include "photon/twolevel.hpp"
#include "test_util.hpp"

using namespace photon;
using namespace photon::twolevel;

namespace {

const cplx I{0.0, 1.0};

FilterState random_filter_state(std::mt19937_64& rng) {
  FilterState s;
  s.sigma11 = testutil::random_density(2, rng);
  s.sigma00 = testutil::random_hermitian(2, rng);
  s.sigma10 = 0.5 * testutil::random_matrix(2, rng);
  s.sigma01 = s.sigma10.adjoint();
  return s;
}

}  // namespace

TEST_CASE("Bloch master oracle agrees with the generic master equation") {
  const double kappa = 1.0, omega = 0.5, dt = 1e-3, T = 10.0;
  for (const Pulse& p : {Pulse::gaussian(3.0, 1.0), Pulse::gaussian(2.0, 0.6, 0.9),
                         Pulse::decaying_exponential(1.5, 0.5)}) {
    StateVector eta(2);
    eta << std::sqrt(0.35), std::sqrt(0.65) * std::exp(I * 1.1);
    MasterOptions opts;
    opts.snapshot_stride = 100;
    const MasterRun generic = integrate_master(two_level_system(kappa, omega), p, eta, dt, T, opts);
    const auto bloch = integrate_bloch_master(kappa, omega, p, eta, dt, T);
    REQUIRE(bloch.size() == generic.grid.n_steps + 1);
    double dev = 0.0, imag = 0.0;
    for (std::size_t i = 0; i < generic.snapshots.size(); ++i) {
      dev = std::max(dev, bloch[i * 100].max_deviation(to_bloch(generic.snapshots[i])));
    }
    for (const auto& c : bloch) imag = std::max(imag, c.max_imag_diagonal());
    CHECK(dev <= 1e-6);
    CHECK(imag <= 1e-12);
  }
}

TEST_CASE("Bloch master right-hand side at t = 0 from the ground state") {
  // ρ̇01(0) = [ρ00, L]ξ* = √κ ξ* [|g><g|, σ−] = −√κ ξ* σ−, whose σx
  // coefficient is −√κ ξ*.
  const double kappa = 1.7;
  const Pulse p = Pulse::gaussian(3.0, 1.0, 0.4);
  const cplx xi = p.eval(0.0);
  const auto d = bloch_master_rhs(BlochMasterCoeffs::initial(StateVector::Unit(2, 0)), 0.0,
                                  kappa, 0.5, p);
  CHECK(std::abs(d.x01 + std::sqrt(kappa) * std::conj(xi)) < 1e-15);
  CHECK(std::abs(d.y01 - I * std::sqrt(kappa) * std::conj(xi)) < 1e-15);
  CHECK(std::abs(d.z01) < 1e-15);
  CHECK(std::abs(d.z00) < 1e-15);
  CHECK(std::abs(d.z11) < 1e-15);

  // Same numbers from the generic right-hand side.
  const GeneralizedState g = master_rhs(GeneralizedState::initial(StateVector::Unit(2, 0)), 0.0,
                                        two_level_system(kappa, 0.5), p);
  CHECK(d.max_deviation(to_bloch(g)) < 1e-15);
}

TEST_CASE("without a pulse the 11 and 00 coefficient equations decouple") {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> n(0.0, 1.0);
  BlochMasterCoeffs c{n(rng), n(rng), n(rng), {n(rng), n(rng)}, {n(rng), n(rng)},
                      {n(rng), n(rng)}, n(rng), n(rng), n(rng)};
  const auto d = bloch_master_rhs(c, cplx{0.0, 0.0}, 0.8, 0.3);
  BlochMasterCoeffs swapped = c;
  std::swap(swapped.x00, swapped.x11);
  std::swap(swapped.y00, swapped.y11);
  std::swap(swapped.z00, swapped.z11);
  swapped.x01 = swapped.y01 = swapped.z01 = 0.0;
  const auto e = bloch_master_rhs(swapped, cplx{0.0, 0.0}, 0.8, 0.3);
  CHECK(std::abs(d.x11 - e.x00) < 1e-15);
  CHECK(std::abs(d.y11 - e.y00) < 1e-15);
  CHECK(std::abs(d.z11 - e.z00) < 1e-15);
  CHECK(std::abs(e.x01) + std::abs(e.y01) + std::abs(e.z01) == 0.0);
  // ż = −κ(1 + z) for both diagonal blocks.
  CHECK(std::abs(d.z00 + 0.8 * (1.0 + c.z00)) < 1e-15);
  CHECK(std::abs(d.z11 + 0.8 * (1.0 + c.z11)) < 1e-15);
}

TEST_CASE("as-printed master equations depart from the generic solution") {
  const double kappa = 1.0, omega = 0.5;
  const Pulse p = Pulse::gaussian(3.0, 1.0);
  const auto corrected = integrate_bloch_master(kappa, omega, p, StateVector::Unit(2, 0), 1e-3,
                                                10.0);
  const auto printed = integrate_bloch_master(kappa, omega, p, StateVector::Unit(2, 0), 1e-3, 10.0,
                                              Transcription::AsPrinted);
  double dev = 0.0;
  for (std::size_t k = 0; k < corrected.size(); ++k) {
    dev = std::max(dev, corrected[k].max_deviation(printed[k]));
  }
  CHECK(dev > 0.5);
}

TEST_CASE("Bloch filter step agrees with the generic filter step") {
  std::mt19937_64 rng(52);
  std::normal_distribution<double> n(0.0, 1.0);
  const double kappa = 1.3, omega = 0.7, dt = 1e-3;
  const SLHTriple G = two_level_system(kappa, omega);
  double worst = 0.0, worst_printed = 0.0;
  for (int i = 0; i < 200; ++i) {
    const FilterState s = random_filter_state(rng);
    const cplx xi{n(rng), n(rng)};
    const double dW = std::sqrt(dt) * n(rng);
    const double K = gain(s, G, xi);
    FilterState next = s;
    filter_step(next, dW + K * dt, dt, G, xi);
    const BlochFilterCoeffs c = to_bloch(s);
    CHECK(std::abs(bloch_innovation(c, dW + K * dt, dt, kappa, xi) - dW) < 1e-14);
    const BlochFilterCoeffs b = bloch_filter_rhs(c, dW, dt, kappa, omega, xi);
    worst = std::max(worst, b.max_deviation(to_bloch(next)));
    const auto bp = bloch_filter_rhs<Transcription::AsPrinted>(c, dW, dt, kappa, omega, xi);
    worst_printed = std::max(worst_printed, bp.max_deviation(to_bloch(next)));
    // ĉ11 stays 1: the generic step keeps tr σ11 = 1.
    CHECK(std::abs(next.sigma11.trace() - 1.0) < 1e-12);
  }
  CHECK(worst <= 1e-10);
  CHECK(worst_printed > 1e-4);
}

TEST_CASE("Bloch filter coefficients round trip") {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 20; ++i) {
    const FilterState s = random_filter_state(rng);
    const FilterState back = from_bloch(to_bloch(s));
    CHECK(testutil::dist(back.sigma11, s.sigma11) < 1e-14);
    CHECK(testutil::dist(back.sigma10, s.sigma10) < 1e-14);
    CHECK(testutil::dist(back.sigma01, s.sigma01) < 1e-14);
    CHECK(testutil::dist(back.sigma00, s.sigma00) < 1e-14);
  }
  CHECK_THROWS_AS(to_bloch(FilterState::initial(StateVector::Unit(3, 0))), DimensionError);
}

TEST_CASE("Bloch filter trajectory tracks the generic filter on one record") {
  const double kappa = 1.0, omega = 0.5, dt = 1e-4, T = 8.0;
  const SLHTriple G = two_level_system(kappa, omega);
  const Pulse p = Pulse::gaussian(3.0, 1.0);
  const StateVector eta = StateVector::Unit(2, 0);
  const GeneratedRecord gen = generate_record(ExtendedSystem(G, p), eta, dt, T, 11);
  FilterState s = FilterState::initial(eta);
  BlochFilterCoeffs c = to_bloch(s);
  double worst = 0.0;
  for (std::size_t k = 0; k < gen.record.dY.size(); ++k) {
    const double t = static_cast<double>(k) * dt;
    const double dY = gen.record.dY[k];
    const double dW = bloch_innovation(c, dY, dt, kappa, p.eval(t));
    c = bloch_filter_rhs(c, dW, dt, t, kappa, omega, p);
    filter_step(s, dY, dt, G, p.eval(t));
    if (k % 1000 == 999) worst = std::max(worst, c.max_deviation(to_bloch(s)));
  }
  CHECK(worst <= 1e-8);
}
