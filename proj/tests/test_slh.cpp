#include <doctest.h>

#include <cmath>
#include <random>

#include "photon/master.hpp"
#include "photon/slh.hpp"
#include "test_util.hpp"

using namespace photon;
using testutil::dist;

namespace {

const cplx I{0.0, 1.0};

// Im[A] = (A − A*)/2i
Operator im_part(const Operator& a) { return (a - a.adjoint()) / (2.0 * I); }

}  // namespace

TEST_CASE("series product identities") {
  std::mt19937_64 rng(21);
  const SLHTriple G(testutil::random_unitary(3, rng), testutil::random_matrix(3, rng),
                    testutil::random_hermitian(3, rng));
  const SLHTriple trivial(identity(3), zeros(3), zeros(3));
  const SLHTriple a = series_product(G, trivial);
  CHECK(dist(a.S(), G.S()) == 0.0);
  CHECK(dist(a.L(), G.L()) == 0.0);
  CHECK(dist(a.H(), G.H()) < 1e-15);

  const SLHTriple M(identity(3), testutil::random_matrix(3, rng),
                    testutil::random_hermitian(3, rng));
  const SLHTriple b = series_product(trivial, M);
  CHECK(dist(b.L(), M.L()) < 1e-15);
  CHECK(dist(b.H(), M.H()) < 1e-15);

  CHECK_THROWS_AS(series_product(G, SLHTriple(identity(2), zeros(2), zeros(2))), DimensionError);
  const SLHTriple scattering(pauli::sx(), zeros(2), zeros(2));
  CHECK_THROWS(series_product(two_level_system(1.0, 0.0), scattering));
}

TEST_CASE("signal model") {
  const Pulse sq = Pulse::square(0.0, 1.0);
  CHECK(dist(signal_model(sq, 0.0).L(), pauli::lower()) < 1e-15);
  CHECK(max_abs(signal_model(sq, 2.0).L()) == 0.0);
  CHECK(dist(signal_model(sq, 0.3).S(), identity(2)) == 0.0);
  CHECK(max_abs(signal_model(sq, 0.3).H()) == 0.0);

  const double gamma = 1.7;
  const Pulse ex = Pulse::decaying_exponential(gamma, 0.0);
  for (double t : {0.0, 0.4, 2.0, 7.5}) {
    CHECK(dist(signal_model(ex, t).L(), std::sqrt(gamma) * pauli::lower()) < 1e-12);
  }
}

TEST_CASE("extended triple matches the cascade written out by hand") {
  const double kappa = 1.0, omega = 0.5;
  const SLHTriple G = two_level_system(kappa, omega);
  const Pulse p = Pulse::gaussian(3.0, 1.0, 0.4);
  const ExtendedSystem ext(G, p);
  for (double t : {0.0, 1.1, 3.0, 5.5}) {
    const cplx a = p.eval(t) / std::sqrt(p.tail_weight(t));
    const Operator L0 = a * kron(pauli::lower(), identity(2));
    const Operator Ls = kron(identity(2), G.L());
    const Operator Hs = kron(identity(2), G.H());
    const Operator L_expect = Ls + L0;
    const Operator H_expect = Hs + im_part(Ls.adjoint() * L0);
    const SLHTriple tr = ext.triple(t);
    CHECK(dist(tr.L(), L_expect) < 1e-12);
    CHECK(dist(tr.H(), H_expect) < 1e-12);
    CHECK(dist(tr.S(), identity(4)) == 0.0);

    // Same thing through series_product on lifted triples.
    const SLHTriple M = signal_model(p, t);
    const SLHTriple lifted_G(kron(identity(2), G.S()), Ls, Hs);
    const SLHTriple lifted_M(identity(4), kron(M.L(), identity(2)), zeros(4));
    const SLHTriple cascade = series_product(lifted_G, lifted_M);
    CHECK(dist(cascade.L(), tr.L()) < 1e-12);
    CHECK(dist(cascade.H(), tr.H()) < 1e-12);
  }
}

TEST_CASE("extended generator agrees with the cascade generator") {
  std::mt19937_64 rng(22);
  const Pulse p = Pulse::gaussian(2.0, 0.8, 0.9);
  for (int sample = 0; sample < 20; ++sample) {
    const int d = 1 + sample % 3;
    const SLHTriple G(testutil::random_unitary(d, rng), testutil::random_matrix(d, rng),
                      testutil::random_hermitian(d, rng));
    const ExtendedSystem ext(G, p);
    const double t = 0.25 * sample;
    const Operator A = testutil::random_matrix(2, rng);
    const Operator X = testutil::random_matrix(d, rng);
    const Operator direct = lindblad_heisenberg(ext.triple(t), kron(A, X));
    const Operator assembled = ext.generator(t, A, X);
    CHECK(dist(direct, assembled) <= 1e-10);
    CHECK(max_abs(extended_generator(ext, t, identity(2), identity(d))) <= 1e-12);
  }
}

TEST_CASE("extended generator on n ⊗ I") {
  const SLHTriple G = two_level_system(1.0, 0.5);
  const Pulse p = Pulse::gaussian(3.0, 1.0);
  const ExtendedSystem ext(G, p);
  const double t = 2.2;
  const cplx a = signal_coupling(p, t);
  const Operator expect = kron(-std::norm(a) * pauli::number(), identity(2));
  CHECK(dist(ext.generator(t, pauli::number(), identity(2)), expect) < 1e-12);
}

TEST_CASE("ancilla observables and weights") {
  using B = AncillaObservables;
  CHECK(dist(B::Q(B::k01), B::Q(B::k10).adjoint()) == 0.0);
  CHECK(dist(B::Q(B::k00), B::Q(B::k10).adjoint() * B::Q(B::k10)) == 0.0);
  CHECK(dist(B::Q(B::k11), identity(2)) == 0.0);
  CHECK(B::weight(B::k11, 0.3) == 1.0);
  CHECK(B::weight(B::k10, 0.25) == doctest::Approx(0.5));
  CHECK(B::weight(B::k00, 0.25) == 0.25);
}

TEST_CASE("generating filter weights") {
  const Pulse sq = Pulse::square(0.0, 1.0);
  auto w0 = generating_filter_weights(sq, 0.0);
  CHECK(w0.vacuum_amp == doctest::Approx(1.0));
  CHECK(w0.one_photon_amp == doctest::Approx(0.0));
  auto wh = generating_filter_weights(sq, 0.5);
  CHECK(wh.vacuum_amp == doctest::Approx(std::sqrt(0.5)));
  CHECK(wh.one_photon_amp == doctest::Approx(std::sqrt(0.5)));
  auto wl = generating_filter_weights(sq, 50.0);
  CHECK(wl.vacuum_amp == doctest::Approx(0.0));
  CHECK(wl.one_photon_amp == doctest::Approx(1.0));
}

TEST_CASE("ancilla population tracks the tail weight") {
  // G = (I, 0, 0): the ancilla decays exactly as the pulse empties.
  const SLHTriple trivial(identity(2), zeros(2), zeros(2));
  for (const Pulse& p : {Pulse::decaying_exponential(3.0, 0.0), Pulse::gaussian(2.0, 0.5, 0.7)}) {
    const EmbeddingRun run = embedding_oracle(trivial, p, StateVector::Unit(2, 0), 1e-3, 8.0);
    double dev = 0.0;
    for (std::size_t k = 0; k < run.tail_weight.size(); ++k) {
      dev = std::max(dev, std::abs(run.ancilla_excited[k] - run.tail_weight[k]));
    }
    INFO(p.describe());
    CHECK(dev <= 1e-6);
    CHECK(std::abs(run.ancilla_excited.back()) <= 1e-9);
  }
}
