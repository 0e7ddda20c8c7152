#include <doctest.h>

#include <cmath>
#include <random>

#include "photon/pulse.hpp"

using namespace photon;

namespace {

// Composite Simpson on a uniform grid; deliberately unrelated to the
// adaptive rule inside the library.
double simpson_uniform(const Pulse& p, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = std::norm(p.eval(a)) + std::norm(p.eval(b));
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * std::norm(p.eval(a + i * h));
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("square pulse values and tail weight") {
  const Pulse p = Pulse::square(0.0, 1.0);
  CHECK(std::abs(p.eval(0.5) - 1.0) < 1e-15);
  CHECK(p.tail_weight(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.tail_weight(1.0) == doctest::Approx(0.0));
  CHECK(p.tail_weight(0.25) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(std::abs(p.eval(2.0)) == 0.0);
  CHECK_THROWS_AS(p.eval(-0.1), std::domain_error);
  CHECK_THROWS_AS(p.tail_weight(-1e-9), std::domain_error);
}

TEST_CASE("gaussian pulse") {
  const Pulse p = Pulse::gaussian(3.0, 1.0);
  const double peak = std::abs(p.eval(3.0));
  for (double t = 0.0; t <= 10.0; t += 0.01) CHECK(std::abs(p.eval(t)) <= peak);
  CHECK(std::abs(p.eval(2.5)) == doctest::Approx(std::abs(p.eval(3.5))).epsilon(1e-14));
  CHECK(p.tail_weight(0.0) == doctest::Approx(1.0).epsilon(1e-14));

  // Quadrature oracle for w(t).
  double worst = 0.0;
  for (double t : {0.0, 0.5, 1.7, 3.0, 4.2, 6.0, 8.0}) {
    const double oracle = simpson_uniform(p, t, 14.0, 40000);
    worst = std::max(worst, std::abs(p.tail_weight(t) - oracle));
  }
  CHECK(worst <= 1e-10);
  // Frozen: w(10) = erfc(7/√2) / erfc(−3/√2).
  CHECK(p.tail_weight(10.0) == doctest::Approx(1.2815424955780662e-12).epsilon(1e-6));
}

TEST_CASE("decaying exponential closed form") {
  const double gamma = 2.0, t0 = 0.5;
  const Pulse p = Pulse::decaying_exponential(gamma, t0);
  CHECK(std::abs(p.eval(0.3)) == 0.0);
  for (double t : {0.5, 0.9, 2.0, 5.0}) {
    CHECK(p.eval(t).real() ==
          doctest::Approx(std::sqrt(gamma) * std::exp(-gamma * (t - t0) / 2.0)).epsilon(1e-14));
    CHECK(p.tail_weight(t) == doctest::Approx(std::exp(-gamma * (t - t0))).epsilon(1e-12));
  }
  CHECK(simpson_uniform(p, t0, 40.0, 200000) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("detuning multiplies by a phase only") {
  const Pulse a = Pulse::gaussian(2.0, 0.7);
  const Pulse b = Pulse::gaussian(2.0, 0.7, 1.5);
  for (double t : {0.1, 1.0, 2.0, 3.3}) {
    CHECK(std::abs(b.eval(t)) == doctest::Approx(std::abs(a.eval(t))).epsilon(1e-14));
    const cplx ratio = b.eval(t) / a.eval(t);
    CHECK(std::arg(ratio) == doctest::Approx(std::remainder(-1.5 * t, 2 * M_PI)).epsilon(1e-12));
    CHECK(b.tail_weight(t) == doctest::Approx(a.tail_weight(t)));
  }
}

TEST_CASE("tabulated pulse is renormalised") {
  std::vector<double> grid;
  std::vector<cplx> values;
  for (int i = 0; i <= 40; ++i) {
    const double t = 0.1 * i;
    grid.push_back(t);
    values.push_back({3.0 * std::sin(M_PI * t / 4.0), 0.5 * t});
  }
  const Pulse p = Pulse::tabulated(grid, values);
  CHECK(p.tail_weight(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(simpson_uniform(p, 0.0, 4.0, 4000) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(p.eval(5.0)) == 0.0);
  CHECK(p.tail_weight(4.0) == doctest::Approx(0.0));
  CHECK(p.tail_weight(1.23) == doctest::Approx(simpson_uniform(p, 1.23, 4.0, 20000)).epsilon(1e-8));
  CHECK_THROWS(Pulse::tabulated({0.0, 1.0}, {0.0, 0.0}));
  CHECK_THROWS(Pulse::tabulated({1.0, 0.5}, {1.0, 1.0}));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS(Pulse::gaussian(1.0, 0.0));
  CHECK_THROWS(Pulse::decaying_exponential(-1.0, 0.0));
  CHECK_THROWS(Pulse::square(1.0, 1.0));
}

TEST_CASE("tail weight properties on random shapes") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Each shape with the start of its support, where square and exponential
  // pulses jump.
  std::vector<std::pair<Pulse, double>> pulses;
  for (int i = 0; i < 6; ++i) {
    pulses.push_back({Pulse::gaussian(0.5 + 4.0 * u(rng), 0.3 + u(rng), 2.0 * u(rng)), 0.0});
    const double te = 2.0 * u(rng);
    pulses.push_back({Pulse::decaying_exponential(0.3 + 3.0 * u(rng), te), te});
    const double t0 = 2.0 * u(rng);
    pulses.push_back({Pulse::square(t0, t0 + 0.2 + 2.0 * u(rng)), t0});
  }
  for (const auto& [p, start] : pulses) {
    // Normalisation by an independent rule.
    const double end = p.support_end();
    CHECK(simpson_uniform(p, start, end, 200000) == doctest::Approx(1.0).epsilon(1e-6));
    // Monotone.
    double prev = p.tail_weight(0.0);
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-12));
    for (double t = 0.01; t < end; t += 0.01) {
      const double w = p.tail_weight(t);
      CHECK(w <= prev + 1e-10);
      prev = w;
    }
    // dw/dt = −|ξ|² at interior points with appreciable intensity.
    int checked = 0;
    for (int k = 0; checked < 50 && k < 5000; ++k) {
      const double t = 1e-3 + end * u(rng);
      const double h = 1e-6;
      const double inten = std::norm(p.eval(t));
      if (inten < 1e-3) continue;
      if (std::abs(std::norm(p.eval(t - h)) - std::norm(p.eval(t + h))) > 0.1 * inten) continue;
      const double fd = (p.tail_weight(t + h) - p.tail_weight(t - h)) / (2.0 * h);
      CHECK(std::abs(fd + inten) / inten <= 1e-5);
      ++checked;
    }
    CHECK(checked == 50);
  }
}
