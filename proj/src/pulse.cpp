#include "photon/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace photon {

namespace {

constexpr double kNormTol = 1e-8;

void require_nonnegative_time(double t, const char* what) {
  if (!(t >= 0.0)) {
    std::ostringstream msg;
    msg << what << ": time must be >= 0, got " << t;
    throw std::domain_error(msg.str());
  }
}

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

Pulse::Pulse(Shape shape, double detuning) : shape_(std::move(shape)), detuning_(detuning) {
  if (!std::isfinite(detuning_)) throw std::invalid_argument("Pulse: detuning must be finite");
}

Pulse Pulse::gaussian(double t0, double sigma, double detuning) {
  if (!(sigma > 0.0) || !std::isfinite(t0)) {
    throw std::invalid_argument("Pulse::gaussian: need finite t0 and sigma > 0");
  }
  Pulse p(Gaussian{t0, sigma}, detuning);
  // ∫₀^∞ exp(−(t−t0)²/2σ²) dt = σ √(π/2) erfc(−t0 / (√2 σ))
  const double z = sigma * std::sqrt(std::numbers::pi / 2.0) *
                   std::erfc(-t0 / (std::numbers::sqrt2 * sigma));
  p.gauss_norm2_ = 1.0 / z;
  p.verify_normalisation();
  return p;
}

Pulse Pulse::decaying_exponential(double gamma, double t0, double detuning) {
  if (!(gamma > 0.0) || !(t0 >= 0.0)) {
    throw std::invalid_argument("Pulse::decaying_exponential: need gamma > 0 and t0 >= 0");
  }
  Pulse p(DecayingExponential{gamma, t0}, detuning);
  p.verify_normalisation();
  return p;
}

Pulse Pulse::square(double t0, double t1, double detuning) {
  if (!(t0 >= 0.0) || !(t1 > t0)) {
    throw std::invalid_argument("Pulse::square: need 0 <= t0 < t1");
  }
  Pulse p(Square{t0, t1}, detuning);
  p.verify_normalisation();
  return p;
}

Pulse Pulse::tabulated(std::vector<double> grid, std::vector<cplx> values, double detuning) {
  if (grid.size() < 2 || grid.size() != values.size()) {
    throw std::invalid_argument("Pulse::tabulated: need >= 2 samples and matching sizes");
  }
  if (!(grid.front() >= 0.0)) throw std::invalid_argument("Pulse::tabulated: grid must start >= 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("Pulse::tabulated: grid must be strictly increasing");
    }
  }
  Pulse p(Tabulated{std::move(grid), std::move(values)}, detuning);
  p.build_tail_table();
  const double total = p.tail_nodes_.front();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("Pulse::tabulated: samples have zero norm");
  }
  auto& tab = std::get<Tabulated>(p.shape_);
  const double scale = 1.0 / std::sqrt(total);
  for (auto& v : tab.values) v *= scale;
  for (auto& w : p.tail_nodes_) w /= total;
  p.verify_normalisation();
  return p;
}

void Pulse::build_tail_table() {
  const auto& tab = std::get<Tabulated>(shape_);
  const std::size_t n = tab.grid.size();
  tail_nodes_.assign(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double a = tab.grid[i], b = tab.grid[i + 1];
    const cplx va = tab.values[i], vb = tab.values[i + 1];
    auto intensity = [&](double t) {
      const double s = (t - a) / (b - a);
      return std::norm(va + s * (vb - va));
    };
    tail_nodes_[i] = tail_nodes_[i + 1] + adaptive_simpson(intensity, a, b, 1e-15);
  }
}

void Pulse::verify_normalisation() const {
  const double end = support_end();
  auto intensity = [this](double t) { return std::norm(envelope(t)); };
  // Split at interior kinks so the adaptive rule never straddles one.
  std::vector<double> breaks{0.0, end};
  if (const auto* sq = std::get_if<Square>(&shape_)) {
    breaks = {sq->t0, sq->t1};
  } else if (const auto* ex = std::get_if<DecayingExponential>(&shape_)) {
    breaks = {ex->t0, end};
  } else if (const auto* tab = std::get_if<Tabulated>(&shape_)) {
    breaks = tab->grid;
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total += adaptive_simpson(intensity, breaks[i], breaks[i + 1], 1e-13);
  }
  total += tail_weight(end);
  if (std::abs(total - 1.0) > kNormTol) {
    std::ostringstream msg;
    msg << "Pulse: integral of |xi|^2 is " << total << ", expected 1";
    throw InvariantError(msg.str());
  }
}

cplx Pulse::envelope(double t) const {
  struct Visitor {
    const Pulse& p;
    double t;
    cplx operator()(const Gaussian& g) const {
      const double u = (t - g.t0) / g.sigma;
      return std::sqrt(p.gauss_norm2_) * std::exp(-0.25 * u * u);
    }
    cplx operator()(const DecayingExponential& e) const {
      if (t < e.t0) return 0.0;
      return std::sqrt(e.gamma) * std::exp(-0.5 * e.gamma * (t - e.t0));
    }
    cplx operator()(const Square& s) const {
      if (t < s.t0 || t > s.t1) return 0.0;
      return 1.0 / std::sqrt(s.t1 - s.t0);
    }
    cplx operator()(const Tabulated& tab) const {
      const auto& g = tab.grid;
      if (t < g.front() || t > g.back()) return 0.0;
      const auto it = std::upper_bound(g.begin(), g.end(), t);
      const std::size_t i = std::min<std::size_t>(
          static_cast<std::size_t>(std::distance(g.begin(), it)) - 1, g.size() - 2);
      const double s = (t - g[i]) / (g[i + 1] - g[i]);
      return tab.values[i] + s * (tab.values[i + 1] - tab.values[i]);
    }
  };
  return std::visit(Visitor{*this, t}, shape_);
}

cplx Pulse::eval(double t) const {
  require_nonnegative_time(t, "Pulse::eval");
  const cplx env = envelope(t);
  if (detuning_ == 0.0) return env;
  return env * std::polar(1.0, -detuning_ * t);
}

double Pulse::tail_weight(double t) const {
  require_nonnegative_time(t, "Pulse::tail_weight");
  struct Visitor {
    const Pulse& p;
    double t;
    double operator()(const Gaussian& g) const {
      const double scale = std::numbers::sqrt2 * g.sigma;
      return std::erfc((t - g.t0) / scale) / std::erfc(-g.t0 / scale);
    }
    double operator()(const DecayingExponential& e) const {
      if (t <= e.t0) return 1.0;
      return std::exp(-e.gamma * (t - e.t0));
    }
    double operator()(const Square& s) const {
      if (t <= s.t0) return 1.0;
      if (t >= s.t1) return 0.0;
      return (s.t1 - t) / (s.t1 - s.t0);
    }
    double operator()(const Tabulated& tab) const {
      const auto& g = tab.grid;
      if (t <= g.front()) return 1.0;
      if (t >= g.back()) return 0.0;
      const auto it = std::upper_bound(g.begin(), g.end(), t);
      const std::size_t i = static_cast<std::size_t>(std::distance(g.begin(), it)) - 1;
      const double a = g[i], b = g[i + 1];
      const cplx va = tab.values[i], vb = tab.values[i + 1];
      auto intensity = [&](double s) {
        const double u = (s - a) / (b - a);
        return std::norm(va + u * (vb - va));
      };
      return p.tail_nodes_[i + 1] + adaptive_simpson(intensity, t, b, 1e-15);
    }
  };
  const double w = std::visit(Visitor{*this, t}, shape_);
  return std::clamp(w, 0.0, 1.0);
}

double Pulse::support_end() const {
  struct Visitor {
    double operator()(const Gaussian& g) const { return std::max(0.0, g.t0 + 40.0 * g.sigma); }
    double operator()(const DecayingExponential& e) const { return e.t0 + 80.0 / e.gamma; }
    double operator()(const Square& s) const { return s.t1; }
    double operator()(const Tabulated& tab) const { return tab.grid.back(); }
  };
  return std::visit(Visitor{}, shape_);
}

std::string Pulse::describe() const {
  struct Visitor {
    std::string operator()(const Gaussian& g) const {
      std::ostringstream s;
      s << "gaussian(t0=" << g.t0 << ", sigma=" << g.sigma << ")";
      return s.str();
    }
    std::string operator()(const DecayingExponential& e) const {
      std::ostringstream s;
      s << "decaying_exponential(gamma=" << e.gamma << ", t0=" << e.t0 << ")";
      return s.str();
    }
    std::string operator()(const Square& q) const {
      std::ostringstream s;
      s << "square(t0=" << q.t0 << ", t1=" << q.t1 << ")";
      return s.str();
    }
    std::string operator()(const Tabulated& tab) const {
      std::ostringstream s;
      s << "tabulated(" << tab.grid.size() << " samples)";
      return s.str();
    }
  };
  return std::visit(Visitor{}, shape_);
}

}  // namespace photon
