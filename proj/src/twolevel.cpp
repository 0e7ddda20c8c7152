#include "photon/twolevel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace photon::twolevel {

namespace {

constexpr cplx I{0.0, 1.0};

cplx coeff(const Operator& rho, const Operator& pauli_op) { return trace_product(rho, pauli_op); }

BlochMasterCoeffs axpy(const BlochMasterCoeffs& y, double h, const BlochMasterCoeffs& k) {
  return {y.x00 + h * k.x00, y.y00 + h * k.y00, y.z00 + h * k.z00,
          y.x01 + h * k.x01, y.y01 + h * k.y01, y.z01 + h * k.z01,
          y.x11 + h * k.x11, y.y11 + h * k.y11, y.z11 + h * k.z11};
}

Operator bloch_operator(cplx c, cplx x, cplx y, cplx z) {
  return 0.5 * (c * identity(2) + x * pauli::sx() + y * pauli::sy() + z * pauli::sz());
}

}  // namespace

BlochMasterCoeffs BlochMasterCoeffs::initial(const StateVector& eta) {
  if (eta.size() != 2) throw DimensionError("twolevel: eta must be two-dimensional");
  const Operator p = projector(eta);
  const cplx x = coeff(p, pauli::sx()), y = coeff(p, pauli::sy()), z = coeff(p, pauli::sz());
  return {x, y, z, 0.0, 0.0, 0.0, x, y, z};
}

double BlochMasterCoeffs::max_imag_diagonal() const {
  return std::max({std::abs(x00.imag()), std::abs(y00.imag()), std::abs(z00.imag()),
                   std::abs(x11.imag()), std::abs(y11.imag()), std::abs(z11.imag())});
}

double BlochMasterCoeffs::max_deviation(const BlochMasterCoeffs& o) const {
  return std::max({std::abs(x00 - o.x00), std::abs(y00 - o.y00), std::abs(z00 - o.z00),
                   std::abs(x01 - o.x01), std::abs(y01 - o.y01), std::abs(z01 - o.z01),
                   std::abs(x11 - o.x11), std::abs(y11 - o.y11), std::abs(z11 - o.z11)});
}

BlochMasterCoeffs to_bloch(const GeneralizedState& s) {
  if (s.dim() != 2) throw DimensionError("twolevel::to_bloch: state must be 2x2");
  const Operator sx = pauli::sx(), sy = pauli::sy(), sz = pauli::sz();
  return {coeff(s.rho00, sx), coeff(s.rho00, sy), coeff(s.rho00, sz),
          coeff(s.rho01, sx), coeff(s.rho01, sy), coeff(s.rho01, sz),
          coeff(s.rho11, sx), coeff(s.rho11, sy), coeff(s.rho11, sz)};
}

template <Transcription V>
BlochMasterCoeffs bloch_master_rhs(const BlochMasterCoeffs& c, cplx xi, double kappa,
                                   double omega) {
  const double rk = std::sqrt(kappa);
  const double w2 = 2.0 * omega;
  const double hk = 0.5 * kappa;
  const cplx xic = std::conj(xi);
  constexpr bool printed = V == Transcription::AsPrinted;

  BlochMasterCoeffs d;
  d.x00 = -w2 * c.y00 - hk * c.x00;
  d.y00 = w2 * c.x00 - hk * c.y00;
  d.z00 = -kappa * (1.0 + (printed ? c.z11 : c.z00));

  d.x01 = -hk * c.x01 - w2 * c.y01 + (printed ? -1.0 : 1.0) * rk * xic * c.z00;
  d.y01 = w2 * c.x01 - hk * c.y01 - I * rk * xic * c.z00;
  d.z01 = -kappa * c.z01 - rk * c.x00 * xic + I * rk * c.y00 * xic;

  const cplx z01c = std::conj(c.z01), x01c = std::conj(c.x01), y01c = std::conj(c.y01);
  d.x11 = -hk * c.x11 - w2 * c.y11 + rk * c.z01 * xi + rk * z01c * xic;
  d.y11 = w2 * c.x11 - hk * c.y11 + I * rk * c.z01 * xi - I * rk * z01c * xic;
  d.z11 = -kappa - kappa * c.z11 - rk * c.x01 * xi - I * rk * c.y01 * xi - rk * x01c * xic +
          I * rk * y01c * xic;
  return d;
}

template BlochMasterCoeffs bloch_master_rhs<Transcription::Corrected>(const BlochMasterCoeffs&,
                                                                      cplx, double, double);
template BlochMasterCoeffs bloch_master_rhs<Transcription::AsPrinted>(const BlochMasterCoeffs&,
                                                                      cplx, double, double);

BlochMasterCoeffs bloch_master_rhs(const BlochMasterCoeffs& c, double t, double kappa,
                                   double omega, const Pulse& p, Transcription v) {
  const cplx xi = p.eval(t);
  return v == Transcription::Corrected
             ? bloch_master_rhs<Transcription::Corrected>(c, xi, kappa, omega)
             : bloch_master_rhs<Transcription::AsPrinted>(c, xi, kappa, omega);
}

std::vector<BlochMasterCoeffs> integrate_bloch_master(double kappa, double omega,
                                                      const Pulse& p, const StateVector& eta,
                                                      double dt, double T, Transcription v) {
  if (!(kappa > 0.0)) throw std::invalid_argument("twolevel: kappa must be > 0");
  const TimeGrid grid = TimeGrid::from_horizon(dt, T);
  std::vector<BlochMasterCoeffs> out;
  out.reserve(grid.n_steps + 1);
  BlochMasterCoeffs y = BlochMasterCoeffs::initial(eta);
  out.push_back(y);
  auto f = [&](const BlochMasterCoeffs& c, double t) {
    return bloch_master_rhs(c, t, kappa, omega, p, v);
  };
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time(k);
    const auto k1 = f(y, t);
    const auto k2 = f(axpy(y, 0.5 * dt, k1), t + 0.5 * dt);
    const auto k3 = f(axpy(y, 0.5 * dt, k2), t + 0.5 * dt);
    const auto k4 = f(axpy(y, dt, k3), t + dt);
    y = axpy(axpy(axpy(axpy(y, dt / 6.0, k1), dt / 3.0, k2), dt / 3.0, k3), dt / 6.0, k4);
    out.push_back(y);
  }
  return out;
}

double BlochFilterCoeffs::max_deviation(const BlochFilterCoeffs& o) const {
  return std::max({std::abs(c00 - o.c00), std::abs(x00 - o.x00), std::abs(y00 - o.y00),
                   std::abs(z00 - o.z00), std::abs(c01 - o.c01), std::abs(x01 - o.x01),
                   std::abs(y01 - o.y01), std::abs(z01 - o.z01), std::abs(x11 - o.x11),
                   std::abs(y11 - o.y11), std::abs(z11 - o.z11)});
}

BlochFilterCoeffs to_bloch(const FilterState& s) {
  if (s.sigma11.rows() != 2) throw DimensionError("twolevel::to_bloch: state must be 2x2");
  const Operator id = identity(2), sx = pauli::sx(), sy = pauli::sy(), sz = pauli::sz();
  const Operator& r00 = s.sigma00;
  const Operator& r01 = s.sigma10;  // ρ̂01 pairs with π10
  const Operator& r11 = s.sigma11;
  return {coeff(r00, id), coeff(r00, sx), coeff(r00, sy), coeff(r00, sz),
          coeff(r01, id), coeff(r01, sx), coeff(r01, sy), coeff(r01, sz),
          coeff(r11, sx), coeff(r11, sy), coeff(r11, sz)};
}

FilterState from_bloch(const BlochFilterCoeffs& c, double t) {
  FilterState s;
  s.sigma00 = bloch_operator(c.c00, c.x00, c.y00, c.z00);
  s.sigma10 = bloch_operator(c.c01, c.x01, c.y01, c.z01);
  s.sigma01 = s.sigma10.adjoint();
  s.sigma11 = bloch_operator(BlochFilterCoeffs::c11, c.x11, c.y11, c.z11);
  s.t = t;
  return s;
}

double bloch_innovation(const BlochFilterCoeffs& c, double dY, double dt, double kappa,
                        cplx xi) {
  const cplx K = std::sqrt(kappa) * c.x11 + c.c01 * xi + std::conj(c.c01) * std::conj(xi);
  return dY - K.real() * dt;
}

template <Transcription V>
BlochFilterCoeffs bloch_filter_rhs(const BlochFilterCoeffs& c, double dW, double dt,
                                   double kappa, double omega, cplx xi) {
  const double rk = std::sqrt(kappa);
  const double w2 = 2.0 * omega;
  const double hk = 0.5 * kappa;
  const cplx xic = std::conj(xi);
  const cplx c10 = std::conj(c.c01);
  const cplx x01c = std::conj(c.x01), y01c = std::conj(c.y01), z01c = std::conj(c.z01);

  BlochFilterCoeffs n = c;
  if constexpr (V == Transcription::Corrected) {
    const cplx K = rk * c.x11 + c.c01 * xi + c10 * xic;

    n.x00 += (-w2 * c.y00 - hk * c.x00) * dt + (rk * (c.c00 + c.z00) - K * c.x00) * dW;
    n.y00 += (w2 * c.x00 - hk * c.y00) * dt + (-K * c.y00) * dW;
    n.z00 += (-kappa * (c.c00 + c.z00)) * dt + (-rk * c.x00 - K * c.z00) * dW;
    n.c00 += (rk * c.x00 - K * c.c00) * dW;

    n.c01 += (rk * c.x01 + c.c00 * xic - K * c.c01) * dW;
    n.x01 += (-hk * c.x01 - w2 * c.y01 + rk * xic * c.z00) * dt +
             (rk * (c.c01 + c.z01) + c.x00 * xic - K * c.x01) * dW;
    n.y01 += (w2 * c.x01 - hk * c.y01 - I * rk * xic * c.z00) * dt +
             (c.y00 * xic - K * c.y01) * dW;
    n.z01 += (-kappa * (c.c01 + c.z01) - rk * c.x00 * xic + I * rk * c.y00 * xic) * dt +
             (-rk * c.x01 + c.z00 * xic - K * c.z01) * dW;

    n.x11 += (-hk * c.x11 - w2 * c.y11 + rk * c.z01 * xi + rk * z01c * xic) * dt +
             (rk * (1.0 + c.z11) + x01c * xic + c.x01 * xi - K * c.x11) * dW;
    n.y11 += (w2 * c.x11 - hk * c.y11 + I * rk * c.z01 * xi - I * rk * z01c * xic) * dt +
             (y01c * xic + c.y01 * xi - K * c.y11) * dW;
    n.z11 += (-kappa - kappa * c.z11 - rk * c.x01 * xi - I * rk * c.y01 * xi - rk * x01c * xic +
              I * rk * y01c * xic) * dt +
             (-rk * c.x11 + z01c * xic + c.z01 * xi - K * c.z11) * dW;
  } else {
    // Literal transcription of the published coefficient SDEs.
    const cplx K = rk * c.x11 + 0.5 * c.c01 * xi + 0.5 * c10 * xic;

    n.c00 += (rk * c.x00 - K * c.c00) * dW;
    n.x00 += (-w2 * c.y00 - hk * c.x00) * dt + (rk * c.c00 - K * c.x00) * dW;
    n.y00 += (w2 * c.x00 - hk * c.y00) * dt + (-K * c.y00) * dW;
    n.z00 += (-kappa * (1.0 + c.z00)) * dt + (rk * c.x00 - K * c.z00) * dW;

    n.c01 += (rk * c.x01 + c.c00 * xic - K * c.c01) * dW;
    n.x01 += (-hk * c.x01 - w2 * c.y01 - rk * xic * c.z00) * dt +
             (c.x00 * xic + rk * c.c01 - K * c.x01) * dW;
    n.y01 += (w2 * c.x01 - hk * c.y01 - I * rk * xic * c.z00) * dt +
             (c.y00 * xic - K * c.y01) * dW;
    n.z01 += (-kappa * c.z01 - rk * c.x00 * xic + I * rk * c.y00 * xic) * dt +
             (rk * c.x01 + c.z00 * xic - K * c.z01) * dW;

    n.x11 += (-hk * c.x11 - w2 * c.y11 + rk * c.z01 * xi + rk * z01c * xic) * dt +
             (rk + x01c * xic + c.x01 * xi - K * c.x11) * dW;
    n.y11 += (w2 * c.x11 - hk * c.y11 + I * rk * c.z01 * xi - I * rk * z01c * xic) * dt +
             (y01c * xic + c.y01 * xi - K * c.y11) * dW;
    n.z11 += (-kappa - kappa * c.z11 - rk * c.x01 * xi - I * rk * c.y01 * xi - rk * x01c * xic +
              I * rk * y01c * xic) * dt +
             (rk * c.x11 + z01c * xic + c.z01 * xi - K * c.z11) * dW;
  }
  if (!std::isfinite(std::abs(n.x11)) || !std::isfinite(std::abs(n.z11)) ||
      !std::isfinite(std::abs(n.c00)) || !std::isfinite(std::abs(n.c01))) {
    throw FilterError(0.0, "non-finite Bloch filter coefficients");
  }
  return n;
}

template BlochFilterCoeffs bloch_filter_rhs<Transcription::Corrected>(
    const BlochFilterCoeffs&, double, double, double, double, cplx);
template BlochFilterCoeffs bloch_filter_rhs<Transcription::AsPrinted>(
    const BlochFilterCoeffs&, double, double, double, double, cplx);

BlochFilterCoeffs bloch_filter_rhs(const BlochFilterCoeffs& c, double dW, double dt, double t,
                                   double kappa, double omega, const Pulse& p,
                                   Transcription v) {
  const cplx xi = p.eval(t);
  return v == Transcription::Corrected
             ? bloch_filter_rhs<Transcription::Corrected>(c, dW, dt, kappa, omega, xi)
             : bloch_filter_rhs<Transcription::AsPrinted>(c, dW, dt, kappa, omega, xi);
}

}  // namespace photon::twolevel
