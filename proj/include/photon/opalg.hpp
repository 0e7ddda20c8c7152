#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace photon {

using cplx = std::complex<double>;

/// Dense complex matrix on a finite-dimensional Hilbert space.
///
/// Basis convention for two-level systems: index 0 is the ground state |g>,
/// index 1 the excited state |e>. Tensor products are always ordered
/// ancilla ⊗ system.
using Operator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Thrown when operands live on spaces of different dimension.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a structural invariant (unitarity, hermiticity, finiteness)
/// does not hold.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double structural = 1e-10;  // unitary / Hermitian checks
  double algebraic = 1e-12;   // identities such as G(I) = 0
};

Operator identity(int dim);
Operator zeros(int dim);

namespace pauli {
Operator sx();
Operator sy();
Operator sz();
Operator lower();   // σ− = |g><e|
Operator raise();   // σ+ = |e><g|
Operator number();  // n = σ+σ− = |e><e|
}  // namespace pauli

Operator dagger(const Operator& a);
Operator kron(const Operator& a, const Operator& b);
Operator projector(const StateVector& psi);

/// max_ij |a_ij|
double max_abs(const Operator& a);

bool is_finite(const Operator& a);
bool is_hermitian(const Operator& a, double tol);
bool is_unitary(const Operator& a, double tol);

/// ‖a†a − I‖_max
double unitarity_defect(const Operator& a);
/// ‖a − a†‖_max
double hermiticity_defect(const Operator& a);

/// Smallest eigenvalue of the Hermitian part of a.
double min_eigenvalue(const Operator& a);

void require_same_dim(const Operator& a, const Operator& b, const char* what);

/// AB − BA
Operator commutator(const Operator& a, const Operator& b);

/// Heisenberg-picture dissipator ½L*[X,L] + ½[L*,X]L.
Operator dissipator_heisenberg(const Operator& L, const Operator& X);

/// Parameters (S, L, H) of an open system driven by a single boson field.
///
/// Construction validates S unitary, H Hermitian, common dimension and
/// finiteness; an InvariantError names the offending defect.
class SLHTriple {
 public:
  SLHTriple(Operator S, Operator L, Operator H, const Tolerances& tol = {});

  /// Skips validation; used for the time-dependent extended system whose
  /// parts are valid by construction.
  static SLHTriple unchecked(Operator S, Operator L, Operator H);

  const Operator& S() const { return S_; }
  const Operator& L() const { return L_; }
  const Operator& H() const { return H_; }
  int dim() const { return static_cast<int>(S_.rows()); }
  const Operator& Ld() const { return Ld_; }
  /// A = −iH − ½L*L, so that 𝒢*(ρ) = Aρ + ρA* + LρL*.
  const Operator& A() const { return A_; }
  bool S_is_identity() const { return S_identity_; }

 private:
  SLHTriple() = default;
  void cache();
  Operator S_, L_, H_, Ld_, A_;
  bool S_identity_ = false;
};

/// S = I, L = √κ σ−, H = ω σz.
SLHTriple two_level_system(double kappa, double omega);

/// 𝒢(X) = 𝓛_L(X) − i[X, H]
Operator lindblad_heisenberg(const SLHTriple& G, const Operator& X);

/// 𝒢*(ρ) = LρL* − ½ρL*L − ½L*Lρ + i[ρ, H]. ρ need not be Hermitian.
Operator lindblad_schrodinger(const SLHTriple& G, const Operator& rho);

/// tr[a b] without forming the product.
cplx trace_product(const Operator& a, const Operator& b);

}  // namespace photon
