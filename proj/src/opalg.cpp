#include "photon/opalg.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace photon {

Operator identity(int dim) { return Operator::Identity(dim, dim); }

Operator zeros(int dim) { return Operator::Zero(dim, dim); }

namespace pauli {

Operator sx() {
  Operator m = zeros(2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

// With |g> = e0 and |e> = e1 this keeps [σx, σy] = 2iσz and σ− = (σx − iσy)/2.
Operator sy() {
  Operator m = zeros(2);
  m(0, 1) = cplx(0.0, 1.0);
  m(1, 0) = cplx(0.0, -1.0);
  return m;
}

Operator sz() {
  Operator m = zeros(2);
  m(0, 0) = -1.0;
  m(1, 1) = 1.0;
  return m;
}

Operator lower() {
  Operator m = zeros(2);
  m(0, 1) = 1.0;
  return m;
}

Operator raise() {
  Operator m = zeros(2);
  m(1, 0) = 1.0;
  return m;
}

Operator number() {
  Operator m = zeros(2);
  m(1, 1) = 1.0;
  return m;
}

}  // namespace pauli

Operator dagger(const Operator& a) { return a.adjoint(); }

Operator kron(const Operator& a, const Operator& b) {
  const Eigen::Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  Operator out(ra * rb, ca * cb);
  for (Eigen::Index i = 0; i < ra; ++i) {
    for (Eigen::Index j = 0; j < ca; ++j) {
      out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    }
  }
  return out;
}

Operator projector(const StateVector& psi) { return psi * psi.adjoint(); }

double max_abs(const Operator& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_finite(const Operator& a) { return a.allFinite(); }

double unitarity_defect(const Operator& a) {
  return max_abs(a.adjoint() * a - identity(static_cast<int>(a.rows())));
}

double hermiticity_defect(const Operator& a) { return max_abs(a - a.adjoint()); }

bool is_hermitian(const Operator& a, double tol) {
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

bool is_unitary(const Operator& a, double tol) {
  return a.rows() == a.cols() && unitarity_defect(a) <= tol;
}

double min_eigenvalue(const Operator& a) {
  const Eigen::MatrixXcd herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void require_same_dim(const Operator& a, const Operator& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a.rows() << "x" << a.cols() << " vs "
        << b.rows() << "x" << b.cols() << ")";
    throw DimensionError(msg.str());
  }
}

Operator commutator(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "commutator");
  Operator out = a * b;
  out.noalias() -= b * a;
  return out;
}

Operator dissipator_heisenberg(const Operator& L, const Operator& X) {
  require_same_dim(L, X, "dissipator_heisenberg");
  const Operator Ld = L.adjoint();
  // ½L*[X,L] + ½[L*,X]L = L*XL − ½(L*L X + X L*L)
  const Operator LdL = Ld * L;
  Operator out = Ld * X * L;
  out.noalias() -= 0.5 * (LdL * X);
  out.noalias() -= 0.5 * (X * LdL);
  return out;
}

SLHTriple::SLHTriple(Operator S, Operator L, Operator H, const Tolerances& tol)
    : S_(std::move(S)), L_(std::move(L)), H_(std::move(H)) {
  require_same_dim(S_, L_, "SLHTriple(S, L)");
  require_same_dim(S_, H_, "SLHTriple(S, H)");
  if (!is_finite(S_) || !is_finite(L_) || !is_finite(H_)) {
    throw InvariantError("SLHTriple: non-finite entries");
  }
  if (const double d = unitarity_defect(S_); d > tol.structural) {
    std::ostringstream msg;
    msg << "SLHTriple: S is not unitary, ||S*S - I||_max = " << d;
    throw InvariantError(msg.str());
  }
  if (const double d = hermiticity_defect(H_); d > tol.structural) {
    std::ostringstream msg;
    msg << "SLHTriple: H is not Hermitian, ||H - H*||_max = " << d;
    throw InvariantError(msg.str());
  }
  cache();
}

void SLHTriple::cache() {
  Ld_ = L_.adjoint();
  S_identity_ = S_.isIdentity(0.0);
  A_ = cplx(0.0, -1.0) * H_;
  A_.noalias() -= 0.5 * (Ld_ * L_);
}

SLHTriple SLHTriple::unchecked(Operator S, Operator L, Operator H) {
  SLHTriple g;
  g.S_ = std::move(S);
  g.L_ = std::move(L);
  g.H_ = std::move(H);
  g.cache();
  return g;
}

SLHTriple two_level_system(double kappa, double omega) {
  return SLHTriple(identity(2), std::sqrt(kappa) * pauli::lower(), omega * pauli::sz());
}

Operator lindblad_heisenberg(const SLHTriple& G, const Operator& X) {
  require_same_dim(G.L(), X, "lindblad_heisenberg");
  Operator out = dissipator_heisenberg(G.L(), X);
  // −i[X, H]
  const cplx mi(0.0, -1.0);
  out.noalias() += mi * (X * G.H());
  out.noalias() -= mi * (G.H() * X);
  return out;
}

Operator lindblad_schrodinger(const SLHTriple& G, const Operator& rho) {
  require_same_dim(G.L(), rho, "lindblad_schrodinger");
  Operator Lr = G.L() * rho;
  Operator out = Lr * G.Ld();
  out.noalias() += G.A() * rho;
  out.noalias() += rho * G.A().adjoint();
  return out;
}

cplx trace_product(const Operator& a, const Operator& b) {
  // tr[ab] = Σ_ij a_ij b_ji
  const Eigen::Index n = a.rows();
  cplx acc(0.0, 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) acc += a(i, j) * b(j, i);
  }
  return acc;
}

}  // namespace photon
