#pragma once

#include <map>
#include <vector>

#include "cflow/annihilator.hpp"

namespace cflow {

/// g_j(z) = z (z-1) ... (z-j+1) / j!, with g_0 = 1. Equals binomial(k, j) at z = k.
Complex falling_binomial(int j, Complex z);

/// Principal logarithm, imaginary part in (-pi, pi]. Throws ZeroEigenvalue at 0.
Complex branch_log(Complex lambda);

/// exp(z log lambda) on the principal branch.
Complex scalar_flow(Complex lambda, Complex z);

/// Extra multiples of 2 pi i added to individual cluster logarithms, keyed
/// by the zero-based cluster index in spectrum order.
using BranchOffsets = std::map<std::size_t, long>;

void apply_branch_offsets(Spectrum& spectrum, const BranchOffsets& offsets);

/// One basis function g_shift(z) * lambda_cluster^(z - shift).
struct BasisTerm {
  std::size_t cluster = 0;
  int shift = 0;

  bool operator==(const BasisTerm&) const = default;
};

struct BasisDescriptor {
  std::vector<BasisTerm> terms;
  Spectrum spectrum;

  Index size() const { return static_cast<Index>(terms.size()); }
  /// f_k(z) for the zero-based term index k.
  Complex eval(Index k, Complex z) const;
};

/// Verified B^{-1} for the generalized Vandermonde matrix B(i, j) = f_j(-i).
///
/// The coefficient e_ij multiplying f_j(z) in front of A^{-i} is the
/// transposed entry: e(i, j) == inverse(j, i).
struct CoefficientTable {
  Matrix inverse;
  double condition_estimate = 0;
  double inverse_residual = 0;  // ‖B E - I‖
  bool ill_conditioned = false;
  Eigen::PartialPivLU<Matrix> transposed_lu;  // of B^T

  Index size() const { return inverse.rows(); }
  Complex e(Index i, Index j) const { return inverse(j, i); }
  /// The full table (e_ij) with rows indexed by the power A^{-i}.
  Matrix e_matrix() const { return inverse.transpose(); }
  /// (mu_i) = E^T f, computed as the solution of B^T mu = f. Much more
  /// accurate than the product when B is badly conditioned.
  Vector mu(const Vector& f) const { return transposed_lu.solve(f); }
};

/// Terms follow the spectrum order (descending |lambda|, then ascending arg),
/// then ascending shift within a cluster.
BasisDescriptor build_basis(const Spectrum& spectrum);

Vector eval_basis(const BasisDescriptor& basis, Complex z);

Matrix vandermonde_matrix(const BasisDescriptor& basis);

/// LU inverse of B. Throws SingularMatrix (blaming root clustering) if B is
/// numerically singular; flags `ill_conditioned` above cond_warn.
CoefficientTable invert_vandermonde(const Matrix& b, const ToleranceConfig& tol = {});

}  // namespace cflow
