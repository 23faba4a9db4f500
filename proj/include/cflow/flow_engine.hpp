#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cflow/annihilator.hpp"
#include "cflow/flow_basis.hpp"

namespace cflow {

/// Everything needed to evaluate A^z = sum_i mu_i(z) A^{-i} at any z, with
/// mu_i(z) = sum_j e_ij f_j(z).
struct FlowRepresentation {
  Index p = 0;
  Index source_dim = 0;
  std::vector<Matrix> neg_powers;  // A^{-1}, ..., A^{-p}
  CoefficientTable coeffs;
  BasisDescriptor basis;
  AnnihilatorPolynomial relation;
  double relation_residual = 0;
};

/// [A^{-1}, ..., A^{-p}] from a single factorization of A.
std::vector<Matrix> negative_powers(const Matrix& a, Index p, const ToleranceConfig& tol = {});

/// Direct method: roots of q -> spectrum -> basis -> Vandermonde -> e_ij.
/// Without q the relation is the discovered minimal polynomial.
FlowRepresentation build_flow(const Matrix& a, const std::optional<AnnihilatorPolynomial>& q,
                              const ToleranceConfig& tol = {}, const BranchOffsets& offsets = {});

/// Same, with caller-supplied roots and multiplicities instead of root finding.
FlowRepresentation build_flow(const Matrix& a, const AnnihilatorPolynomial& q, const Spectrum& spectrum,
                              const ToleranceConfig& tol = {});

Vector mu_functions(const FlowRepresentation& rep, Complex z);
Matrix evaluate_flow(const FlowRepresentation& rep, Complex z);
/// A^z v = sum_i mu_i(z) (A^{-i} v), the flow acting on a vector.
Vector apply_flow(const FlowRepresentation& rep, Complex z, const Vector& v);
/// Same with the images A^{-i} v precomputed, for repeated evaluation.
Vector apply_flow(const FlowRepresentation& rep, std::span<const Vector> images, Complex z);
/// ‖E‖ max_k |f_k(z)|: the amplification applied to rounding in the A^{-i}.
double flow_condition(const FlowRepresentation& rep, Complex z);

/// p x p, first column (c_{p-1}, ..., c_0), ones on the superdiagonal.
Matrix companion_matrix(const AnnihilatorPolynomial& q);

/// mu(z) = C_Q^z c, where the flow of C_Q comes from the direct method applied
/// to C_Q itself (Q is both its characteristic and its minimal polynomial).
///
/// The flow acts on c as a vector, sum_k nu_k(z) (C_Q^{-k} c), rather than
/// forming the matrix C_Q^z first: C_Q^z has large cancelling entries that
/// multiplying by c would amplify.
class CompanionMu {
 public:
  explicit CompanionMu(AnnihilatorPolynomial q, const ToleranceConfig& tol = {},
                       const BranchOffsets& offsets = {});

  Vector operator()(Complex z) const;
  const FlowRepresentation& companion_flow() const { return flow_; }
  const AnnihilatorPolynomial& relation() const { return flow_.relation; }

 private:
  FlowRepresentation flow_;
  std::vector<Vector> images_;  // C_Q^{-k} c
};

/// A^z = sum_i (C_Q^z c)_i A^{-i}, built once for repeated evaluation.
class CompanionFlow {
 public:
  CompanionFlow(const Matrix& a, const AnnihilatorPolynomial& q, const ToleranceConfig& tol = {},
                const BranchOffsets& offsets = {});

  Vector mu(Complex z) const { return mu_(z); }
  Matrix operator()(Complex z) const;
  const CompanionMu& coefficients() const { return mu_; }

 private:
  CompanionMu mu_;
  std::vector<Matrix> neg_powers_;
};

Vector companion_flow_mu(const AnnihilatorPolynomial& q, Complex z, const ToleranceConfig& tol = {});
Matrix evaluate_companion_flow(const Matrix& a, const AnnihilatorPolynomial& q, Complex z,
                               const ToleranceConfig& tol = {});

struct JordanBlockSpec {
  Complex lambda;
  Index size = 1;
};

/// sum_{i < size} g_i(z) lambda^{z-i} N^i, upper-triangular Toeplitz.
Matrix jordan_block_flow(Complex lambda, Index size, Complex z);
/// Block-diagonal Jordan matrix with the given blocks, in order.
Matrix jordan_matrix(std::span<const JordanBlockSpec> blocks);
/// T diag(B_k^z) T^{-1}: reference flow for matrices built from known Jordan data.
Matrix jordan_oracle(std::span<const JordanBlockSpec> blocks, const Matrix& t, Complex z,
                     const ToleranceConfig& tol = {});

/// Matrix of size n+1 whose minimal polynomial is m(X)(X - new_root) and whose
/// flow has A^z as its upper-left n x n block. When new_root is already an
/// eigenvalue, `a` must be in Jordan form; the largest block for that
/// eigenvalue grows by one (its new row/column is placed last).
Matrix extend_matrix(const Matrix& a, Complex new_root, const Spectrum& spectrum_of_a,
                     const ToleranceConfig& tol = {});

/// ‖A <v, Ā> - <C v, Ā>‖ / s with Ā = (A^{-1}, ..., A^{-p}) and s the
/// largest magnitude among the summed terms (at least 1).
double companion_action_check(const Matrix& a, const AnnihilatorPolynomial& q, const Vector& coeff_vec,
                              const ToleranceConfig& tol = {});

struct FlowAxiomReport {
  double identity = 0;   // ‖F(0) - I‖
  double generator = 0;  // ‖F(1) - A‖ / max(1, ‖A‖)
  double group = 0;      // max ‖F(z)F(w) - F(z+w)‖ / max(1, ‖F(z)‖ ‖F(w)‖)

  double worst() const { return std::max({identity, generator, group}); }
};

template <typename Flow>
FlowAxiomReport check_flow_axioms(const Flow& flow, const Matrix& a,
                                  std::span<const std::pair<Complex, Complex>> samples) {
  FlowAxiomReport r;
  const Index n = a.rows();
  r.identity = static_cast<double>(max_norm(flow(Complex{0, 0}) - Matrix::Identity(n, n)));
  r.generator = static_cast<double>(max_norm(flow(Complex{1, 0}) - a)) /
                std::max(1.0, static_cast<double>(max_norm(a)));
  for (const auto& [z, w] : samples) {
    const Matrix fz = flow(z);
    const Matrix fw = flow(w);
    const double scale = std::max(1.0, static_cast<double>(max_norm(fz)) * static_cast<double>(max_norm(fw)));
    r.group = std::max(r.group, static_cast<double>(max_norm(fz * fw - flow(z + w))) / scale);
  }
  return r;
}

FlowAxiomReport check_flow_axioms(const FlowRepresentation& rep, const Matrix& a,
                                  std::span<const std::pair<Complex, Complex>> samples);

/// max over k in [k_min, k_max] of relative_error(F(k), A^k).
template <typename Flow>
double integer_power_error(const Flow& flow, const Matrix& a, int k_min, int k_max,
                           const ToleranceConfig& tol = {}) {
  double worst = 0;
  for (int k = k_min; k <= k_max; ++k)
    worst = std::max(worst, relative_error(flow(Complex(k, 0)), power_int(a, k, tol.rank_tol)));
  return worst;
}

/// `count` pairs (z, w) drawn uniformly from the disk |z| <= radius.
std::vector<std::pair<Complex, Complex>> sample_pairs(std::uint64_t seed, std::size_t count, double radius);

}  // namespace cflow
