#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cflow/numeric.hpp"

namespace cflow {

/// Monic Q(X) = X^p - c_{p-1} X^{p-1} - ... - c_1 X - c_0, stored as (c_0, ..., c_{p-1}).
///
/// The sign convention matches the relation A^p = c_{p-1} A^{p-1} + ... + c_0 I,
/// so `coeffs()` are the coefficients of that relation, not of Q.
class AnnihilatorPolynomial {
 public:
  explicit AnnihilatorPolynomial(Vector coeffs);

  /// Builds Q from the relation vector (c_{p-1}, ..., c_1, c_0), top-down.
  static AnnihilatorPolynomial from_relation_vector(const Vector& c);
  /// Builds Q from monomial coefficients a_0..a_p of sum a_k X^k; a_p must be nonzero.
  static AnnihilatorPolynomial from_monomial(const Vector& a);
  /// prod (X - r) over the given roots, repeated roots included.
  static AnnihilatorPolynomial from_roots(std::span<const Complex> roots);

  Index degree() const { return coeffs_.size(); }
  /// (c_0, ..., c_{p-1})
  const Vector& coeffs() const { return coeffs_; }
  /// (c_{p-1}, ..., c_0), the vector the companion flow acts on.
  Vector relation_vector() const;
  /// a_0..a_p with Q(X) = sum a_k X^k; a_p = 1.
  Vector monomial() const;

  Complex operator()(Complex x) const;
  /// Coefficients t_0..t_p of Q(X) = sum t_k (X - center)^k.
  Vector taylor(Complex center) const;
  /// sum |a_k| r^k, the scale of rounding error when evaluating Q at |x| = r.
  double magnitude_bound(double r) const;

  friend AnnihilatorPolynomial operator*(const AnnihilatorPolynomial& a, const AnnihilatorPolynomial& b);

 private:
  Vector coeffs_;
};

struct Cluster {
  Complex lambda;
  int multiplicity = 1;
  Complex log_lambda;
};

/// Distinct roots of Q with multiplicities and fixed logarithms.
///
/// `cluster_roots` and `make_spectrum` keep the clusters ordered by
/// descending |lambda| then ascending arg(lambda), with |lambda| ties broken
/// at cluster_tol. Cluster indices (branch offsets, basis terms) refer to
/// this order.
struct Spectrum {
  std::vector<Cluster> clusters;

  int total_multiplicity() const;
  std::size_t size() const { return clusters.size(); }
  /// Throws InvalidArgument if an invariant (distinct, nonzero, exp(log) == lambda) fails.
  void validate(const ToleranceConfig& tol) const;
};

struct RootSet {
  std::vector<Complex> roots;
  std::vector<double> residuals;  // |Q(root)|
  int sweeps = 0;
};

/// Least-degree monic m with m(A) ~ 0, found by detecting the first linear
/// dependence among the flattened powers I, A, A^2, ...
AnnihilatorPolynomial minimal_polynomial(const Matrix& a, const ToleranceConfig& tol = {});

/// Faddeev-LeVerrier trace recursion; degree n.
AnnihilatorPolynomial characteristic_polynomial(const Matrix& a);

/// ‖A^p - sum c_i A^i‖ / max(1, ‖A‖^p) in the max norm.
double validate_relation(const Matrix& a, const AnnihilatorPolynomial& q);

/// Throws RelationInvalid when validate_relation exceeds residual_tol.
void require_relation(const Matrix& a, const AnnihilatorPolynomial& q, const ToleranceConfig& tol);

/// Aberth-Ehrlich simultaneous iteration. Throws NonConvergence after 500 sweeps.
RootSet find_roots(const AnnihilatorPolynomial& q, const ToleranceConfig& tol = {});

/// Greedy transitive grouping at radius cluster_tol; representative is the centroid.
/// Throws ZeroEigenvalue when a root lies within cluster_tol of the origin.
Spectrum cluster_roots(std::span<const Complex> roots, const ToleranceConfig& tol = {});

/// As above, then merges groups that are one numerically multiple root of q
/// and polishes each multiple representative against q.
Spectrum cluster_roots(std::span<const Complex> roots, const AnnihilatorPolynomial& q,
                       const ToleranceConfig& tol = {});

/// find_roots followed by the multiplicity-aware cluster_roots.
Spectrum spectrum_of(const AnnihilatorPolynomial& q, const ToleranceConfig& tol = {});

/// Caller-supplied roots and multiplicities, bypassing root finding and clustering.
Spectrum make_spectrum(std::span<const std::pair<Complex, int>> roots, const ToleranceConfig& tol = {});

}  // namespace cflow
