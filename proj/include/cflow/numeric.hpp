#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>

#include "cflow/error.hpp"

namespace cflow {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using Matrix = MatrixX<Complex>;
using Vector = VectorX<Complex>;
using Index = Eigen::Index;

/// Numerical thresholds shared by every stage of the pipeline.
///
/// `multiplicity_tol` is the relative coefficient noise level assumed when
/// deciding whether a spread group of computed roots is one multiple root
/// (see `cluster_roots`). The remaining fields are used as their names say.
struct ToleranceConfig {
  double rank_tol = 1e-10;
  double root_tol = 1e-12;
  double cluster_tol = 1e-7;
  double residual_tol = 1e-9;
  double cond_warn = 1e12;
  double multiplicity_tol = 1e-10;

  /// Throws InvalidArgument unless every field is finite and strictly positive.
  void validate() const;
};

/// Largest entry magnitude. This is the norm behind every tolerance check.
template <typename Derived>
typename Derived::RealScalar max_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return typename Derived::RealScalar(0);
  return a.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) {
      const auto& v = a(i, j);
      if (!std::isfinite(std::real(v)) || !std::isfinite(std::imag(v)))
        return false;
    }
  return true;
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const std::string& what) {
  if (!all_finite(a))
    throw FlowError(ErrorKind::NonFinite, what + " contains a non-finite entry");
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const std::string& what) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw FlowError(ErrorKind::DimensionMismatch,
                    what + " must be a non-empty square matrix, got " +
                        std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

template <typename Scalar>
MatrixX<Scalar> multiply(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  if (a.cols() != b.rows())
    throw FlowError(ErrorKind::DimensionMismatch,
                    "multiply: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                        " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  return a * b;
}

template <typename Scalar>
class LUFactorization;

/// Throws SingularMatrix when a pivot magnitude is <= rank_tol * max_norm(a).
template <typename Scalar>
LUFactorization<Scalar> lu_factor(const MatrixX<Scalar>& a, double rank_tol = ToleranceConfig{}.rank_tol);

/// Row-permuted LU factorization with partial pivoting.
///
/// Construction goes through `lu_factor`, which refuses to hand out a
/// factorization whose smallest pivot falls below the rank threshold.
template <typename Scalar>
class LUFactorization {
 public:
  using Real = typename Eigen::NumTraits<Scalar>::Real;

  Index size() const { return lu_.rows(); }
  /// Magnitudes of the diagonal of U, in elimination order.
  VectorX<Real> pivots() const { return lu_.matrixLU().diagonal().cwiseAbs(); }
  Real min_pivot() const { return pivots().minCoeff(); }
  const Eigen::PartialPivLU<MatrixX<Scalar>>& decomposition() const { return lu_; }

  MatrixX<Scalar> solve(const MatrixX<Scalar>& rhs) const {
    if (rhs.rows() != size())
      throw FlowError(ErrorKind::DimensionMismatch,
                      "solve: right-hand side has " + std::to_string(rhs.rows()) +
                          " rows, factorization has " + std::to_string(size()));
    return lu_.solve(rhs);
  }

  MatrixX<Scalar> inverse() const {
    return solve(MatrixX<Scalar>::Identity(size(), size()));
  }

 private:
  template <typename S>
  friend LUFactorization<S> lu_factor(const MatrixX<S>&, double);

  explicit LUFactorization(const MatrixX<Scalar>& a) : lu_(a) {}

  Eigen::PartialPivLU<MatrixX<Scalar>> lu_;
};

template <typename Scalar>
LUFactorization<Scalar> lu_factor(const MatrixX<Scalar>& a, double rank_tol) {
  require_square(a, "lu_factor input");
  LUFactorization<Scalar> f(a);
  const double scale = static_cast<double>(max_norm(a));
  const double smallest = static_cast<double>(f.min_pivot());
  if (!(smallest > rank_tol * scale))
    throw FlowError(ErrorKind::SingularMatrix,
                    "matrix is singular to working precision (smallest pivot " +
                        std::to_string(smallest) + ", max entry " + std::to_string(scale) + ")");
  return f;
}

template <typename Scalar>
MatrixX<Scalar> solve(const LUFactorization<Scalar>& f, const MatrixX<Scalar>& rhs) {
  return f.solve(rhs);
}

template <typename Scalar>
MatrixX<Scalar> inverse(const MatrixX<Scalar>& a, double rank_tol = ToleranceConfig{}.rank_tol) {
  return lu_factor(a, rank_tol).inverse();
}

/// Square-and-multiply power; negative exponents invert first.
template <typename Scalar>
MatrixX<Scalar> power_int(const MatrixX<Scalar>& a, std::int64_t k,
                          double rank_tol = ToleranceConfig{}.rank_tol) {
  require_square(a, "power_int input");
  MatrixX<Scalar> base = k < 0 ? inverse(a, rank_tol) : a;
  std::uint64_t e = k < 0 ? static_cast<std::uint64_t>(-(k + 1)) + 1 : static_cast<std::uint64_t>(k);
  MatrixX<Scalar> result = MatrixX<Scalar>::Identity(a.rows(), a.cols());
  while (e != 0) {
    if (e & 1u) result = result * base;
    e >>= 1;
    if (e != 0) base = base * base;
  }
  return result;
}

/// ‖x - ref‖ / ‖ref‖ in the max norm; falls back to the absolute error when ref is zero.
template <typename DerivedX, typename DerivedR>
double relative_error(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedR>& ref) {
  const double denom = static_cast<double>(max_norm(ref));
  const double diff = static_cast<double>(max_norm(x - ref));
  return denom > 0 ? diff / denom : diff;
}

/// The nilpotent shift N_n: ones directly above the diagonal.
template <typename Scalar = Complex>
MatrixX<Scalar> shift_matrix(Index n) {
  MatrixX<Scalar> s = MatrixX<Scalar>::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) s(i, i + 1) = Scalar(1);
  return s;
}

/// B_n(lambda) = lambda I + N.
template <typename Scalar = Complex>
MatrixX<Scalar> jordan_block(Scalar lambda, Index n) {
  MatrixX<Scalar> b = shift_matrix<Scalar>(n);
  b.diagonal().setConstant(lambda);
  return b;
}

}  // namespace cflow
