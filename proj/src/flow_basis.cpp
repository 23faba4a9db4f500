#include "cflow/flow_basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cflow {
namespace {
constexpr double kPi = 3.14159265358979323846;
}

Complex falling_binomial(int j, Complex z) {
  if (j < 0) throw FlowError(ErrorKind::InvalidArgument, "g_j needs j >= 0");
  Complex acc{1, 0};
  double factorial = 1;
  for (int i = 0; i < j; ++i) {
    acc *= z - static_cast<double>(i);
    factorial *= static_cast<double>(i + 1);
  }
  return acc / factorial;
}

Complex branch_log(Complex lambda) {
  if (lambda == Complex{0, 0})
    throw FlowError(ErrorKind::ZeroEigenvalue, "log(0) is undefined; 0 has no scalar flow");
  // std::log sends (-x, -0.0) to -i*pi; the principal branch keeps +i*pi.
  if (lambda.imag() == 0 && lambda.real() < 0) return {std::log(-lambda.real()), kPi};
  return std::log(lambda);
}

Complex scalar_flow(Complex lambda, Complex z) { return std::exp(z * branch_log(lambda)); }

void apply_branch_offsets(Spectrum& spectrum, const BranchOffsets& offsets) {
  for (const auto& [index, turns] : offsets) {
    if (index >= spectrum.size())
      throw FlowError(ErrorKind::InvalidArgument,
                      "branch offset for cluster " + std::to_string(index + 1) + " but the spectrum has " +
                          std::to_string(spectrum.size()) + " clusters");
    spectrum.clusters[index].log_lambda += Complex(0, 2 * kPi * static_cast<double>(turns));
  }
}

Complex BasisDescriptor::eval(Index k, Complex z) const {
  const BasisTerm& t = terms[static_cast<std::size_t>(k)];
  const Complex log_lambda = spectrum.clusters[t.cluster].log_lambda;
  // lambda^(z - j) in one exponential so every term shares the same branch.
  return falling_binomial(t.shift, z) * std::exp((z - static_cast<double>(t.shift)) * log_lambda);
}

BasisDescriptor build_basis(const Spectrum& spectrum) {
  BasisDescriptor basis;
  basis.spectrum = spectrum;
  for (std::size_t c = 0; c < spectrum.size(); ++c)
    for (int j = 0; j < spectrum.clusters[c].multiplicity; ++j) basis.terms.push_back({c, j});
  return basis;
}

Vector eval_basis(const BasisDescriptor& basis, Complex z) {
  Vector out(basis.size());
  for (Index k = 0; k < basis.size(); ++k) out(k) = basis.eval(k, z);
  return out;
}

Matrix vandermonde_matrix(const BasisDescriptor& basis) {
  const Index p = basis.size();
  Matrix b(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) b(i, j) = basis.eval(j, Complex(-static_cast<double>(i + 1), 0));
  return b;
}

CoefficientTable invert_vandermonde(const Matrix& b, const ToleranceConfig& tol) {
  require_square(b, "generalized Vandermonde matrix");
  CoefficientTable table;
  try {
    table.inverse = lu_factor(b, tol.rank_tol).inverse();
  } catch (const FlowError& e) {
    if (e.kind() != ErrorKind::SingularMatrix) throw;
    throw FlowError(ErrorKind::SingularMatrix,
                    std::string("generalized Vandermonde matrix is numerically singular, which cannot "
                                "happen for distinct roots: the root clustering upstream most likely "
                                "split or merged a multiple root (") +
                        e.what() + ")");
  }
  table.transposed_lu = Eigen::PartialPivLU<Matrix>(b.transpose());
  const Index p = b.rows();
  table.inverse_residual = static_cast<double>(max_norm(b * table.inverse - Matrix::Identity(p, p)));
  table.condition_estimate =
      static_cast<double>(max_norm(b)) * static_cast<double>(max_norm(table.inverse)) * static_cast<double>(p);
  table.ill_conditioned = table.condition_estimate > tol.cond_warn;
  if (!(table.inverse_residual <= tol.residual_tol * std::max(1.0, table.condition_estimate)))
    throw FlowError(ErrorKind::SingularMatrix,
                    "generalized Vandermonde inverse failed verification (residual " +
                        std::to_string(table.inverse_residual) + ")");
  return table;
}

}  // namespace cflow
