#include "cflow/flow_engine.hpp"

#include <cmath>
#include <random>
#include <string>

namespace cflow {
namespace {

Matrix combine(const Vector& mu, const std::vector<Matrix>& neg_powers) {
  Matrix out = Matrix::Zero(neg_powers.front().rows(), neg_powers.front().cols());
  for (std::size_t i = 0; i < neg_powers.size(); ++i) out += mu(static_cast<Index>(i)) * neg_powers[i];
  return out;
}

FlowRepresentation assemble(const Matrix& a, const AnnihilatorPolynomial& q, const Spectrum& spectrum,
                            const ToleranceConfig& tol) {
  if (spectrum.total_multiplicity() != q.degree())
    throw FlowError(ErrorKind::InvalidArgument,
                    "spectrum multiplicities sum to " + std::to_string(spectrum.total_multiplicity()) +
                        " but the relation has degree " + std::to_string(q.degree()));
  const double residual = validate_relation(a, q);
  if (!(residual <= tol.residual_tol))
    throw FlowError(ErrorKind::RelationInvalid,
                    "relation does not annihilate the matrix: residual " + std::to_string(residual) +
                        " exceeds residual_tol " + std::to_string(tol.residual_tol));
  BasisDescriptor basis = build_basis(spectrum);
  CoefficientTable coeffs = invert_vandermonde(vandermonde_matrix(basis), tol);
  return FlowRepresentation{q.degree(), a.rows(), negative_powers(a, q.degree(), tol), std::move(coeffs),
                            std::move(basis), q, residual};
}

const AnnihilatorPolynomial& checked_relation(const Matrix& a, const AnnihilatorPolynomial& q,
                                              const ToleranceConfig& tol) {
  require_square(a, "companion flow input");
  require_finite(a, "companion flow input");
  require_relation(a, q, tol);
  return q;
}

}  // namespace

std::vector<Matrix> negative_powers(const Matrix& a, Index p, const ToleranceConfig& tol) {
  require_square(a, "negative_powers input");
  const auto lu = lu_factor(a, tol.rank_tol);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(p));
  Matrix current = Matrix::Identity(a.rows(), a.cols());
  for (Index k = 0; k < p; ++k) {
    current = lu.solve(current);
    out.push_back(current);
  }
  return out;
}

FlowRepresentation build_flow(const Matrix& a, const std::optional<AnnihilatorPolynomial>& q,
                              const ToleranceConfig& tol, const BranchOffsets& offsets) {
  tol.validate();
  require_square(a, "build_flow input");
  require_finite(a, "build_flow input");
  const AnnihilatorPolynomial relation = q ? *q : minimal_polynomial(a, tol);
  // Reject a bad relation before spending work on its roots.
  require_relation(a, relation, tol);
  Spectrum spectrum = spectrum_of(relation, tol);
  apply_branch_offsets(spectrum, offsets);
  return assemble(a, relation, spectrum, tol);
}

FlowRepresentation build_flow(const Matrix& a, const AnnihilatorPolynomial& q, const Spectrum& spectrum,
                              const ToleranceConfig& tol) {
  tol.validate();
  require_square(a, "build_flow input");
  require_finite(a, "build_flow input");
  spectrum.validate(tol);
  return assemble(a, q, spectrum, tol);
}

Vector mu_functions(const FlowRepresentation& rep, Complex z) {
  return rep.coeffs.mu(eval_basis(rep.basis, z));
}

Matrix evaluate_flow(const FlowRepresentation& rep, Complex z) {
  Matrix out = combine(mu_functions(rep, z), rep.neg_powers);
  require_finite(out, "flow value");
  return out;
}

Vector apply_flow(const FlowRepresentation& rep, Complex z, const Vector& v) {
  if (v.size() != rep.source_dim)
    throw FlowError(ErrorKind::DimensionMismatch, "apply_flow: vector length does not match the matrix");
  std::vector<Vector> images;
  images.reserve(rep.neg_powers.size());
  for (const Matrix& inv_power : rep.neg_powers) images.push_back(inv_power * v);
  return apply_flow(rep, images, z);
}

Vector apply_flow(const FlowRepresentation& rep, std::span<const Vector> images, Complex z) {
  const Vector mu = mu_functions(rep, z);
  Vector out = Vector::Zero(images.front().size());
  for (std::size_t i = 0; i < images.size(); ++i) out += mu(static_cast<Index>(i)) * images[i];
  require_finite(out, "flow value");
  return out;
}

double flow_condition(const FlowRepresentation& rep, Complex z) {
  return static_cast<double>(max_norm(rep.coeffs.inverse)) *
         static_cast<double>(max_norm(eval_basis(rep.basis, z)));
}

Matrix companion_matrix(const AnnihilatorPolynomial& q) {
  const Index p = q.degree();
  Matrix c = shift_matrix(p);
  c.col(0) = q.relation_vector();
  return c;
}

CompanionMu::CompanionMu(AnnihilatorPolynomial q, const ToleranceConfig& tol, const BranchOffsets& offsets)
    : flow_(build_flow(companion_matrix(q), q, tol, offsets)) {
  if (std::abs(q.coeffs()(0)) == 0)
    throw FlowError(ErrorKind::ZeroEigenvalue, "relation has c_0 = 0, so 0 is a root");
  // Repeated solves keep each C^{-k} c backward stable; multiplying c by the
  // stored inverse powers loses several more digits.
  const auto lu = lu_factor(companion_matrix(q), tol.rank_tol);
  Matrix image = q.relation_vector();
  for (Index k = 0; k < q.degree(); ++k) {
    image = lu.solve(image);
    images_.push_back(image);
  }
}

Vector CompanionMu::operator()(Complex z) const { return apply_flow(flow_, images_, z); }

CompanionFlow::CompanionFlow(const Matrix& a, const AnnihilatorPolynomial& q, const ToleranceConfig& tol,
                             const BranchOffsets& offsets)
    : mu_(checked_relation(a, q, tol), tol, offsets),
      neg_powers_(negative_powers(a, q.degree(), tol)) {}

Matrix CompanionFlow::operator()(Complex z) const {
  Matrix out = combine(mu_(z), neg_powers_);
  require_finite(out, "flow value");
  return out;
}

Vector companion_flow_mu(const AnnihilatorPolynomial& q, Complex z, const ToleranceConfig& tol) {
  return CompanionMu(q, tol)(z);
}

Matrix evaluate_companion_flow(const Matrix& a, const AnnihilatorPolynomial& q, Complex z,
                               const ToleranceConfig& tol) {
  return CompanionFlow(a, q, tol)(z);
}

Matrix jordan_block_flow(Complex lambda, Index size, Complex z) {
  if (size < 1) throw FlowError(ErrorKind::InvalidArgument, "Jordan block size must be positive");
  const Complex log_lambda = branch_log(lambda);
  Matrix out = Matrix::Zero(size, size);
  for (Index i = 0; i < size; ++i) {
    const Complex coeff =
        falling_binomial(static_cast<int>(i), z) * std::exp((z - static_cast<double>(i)) * log_lambda);
    out.diagonal(i).setConstant(coeff);
  }
  return out;
}

Matrix jordan_matrix(std::span<const JordanBlockSpec> blocks) {
  Index n = 0;
  for (const auto& b : blocks) n += b.size;
  Matrix j = Matrix::Zero(n, n);
  Index at = 0;
  for (const auto& b : blocks) {
    j.block(at, at, b.size, b.size) = jordan_block(b.lambda, b.size);
    at += b.size;
  }
  return j;
}

Matrix jordan_oracle(std::span<const JordanBlockSpec> blocks, const Matrix& t, Complex z,
                     const ToleranceConfig& tol) {
  require_square(t, "jordan_oracle transform");
  Index n = 0;
  for (const auto& b : blocks) n += b.size;
  if (n != t.rows())
    throw FlowError(ErrorKind::DimensionMismatch, "Jordan block sizes do not add up to the transform size");
  Matrix jz = Matrix::Zero(n, n);
  Index at = 0;
  for (const auto& b : blocks) {
    jz.block(at, at, b.size, b.size) = jordan_block_flow(b.lambda, b.size, z);
    at += b.size;
  }
  return t * jz * lu_factor(t, tol.rank_tol).inverse();
}

Matrix extend_matrix(const Matrix& a, Complex new_root, const Spectrum& spectrum_of_a,
                     const ToleranceConfig& tol) {
  require_square(a, "extend_matrix input");
  const Index n = a.rows();
  Matrix out = Matrix::Zero(n + 1, n + 1);
  out.topLeftCorner(n, n) = a;
  out(n, n) = new_root;

  bool known = false;
  for (const auto& c : spectrum_of_a.clusters)
    if (std::abs(c.lambda - new_root) <= tol.cluster_tol) known = true;
  if (!known) return out;

  // Jordan form: upper bidiagonal, superdiagonal in {0, 1}, equal diagonal inside a block.
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const bool allowed = j == i || j == i + 1;
      if (!allowed && a(i, j) != Complex{0, 0})
        throw FlowError(ErrorKind::NotJordanForm, "extend_matrix: input is not block-diagonal Jordan form");
    }
  Index best_end = -1;
  Index best_size = 0;
  for (Index start = 0; start < n;) {
    Index end = start;
    while (end + 1 < n && a(end, end + 1) != Complex{0, 0}) {
      if (a(end, end + 1) != Complex{1, 0} || a(end + 1, end + 1) != a(start, start))
        throw FlowError(ErrorKind::NotJordanForm, "extend_matrix: superdiagonal entry is not a Jordan coupling");
      ++end;
    }
    const Index size = end - start + 1;
    if (std::abs(a(start, start) - new_root) <= tol.cluster_tol && size >= best_size) {
      best_size = size;
      best_end = end;
    }
    start = end + 1;
  }
  if (best_end < 0)
    throw FlowError(ErrorKind::NotJordanForm,
                    "extend_matrix: new root matches the spectrum but no Jordan block of the input has it");
  out(best_end, n) = 1.0;
  out(n, n) = a(best_end, best_end);
  return out;
}

double companion_action_check(const Matrix& a, const AnnihilatorPolynomial& q, const Vector& coeff_vec,
                              const ToleranceConfig& tol) {
  const Index p = q.degree();
  if (coeff_vec.size() != p)
    throw FlowError(ErrorKind::DimensionMismatch, "coefficient vector length must equal the relation degree");
  const std::vector<Matrix> neg = negative_powers(a, p, tol);
  const Vector image = companion_matrix(q) * coeff_vec;
  const Matrix lhs = a * combine(coeff_vec, neg);
  const Matrix rhs = combine(image, neg);
  double scale = 1.0;
  for (Index i = 0; i < p; ++i) {
    const double m = static_cast<double>(max_norm(neg[static_cast<std::size_t>(i)]));
    scale = std::max({scale, std::abs(coeff_vec(i)) * m, std::abs(q.relation_vector()(i) * coeff_vec(0)) * m});
  }
  return static_cast<double>(max_norm(lhs - rhs)) / scale;
}

FlowAxiomReport check_flow_axioms(const FlowRepresentation& rep, const Matrix& a,
                                  std::span<const std::pair<Complex, Complex>> samples) {
  return check_flow_axioms([&rep](Complex z) { return evaluate_flow(rep, z); }, a, samples);
}

std::vector<std::pair<Complex, Complex>> sample_pairs(std::uint64_t seed, std::size_t count, double radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double kTwoPi = 6.28318530717958647692;
  const auto draw = [&] { return std::polar(radius * std::sqrt(unit(rng)), kTwoPi * unit(rng)); };
  std::vector<std::pair<Complex, Complex>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Complex z = draw();
    out.emplace_back(z, draw());
  }
  return out;
}

}  // namespace cflow
