#include "cflow/annihilator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cflow/flow_basis.hpp"

namespace cflow {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxSweeps = 500;

// Imaginary parts below this fraction of |lambda| are rounding residue of
// real roots; clearing them keeps negative reals on the +i*pi side of the cut.
constexpr double kRealSnap = 1e-13;

Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

bool spectrum_order(const Cluster& a, const Cluster& b, double tol) {
  const double ra = std::abs(a.lambda);
  const double rb = std::abs(b.lambda);
  if (std::abs(ra - rb) > tol) return ra > rb;
  return std::arg(a.lambda) < std::arg(b.lambda);
}

Complex snap_real(Complex z) {
  if (std::abs(z.imag()) <= kRealSnap * std::abs(z)) return {z.real(), 0.0};
  return z;
}

Spectrum finish_spectrum(std::vector<Cluster> clusters, const ToleranceConfig& tol) {
  for (auto& c : clusters) {
    c.lambda = snap_real(c.lambda);
    if (std::abs(c.lambda) <= tol.cluster_tol)
      throw FlowError(ErrorKind::ZeroEigenvalue,
                      "relation has a root at 0; the matrix is not invertible and has no flow");
    c.log_lambda = branch_log(c.lambda);
  }
  std::stable_sort(clusters.begin(), clusters.end(), [&](const Cluster& a, const Cluster& b) {
    return spectrum_order(a, b, tol.cluster_tol);
  });
  return Spectrum{std::move(clusters)};
}

// Connected components of the graph joining roots closer than cluster_tol.
std::vector<std::vector<Complex>> group_roots(std::span<const Complex> roots, double radius) {
  const std::size_t n = roots.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(roots[i] - roots[j]) <= radius) parent[find(i)] = find(j);

  std::vector<std::vector<Complex>> groups;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == n) {
      slot[r] = groups.size();
      groups.emplace_back();
    }
    groups[slot[r]].push_back(roots[i]);
  }
  return groups;
}

Complex centroid(const std::vector<Complex>& g) {
  Complex s{0, 0};
  for (const auto& z : g) s += z;
  return s / static_cast<double>(g.size());
}

double spread(const std::vector<Complex>& g, Complex c) {
  double r = 0;
  for (const auto& z : g) r = std::max(r, std::abs(z - c));
  return r;
}

// Radius within which an m-fold root of a polynomial whose coefficients carry
// relative noise `noise` scatters: |t_m| r^m = noise * sum |a_k| |c|^k.
double multiple_root_radius(const AnnihilatorPolynomial& q, Complex c, std::size_t m, double noise) {
  const Vector t = q.taylor(c);
  const double lead = std::abs(t(static_cast<Index>(m)));
  const double scale = noise * q.magnitude_bound(std::abs(c));
  if (lead == 0) return std::numeric_limits<double>::infinity();
  return 2.0 * std::pow(scale / lead, 1.0 / static_cast<double>(m));
}

// Newton on the (m-1)-th derivative, which has a simple root at an m-fold root of q.
Complex polish_multiple_root(const AnnihilatorPolynomial& q, Complex start, int m, double radius) {
  Complex z = start;
  for (int it = 0; it < 30; ++it) {
    const Vector t = q.taylor(z);
    const Complex d = static_cast<double>(m) * t(m);
    if (d == Complex{0, 0}) break;
    const Complex step = t(m - 1) / d;
    z -= step;
    if (std::abs(step) <= 4 * kEps * std::max(1.0, std::abs(z))) break;
  }
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z - start) > radius)
    return start;
  return z;
}

// At an m-fold root every Taylor coefficient below order m sits at the noise
// floor of sum |a_k| C(k,j) |c|^(k-j). Two nearby multiple roots fail this at
// their midpoint even when the merged spread looks plausible.
constexpr double kTaylorSlack = 1e3;

bool lower_taylor_vanishes(const AnnihilatorPolynomial& q, Complex c, std::size_t m, double noise) {
  Vector mag = q.monomial().cwiseAbs().cast<Complex>();
  const Vector bound = AnnihilatorPolynomial::from_monomial(mag).taylor(Complex(std::abs(c), 0));
  const Vector t = q.taylor(c);
  for (Index j = 0; j < static_cast<Index>(m); ++j)
    if (std::abs(t(j)) > kTaylorSlack * noise * std::abs(bound(j))) return false;
  return true;
}

}  // namespace

AnnihilatorPolynomial::AnnihilatorPolynomial(Vector coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.size() < 1)
    throw FlowError(ErrorKind::InvalidArgument, "annihilating polynomial must have degree >= 1");
  require_finite(coeffs_, "relation coefficients");
}

AnnihilatorPolynomial AnnihilatorPolynomial::from_relation_vector(const Vector& c) {
  return AnnihilatorPolynomial(c.reverse());
}

AnnihilatorPolynomial AnnihilatorPolynomial::from_monomial(const Vector& a) {
  if (a.size() < 2 || a(a.size() - 1) == Complex{0, 0})
    throw FlowError(ErrorKind::InvalidArgument, "monomial coefficients need a nonzero leading term");
  const Index p = a.size() - 1;
  return AnnihilatorPolynomial(Vector(-a.head(p) / a(p)));
}

AnnihilatorPolynomial AnnihilatorPolynomial::from_roots(std::span<const Complex> roots) {
  Vector a = Vector::Ones(1);
  for (const Complex& r : roots) {
    Vector next = Vector::Zero(a.size() + 1);
    next.tail(a.size()) += a;
    next.head(a.size()) -= r * a;
    a = std::move(next);
  }
  return from_monomial(a);
}

Vector AnnihilatorPolynomial::relation_vector() const { return coeffs_.reverse(); }

Vector AnnihilatorPolynomial::monomial() const {
  Vector a(degree() + 1);
  a.head(degree()) = -coeffs_;
  a(degree()) = 1.0;
  return a;
}

Complex AnnihilatorPolynomial::operator()(Complex x) const {
  const Vector a = monomial();
  Complex acc = a(a.size() - 1);
  for (Index k = a.size() - 2; k >= 0; --k) acc = acc * x + a(k);
  return acc;
}

Vector AnnihilatorPolynomial::taylor(Complex center) const {
  Vector work = monomial();
  const Index p = degree();
  Vector t(p + 1);
  // Repeated synthetic division by (X - center); each remainder is the next Taylor coefficient.
  for (Index k = 0; k <= p; ++k) {
    const Index top = p - k;
    for (Index i = top - 1; i >= 0; --i) work(i) += center * work(i + 1);
    t(k) = work(0);
    for (Index i = 0; i < top; ++i) work(i) = work(i + 1);
  }
  return t;
}

double AnnihilatorPolynomial::magnitude_bound(double r) const {
  const Vector a = monomial();
  double acc = std::abs(a(a.size() - 1));
  for (Index k = a.size() - 2; k >= 0; --k) acc = acc * r + std::abs(a(k));
  return acc;
}

AnnihilatorPolynomial operator*(const AnnihilatorPolynomial& a, const AnnihilatorPolynomial& b) {
  const Vector x = a.monomial();
  const Vector y = b.monomial();
  Vector z = Vector::Zero(x.size() + y.size() - 1);
  for (Index i = 0; i < x.size(); ++i)
    for (Index j = 0; j < y.size(); ++j) z(i + j) += x(i) * y(j);
  return AnnihilatorPolynomial::from_monomial(z);
}

int Spectrum::total_multiplicity() const {
  int total = 0;
  for (const auto& c : clusters) total += c.multiplicity;
  return total;
}

void Spectrum::validate(const ToleranceConfig& tol) const {
  if (clusters.empty()) throw FlowError(ErrorKind::InvalidArgument, "spectrum is empty");
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const Cluster& c = clusters[i];
    if (c.multiplicity < 1)
      throw FlowError(ErrorKind::InvalidArgument, "cluster multiplicity must be positive");
    if (std::abs(c.lambda) <= tol.cluster_tol)
      throw FlowError(ErrorKind::ZeroEigenvalue, "spectrum contains the eigenvalue 0");
    if (std::abs(std::exp(c.log_lambda) - c.lambda) > 1e-12 * std::abs(c.lambda) * std::max(1.0, std::abs(c.log_lambda)))
      throw FlowError(ErrorKind::InvalidArgument, "cluster logarithm does not exponentiate to its eigenvalue");
    for (std::size_t j = i + 1; j < clusters.size(); ++j)
      if (std::abs(c.lambda - clusters[j].lambda) <= tol.cluster_tol)
        throw FlowError(ErrorKind::InvalidArgument, "spectrum clusters are not distinct");
  }
}

AnnihilatorPolynomial minimal_polynomial(const Matrix& a, const ToleranceConfig& tol) {
  require_square(a, "minimal_polynomial input");
  require_finite(a, "minimal_polynomial input");
  const Index n = a.rows();
  const Index len = n * n;

  Matrix scaled(len, n + 1);  // flattened powers, each normalized
  Matrix ortho(len, n + 1);   // orthonormal basis of their span
  std::vector<double> norms;
  Matrix power = Matrix::Identity(n, n);
  Index degree = -1;

  for (Index k = 0; k <= n; ++k) {
    if (k > 0) power = power * a;
    const Vector v = flatten(power);
    const double nv = v.norm();
    if (nv == 0) {
      degree = k;
      norms.push_back(0);
      break;
    }
    norms.push_back(nv);
    scaled.col(k) = v / nv;

    Vector r = scaled.col(k);
    for (int pass = 0; pass < 2; ++pass)
      for (Index j = 0; j < k; ++j) r -= ortho.col(j) * ortho.col(j).dot(r);
    const double ratio = r.norm();

    if (ratio > tol.rank_tol / 10 && ratio <= tol.rank_tol * 10)
      throw FlowError(ErrorKind::AmbiguousRank,
                      "minimal polynomial degree is unreliable: dependence ratio " +
                          std::to_string(ratio) + " at power " + std::to_string(k) +
                          " is within a factor 10 of rank_tol");
    if (ratio <= tol.rank_tol) {
      degree = k;
      break;
    }
    ortho.col(k) = r / ratio;
  }

  if (degree < 0)
    throw FlowError(ErrorKind::AmbiguousRank,
                    "no linear dependence among I, A, ..., A^n at rank_tol; powers are too ill-conditioned");
  if (degree == 0)
    throw FlowError(ErrorKind::AmbiguousRank, "identity flattened to a zero vector");

  Vector c = Vector::Zero(degree);
  if (norms.back() != 0) {
    const Matrix lhs = scaled.leftCols(degree);
    const Vector rhs = scaled.col(degree);
    const auto qr = lhs.colPivHouseholderQr();
    Vector x = qr.solve(rhs);
    x += qr.solve(Vector(rhs - lhs * x));  // one refinement step
    for (Index k = 0; k < degree; ++k) c(k) = x(k) * norms[degree] / norms[k];
  }
  AnnihilatorPolynomial q(c);
  const double residual = validate_relation(a, q);
  if (!(residual <= tol.residual_tol))
    throw FlowError(ErrorKind::AmbiguousRank,
                    "minimal polynomial of degree " + std::to_string(degree) +
                        " has residual " + std::to_string(residual) + " above residual_tol");
  return q;
}

AnnihilatorPolynomial characteristic_polynomial(const Matrix& a) {
  require_square(a, "characteristic_polynomial input");
  const Index n = a.rows();
  Vector mono = Vector::Zero(n + 1);
  mono(n) = 1.0;
  Matrix m = Matrix::Zero(n, n);
  const Matrix id = Matrix::Identity(n, n);
  for (Index k = 1; k <= n; ++k) {
    m = a * m + mono(n - k + 1) * id;
    mono(n - k) = -(a * m).trace() / static_cast<double>(k);
  }
  return AnnihilatorPolynomial::from_monomial(mono);
}

double validate_relation(const Matrix& a, const AnnihilatorPolynomial& q) {
  require_square(a, "validate_relation input");
  const Index p = q.degree();
  Matrix power = Matrix::Identity(a.rows(), a.cols());
  Matrix combo = Matrix::Zero(a.rows(), a.cols());
  for (Index i = 0; i < p; ++i) {
    combo += q.coeffs()(i) * power;
    power = power * a;
  }
  const double scale = std::max(1.0, std::pow(static_cast<double>(max_norm(a)), static_cast<double>(p)));
  return static_cast<double>(max_norm(power - combo)) / scale;
}

void require_relation(const Matrix& a, const AnnihilatorPolynomial& q, const ToleranceConfig& tol) {
  const double residual = validate_relation(a, q);
  if (!(residual <= tol.residual_tol))
    throw FlowError(ErrorKind::RelationInvalid,
                    "relation does not annihilate the matrix: residual " + std::to_string(residual) +
                        " exceeds residual_tol " + std::to_string(tol.residual_tol));
}

RootSet find_roots(const AnnihilatorPolynomial& q, const ToleranceConfig& tol) {
  const Vector a = q.monomial();
  const Index p = q.degree();
  const double radius = 1.0 + q.coeffs().cwiseAbs().maxCoeff();
  constexpr double kPi = 3.14159265358979323846;
  constexpr double kPhase = 0.4;  // keeps the start circle off the real axis

  std::vector<Complex> z(static_cast<std::size_t>(p));
  for (Index k = 0; k < p; ++k)
    z[static_cast<std::size_t>(k)] = std::polar(radius, 2 * kPi * static_cast<double>(k) / static_cast<double>(p) + kPhase);

  std::vector<bool> done(z.size(), false);
  const auto horner = [&](Complex x, Complex& value, Complex& deriv) {
    value = a(p);
    deriv = 0;
    for (Index k = p - 1; k >= 0; --k) {
      deriv = deriv * x + value;
      value = value * x + a(k);
    }
  };

  RootSet out;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    bool all_done = true;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (done[k]) continue;
      Complex value, deriv;
      horner(z[k], value, deriv);
      const double noise = 2.0 * kEps * q.magnitude_bound(std::abs(z[k]));
      if (std::abs(value) <= noise) {
        done[k] = true;
        continue;
      }
      Complex repulsion{0, 0};
      for (std::size_t j = 0; j < z.size(); ++j)
        if (j != k) repulsion += 1.0 / (z[k] - z[j]);
      const Complex denom = deriv - value * repulsion;
      if (denom == Complex{0, 0} || !std::isfinite(std::abs(repulsion))) {
        z[k] *= Complex(1.0, 1e-7);
        all_done = false;
        continue;
      }
      const Complex step = value / denom;
      z[k] -= step;
      if (std::abs(step) <= tol.root_tol * std::max(1.0, std::abs(z[k])))
        done[k] = true;
      else
        all_done = false;
    }
    if (all_done) break;
  }
  if (sweep >= kMaxSweeps)
    throw FlowError(ErrorKind::NonConvergence,
                    "root finder did not converge within " + std::to_string(kMaxSweeps) + " sweeps");

  out.roots = std::move(z);
  out.sweeps = sweep + 1;
  for (const auto& r : out.roots) out.residuals.push_back(std::abs(q(r)));
  return out;
}

Spectrum cluster_roots(std::span<const Complex> roots, const ToleranceConfig& tol) {
  if (roots.empty()) throw FlowError(ErrorKind::InvalidArgument, "cluster_roots: no roots given");
  for (const auto& r : roots)
    if (std::abs(r) <= tol.cluster_tol)
      throw FlowError(ErrorKind::ZeroEigenvalue,
                      "root within cluster_tol of 0; the matrix is not invertible and has no flow");
  std::vector<Cluster> clusters;
  for (const auto& g : group_roots(roots, tol.cluster_tol))
    clusters.push_back(Cluster{centroid(g), static_cast<int>(g.size()), {}});
  return finish_spectrum(std::move(clusters), tol);
}

Spectrum cluster_roots(std::span<const Complex> roots, const AnnihilatorPolynomial& q,
                       const ToleranceConfig& tol) {
  if (roots.empty()) throw FlowError(ErrorKind::InvalidArgument, "cluster_roots: no roots given");
  for (const auto& r : roots)
    if (std::abs(r) <= tol.cluster_tol)
      throw FlowError(ErrorKind::ZeroEigenvalue,
                      "root within cluster_tol of 0; the matrix is not invertible and has no flow");

  auto groups = group_roots(roots, tol.cluster_tol);
  // Merge the closest pair of groups that together form one numerically multiple root.
  for (bool merged = true; merged && groups.size() > 1;) {
    merged = false;
    std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> pairs;
    for (std::size_t i = 0; i < groups.size(); ++i)
      for (std::size_t j = i + 1; j < groups.size(); ++j)
        pairs.push_back({std::abs(centroid(groups[i]) - centroid(groups[j])), {i, j}});
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [dist, ij] : pairs) {
      std::vector<Complex> joined = groups[ij.first];
      joined.insert(joined.end(), groups[ij.second].begin(), groups[ij.second].end());
      const Complex c = centroid(joined);
      const double radius = multiple_root_radius(q, c, joined.size(), tol.multiplicity_tol);
      if (spread(joined, c) <= radius &&
          lower_taylor_vanishes(q, polish_multiple_root(q, c, static_cast<int>(joined.size()), radius), joined.size(),
                                tol.multiplicity_tol)) {
        groups[ij.first] = std::move(joined);
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(ij.second));
        merged = true;
        break;
      }
    }
  }

  std::vector<Cluster> clusters;
  for (const auto& g : groups) {
    const int m = static_cast<int>(g.size());
    Complex rep = centroid(g);
    if (m > 1) {
      const double radius = std::max(spread(g, rep), tol.cluster_tol);
      rep = polish_multiple_root(q, rep, m, radius);
    }
    clusters.push_back(Cluster{rep, m, {}});
  }
  return finish_spectrum(std::move(clusters), tol);
}

Spectrum spectrum_of(const AnnihilatorPolynomial& q, const ToleranceConfig& tol) {
  if (std::abs(q.coeffs()(0)) == 0)
    throw FlowError(ErrorKind::ZeroEigenvalue, "relation has c_0 = 0, so 0 is a root");
  const RootSet roots = find_roots(q, tol);
  return cluster_roots(roots.roots, q, tol);
}

Spectrum make_spectrum(std::span<const std::pair<Complex, int>> roots, const ToleranceConfig& tol) {
  std::vector<Cluster> clusters;
  for (const auto& [lambda, m] : roots) clusters.push_back(Cluster{lambda, m, {}});
  Spectrum s = finish_spectrum(std::move(clusters), tol);
  s.validate(tol);
  return s;
}

}  // namespace cflow
