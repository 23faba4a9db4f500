#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "cflow/flow_engine.hpp"

namespace cflow::testing {

/// A = T J T^{-1} with known Jordan data, so every flow has a reference value.
struct SuiteMatrix {
  std::vector<JordanBlockSpec> blocks;
  Matrix t;
  Matrix a;
  /// Distinct eigenvalues paired with their largest block size.
  std::vector<std::pair<Complex, int>> minimal_roots;
  AnnihilatorPolynomial minimal;
};

inline Complex random_eigenvalue(std::mt19937_64& rng) {
  constexpr double kPi = 3.14159265358979323846;
  std::uniform_real_distribution<double> mag(0.5, 4.0);
  // Stay off the negative real axis: the oracle and the computed spectrum
  // would otherwise be free to land on opposite sides of the branch cut.
  std::uniform_real_distribution<double> ang(-kPi + 0.05, kPi - 0.05);
  return std::polar(mag(rng), ang(rng));
}

inline Matrix random_complex(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

inline double condition_number(const Matrix& t) {
  Eigen::JacobiSVD<Matrix> svd(t);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

/// Transform with 2-norm condition number at most max_cond.
inline Matrix random_transform(std::mt19937_64& rng, Index n, double max_cond = 100.0) {
  for (;;) {
    Matrix t = random_complex(rng, n, n);
    if (condition_number(t) <= max_cond) return t;
  }
}

/// Eigenvalues with |lambda| in [0.5, 4] and pairwise distance >= min_gap.
inline std::vector<Complex> random_spectrum(std::mt19937_64& rng, std::size_t count, double min_gap = 0.3) {
  std::vector<Complex> out;
  while (out.size() < count) {
    const Complex l = random_eigenvalue(rng);
    bool ok = true;
    for (const auto& o : out) ok = ok && std::abs(o - l) >= min_gap;
    if (ok) out.push_back(l);
  }
  return out;
}

inline SuiteMatrix make_suite_matrix(std::mt19937_64& rng, Index n, int max_block = 3) {
  std::uniform_int_distribution<int> block_size(1, max_block);
  std::vector<Index> sizes;
  for (Index left = n; left > 0;) {
    const Index s = std::min<Index>(block_size(rng), left);
    sizes.push_back(s);
    left -= s;
  }
  // Roughly one block in three reuses an earlier eigenvalue, so the minimal
  // polynomial is often a strict divisor of the characteristic one.
  const std::vector<Complex> pool = random_spectrum(rng, sizes.size());
  std::bernoulli_distribution reuse(1.0 / 3.0);
  std::vector<Complex> distinct;
  std::vector<JordanBlockSpec> blocks;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    Complex lambda = pool[b];
    if (!distinct.empty() && reuse(rng)) {
      std::uniform_int_distribution<std::size_t> pick(0, distinct.size() - 1);
      lambda = distinct[pick(rng)];
    } else {
      distinct.push_back(lambda);
    }
    blocks.push_back({lambda, sizes[b]});
  }
  std::vector<std::pair<Complex, int>> minimal_roots;
  std::vector<Complex> roots;
  for (const auto& l : distinct) {
    int largest = 0;
    for (const auto& b : blocks)
      if (b.lambda == l) largest = std::max(largest, static_cast<int>(b.size));
    minimal_roots.emplace_back(l, largest);
    roots.insert(roots.end(), static_cast<std::size_t>(largest), l);
  }
  Matrix t = random_transform(rng, n);
  Matrix a = t * jordan_matrix(blocks) * t.inverse();
  return SuiteMatrix{std::move(blocks), std::move(t), std::move(a), std::move(minimal_roots),
                     AnnihilatorPolynomial::from_roots(roots)};
}

/// `count` matrices with n drawn from 1..8, Jordan blocks of size <= 3.
inline std::vector<SuiteMatrix> make_suite(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> dim(1, 8);
  std::vector<SuiteMatrix> out;
  for (int i = 0; i < count; ++i) out.push_back(make_suite_matrix(rng, dim(rng)));
  return out;
}

}  // namespace cflow::testing
