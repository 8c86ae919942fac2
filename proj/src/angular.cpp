#include "rotorgrating/error.hpp"
#include "rotorgrating/rotor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace rotorgrating {
namespace {

long double log_factorial(int n) { return std::lgamma(static_cast<long double>(n) + 1.0L); }

bool triangle(int a, int b, int c) { return c >= std::abs(a - b) && c <= a + b; }

void require_block_m(const BasisSpec& basis, int m) {
  if (basis.j_max < 2) throw ConfigError("basis j_max must be at least 2");
  if (std::abs(m) > basis.j_max)
    throw ConfigError("|M| = " + std::to_string(std::abs(m)) + " exceeds j_max = " +
                      std::to_string(basis.j_max));
}

// Full-basis matrix elements of cos^2(theta) and sin^2(theta) e^{+-2i phi}
// from the Gaunt coefficient of Y_{2q}.
double cos2z_element(int jp, int mp, int j, int m) {
  if (mp != m) return 0.0;
  double value = (jp == j) ? 1.0 / 3.0 : 0.0;
  value += (2.0 / 3.0) * std::sqrt((2.0 * j + 1.0) / (2.0 * jp + 1.0)) *
           clebsch_gordan(j, 0, 2, 0, jp, 0) * clebsch_gordan(j, m, 2, 0, jp, m);
  return value;
}

double sin2_exp2phi_element(int jp, int mp, int j, int m, int q) {
  if (mp != m + q) return 0.0;
  return std::sqrt(8.0 / 3.0) * std::sqrt((2.0 * j + 1.0) / (2.0 * jp + 1.0)) *
         clebsch_gordan(j, 0, 2, 0, jp, 0) * clebsch_gordan(j, m, 2, q, jp, mp);
}

double full_element(Axis axis, int jp, int mp, int j, int m) {
  if (axis == Axis::z) return cos2z_element(jp, mp, j, m);
  const double identity = (jp == j && mp == m) ? 1.0 : 0.0;
  const double sin2 = identity - cos2z_element(jp, mp, j, m);
  const double cos2phi_part =
      0.25 * (sin2_exp2phi_element(jp, mp, j, m, 2) + sin2_exp2phi_element(jp, mp, j, m, -2));
  return axis == Axis::x ? 0.5 * sin2 + cos2phi_part : 0.5 * sin2 - cos2phi_part;
}

}  // namespace

double clebsch_gordan(int j1, int m1, int j2, int m2, int j, int m) {
  if (m1 + m2 != m) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m) > j) return 0.0;
  if (!triangle(j1, j2, j)) return 0.0;

  const long double log_delta =
      0.5L * (log_factorial(j1 + j2 - j) + log_factorial(j1 - j2 + j) + log_factorial(-j1 + j2 + j) -
              log_factorial(j1 + j2 + j + 1));
  const long double log_norm =
      0.5L * (log_factorial(j1 + m1) + log_factorial(j1 - m1) + log_factorial(j2 + m2) +
              log_factorial(j2 - m2) + log_factorial(j + m) + log_factorial(j - m));

  const int k_min = std::max({0, j2 - j - m1, j1 + m2 - j});
  const int k_max = std::min({j1 + j2 - j, j1 - m1, j2 + m2});
  long double sum = 0.0L;
  for (int k = k_min; k <= k_max; ++k) {
    const long double log_den = log_factorial(k) + log_factorial(j1 + j2 - j - k) +
                                log_factorial(j1 - m1 - k) + log_factorial(j2 + m2 - k) +
                                log_factorial(j - j2 + m1 + k) + log_factorial(j - j1 - m2 + k);
    const long double term = std::exp(log_delta + log_norm - log_den);
    sum += (k % 2 == 0) ? term : -term;
  }
  return static_cast<double>(std::sqrt(2.0L * j + 1.0L) * sum);
}

double cos2_diagonal_element(int j, int m) {
  const double jj = j;
  return 1.0 / 3.0 + (2.0 / 3.0) * (jj * (jj + 1.0) - 3.0 * m * m) /
                         ((2.0 * jj - 1.0) * (2.0 * jj + 3.0));
}

double cos2_coupling_element(int j, int m) {
  const double jj = j;
  const double mm = static_cast<double>(m) * m;
  const double num = ((jj + 1.0) * (jj + 1.0) - mm) * ((jj + 2.0) * (jj + 2.0) - mm);
  const double den = (2.0 * jj + 1.0) * (2.0 * jj + 3.0) * (2.0 * jj + 3.0) * (2.0 * jj + 5.0);
  return std::sqrt(num / den);
}

Cos2Block::Cos2Block(int m, int j_max) : m_(m), j_min_(std::abs(m)), j_max_(j_max) {
  require_block_m(BasisSpec{j_max}, m);
  const auto n = static_cast<std::size_t>(j_max_ - j_min_ + 1);
  diagonal_.resize(n);
  coupling_.assign(n, 0.0);
  for (int j = j_min_; j <= j_max_; ++j) {
    const auto i = static_cast<std::size_t>(j - j_min_);
    diagonal_[i] = cos2_diagonal_element(j, m_);
    if (j + 2 <= j_max_) coupling_[i] = cos2_coupling_element(j, m_);
  }
}

double Cos2Block::coupling(int j) const {
  if (j < j_min_ || j + 2 > j_max_) return 0.0;
  return coupling_[static_cast<std::size_t>(j - j_min_)];
}

Eigen::MatrixXd Cos2Block::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = diagonal_[static_cast<std::size_t>(i)];
    if (i + 2 < n) {
      a(i, i + 2) = coupling_[static_cast<std::size_t>(i)];
      a(i + 2, i) = a(i, i + 2);
    }
  }
  return a;
}

Cos2Block cos2theta_matrix(const BasisSpec& basis, int m) { return Cos2Block(m, basis.j_max); }

int FullBasis::j_of(std::size_t i) const {
  int j = static_cast<int>(std::sqrt(static_cast<double>(i)));
  while (j * j > static_cast<int>(i)) --j;
  while ((j + 1) * (j + 1) <= static_cast<int>(i)) ++j;
  return j;
}

SparseOperator cos2theta_matrix_full(const BasisSpec& basis, Axis axis) {
  if (basis.j_max < 2) throw ConfigError("basis j_max must be at least 2");
  const FullBasis full(basis.j_max);
  const auto n = static_cast<Eigen::Index>(full.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(full.size() * (axis == Axis::z ? 3 : 9));
  // Elements are evaluated once per unordered pair and mirrored, which makes
  // the operator exactly symmetric.
  for (int j = 0; j <= basis.j_max; ++j) {
    for (int m = -j; m <= j; ++m) {
      const auto col = full.index(j, m);
      for (int jp = j; jp <= std::min(j + 2, basis.j_max); jp += 2) {
        for (int mp = m - 2; mp <= m + 2; mp += 2) {
          if (std::abs(mp) > jp) continue;
          const auto row = full.index(jp, mp);
          if (row < col) continue;
          if (axis == Axis::z && mp != m) continue;
          const double value = full_element(axis, jp, mp, j, m);
          if (value == 0.0) continue;
          triplets.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), value);
          if (row != col)
            triplets.emplace_back(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(row), value);
        }
      }
    }
  }
  SparseOperator op(n, n);
  op.setFromTriplets(triplets.begin(), triplets.end());
  op.makeCompressed();
  return op;
}

SparseOperator cos2theta_x_matrix(const BasisSpec& basis) { return cos2theta_matrix_full(basis, Axis::x); }
SparseOperator cos2theta_y_matrix(const BasisSpec& basis) { return cos2theta_matrix_full(basis, Axis::y); }
SparseOperator cos2theta_z_matrix(const BasisSpec& basis) { return cos2theta_matrix_full(basis, Axis::z); }

}  // namespace rotorgrating
