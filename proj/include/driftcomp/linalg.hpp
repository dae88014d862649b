#pragma once

// Dense linear-algebra kernel. Eigen supplies storage and products; this header
// pins the storage order, adds the finiteness and shape contracts, and provides
// the ridge-regularised normal-equation least-squares solve.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>

#include "driftcomp/error.hpp"

namespace driftcomp {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

inline constexpr double kDefaultRidge = 1e-9;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.derived().array().isFinite().all();
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& x, const std::string& what) {
  require(all_finite(x), ErrorKind::InvalidInput, what + ": non-finite entry");
}

template <typename Scalar>
MatrixX<Scalar> make_matrix(Eigen::Index rows, Eigen::Index cols,
                            std::initializer_list<Scalar> row_major) {
  require(static_cast<Eigen::Index>(row_major.size()) == rows * cols, ErrorKind::InvalidInput,
          "make_matrix: data length does not equal rows x cols");
  MatrixX<Scalar> m(rows, cols);
  std::copy(row_major.begin(), row_major.end(), m.data());
  require_finite(m, "make_matrix");
  return m;
}

template <typename MatDerived, typename VecDerived>
auto mat_vec(const Eigen::MatrixBase<MatDerived>& m, const Eigen::MatrixBase<VecDerived>& v) {
  using Scalar = typename MatDerived::Scalar;
  if (m.cols() != v.rows() || v.cols() != 1) {
    std::ostringstream os;
    os << "mat_vec: matrix is " << m.rows() << "x" << m.cols() << " but vector has length "
       << v.rows();
    fail(ErrorKind::InvalidInput, os.str());
  }
  VectorX<Scalar> out = m * v;
  return out;
}

template <typename LhsDerived, typename RhsDerived>
auto mat_mul(const Eigen::MatrixBase<LhsDerived>& a, const Eigen::MatrixBase<RhsDerived>& b) {
  using Scalar = typename LhsDerived::Scalar;
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "mat_mul: inner dimensions differ (" << a.rows() << "x" << a.cols() << " times "
       << b.rows() << "x" << b.cols() << ")";
    fail(ErrorKind::InvalidInput, os.str());
  }
  MatrixX<Scalar> out = a * b;
  return out;
}

/// Minimises |aX - b|_F^2 + ridge |X|_F^2 through the normal equations
/// (a^T a + ridge I) X = a^T b, factorised with a pivoted LDL^T.
template <typename Scalar>
MatrixX<Scalar> solve_least_squares(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b,
                                    Scalar ridge = Scalar(kDefaultRidge)) {
  if (a.rows() != b.rows()) {
    std::ostringstream os;
    os << "solve_least_squares: a has " << a.rows() << " rows, b has " << b.rows();
    fail(ErrorKind::InvalidInput, os.str());
  }
  require(a.rows() >= a.cols(), ErrorKind::InvalidInput,
          "solve_least_squares: fewer equations than unknowns");
  require(ridge >= Scalar(0) && std::isfinite(ridge), ErrorKind::InvalidInput,
          "solve_least_squares: ridge must be a finite nonnegative number");
  require_finite(a, "solve_least_squares(a)");
  require_finite(b, "solve_least_squares(b)");

  const Eigen::Index n = a.cols();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> normal = a.transpose() * a;
  normal.diagonal().array() += ridge;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rhs = a.transpose() * b;

  const Eigen::LDLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> ldlt(normal);
  const auto d = ldlt.vectorD();
  const Scalar scale = std::max(Scalar(1), normal.diagonal().cwiseAbs().maxCoeff());
  const Scalar tol = scale * Scalar(n) * std::numeric_limits<Scalar>::epsilon() * Scalar(16);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i) > tol) ++rank;
  }
  if (ldlt.info() != Eigen::Success || rank < n) {
    std::ostringstream os;
    os << "solve_least_squares: normal matrix is singular (numerical rank " << rank << " of " << n
       << ", deficiency " << (n - rank) << ")";
    fail(ErrorKind::Singularity, os.str());
  }
  MatrixX<Scalar> x = ldlt.solve(rhs);
  return x;
}

}  // namespace driftcomp
