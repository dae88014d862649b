#pragma once

#include "driftcomp/models/common.hpp"

namespace driftcomp {

/// Linear temperature model: drift = o + c_t * t, in physical units, with t the
/// newest temperature of the window.
template <typename Scalar>
struct LsmModel {
  MatrixX<Scalar> c_t = MatrixX<Scalar>::Zero(static_cast<Eigen::Index>(kAxes), 1);
  VectorX<Scalar> o = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(kAxes));

  template <typename F, typename... Ms>
  static void visit(F&& f, Ms&... ms) {
    f("c_t", ms.c_t...);
    f("o", ms.o...);
  }

  void check() const {
    require(c_t.rows() == static_cast<Eigen::Index>(kAxes) && c_t.cols() == 1 &&
                o.size() == static_cast<Eigen::Index>(kAxes),
            ErrorKind::InvalidInput, "LsmModel: expected 6x1 coefficients and 6 offsets");
  }
};

/// Per-axis least-squares fit of drift = o + c_t * t over the newest window
/// temperature of every sample.
template <typename Scalar>
LsmModel<Scalar> lsm_fit(const SupervisedSet& set, Scalar ridge = Scalar(kDefaultRidge)) {
  require(set.size() >= 2, ErrorKind::InvalidInput, "lsm_fit: need at least two samples");
  const auto n = static_cast<Eigen::Index>(set.size());
  MatrixX<Scalar> a(n, 2);
  MatrixX<Scalar> b(n, static_cast<Eigen::Index>(kAxes));
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = Scalar(1);
    a(i, 1) = static_cast<Scalar>(set.inputs[static_cast<std::size_t>(i)].last());
    for (std::size_t ax = 0; ax < kAxes; ++ax) {
      b(i, static_cast<Eigen::Index>(ax)) = set.targets[static_cast<std::size_t>(i)][ax];
    }
  }
  if ((a.col(1).array() == a(0, 1)).all()) {
    fail(ErrorKind::Singularity,
         "lsm_fit: all temperatures are identical, so the temperature coefficient is "
         "unidentifiable (rank 1 of 2)");
  }
  const MatrixX<Scalar> x = solve_least_squares<Scalar>(a, b, ridge);
  LsmModel<Scalar> m;
  m.o = x.row(0).transpose();
  m.c_t = x.row(1).transpose();
  return m;
}

template <typename Scalar>
VectorX<Scalar> lsm_predict_vector(const LsmModel<Scalar>& m, double t_c) {
  return m.o + m.c_t.col(0) * static_cast<Scalar>(t_c);
}

}  // namespace driftcomp
