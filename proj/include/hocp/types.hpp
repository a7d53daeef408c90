#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <limits>

namespace hocp {

using Index = Eigen::Index;

template <typename Scalar>
using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vec = VecT<double>;
using Mat = Eigen::MatrixXd;

// Row-major: Jacobians and MIL rows are assembled and scanned row by row.
using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace hocp
