#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace odcal {

template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using MatrixXd = MatrixX<double>;
using VectorXd = VectorX<double>;
using SparseMatrixXd = Eigen::SparseMatrix<double>;

/// Index of a node, link, sensor or OD pair inside a Network.
using Index = int;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace odcal
