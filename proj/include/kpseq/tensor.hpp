#ifndef KPSEQ_TENSOR_HPP_
#define KPSEQ_TENSOR_HPP_

#include <string>

#include <Eigen/Core>

#include "kpseq/error.hpp"

namespace kpseq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols)
    throw ShapeError(what + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

}  // namespace kpseq

#endif  // KPSEQ_TENSOR_HPP_
