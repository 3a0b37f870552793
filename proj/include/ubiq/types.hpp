#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace ubiq {

using Index = Eigen::Index;

// A single H×W image plane. Row-major so the memory layout matches C-order NPY tensors.
template <typename Scalar>
using PlaneT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Plane = PlaneT<double>;

template <typename A, typename B>
bool same_shape(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

// Worker count for pixel-parallel loops, from UBIQ_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

}  // namespace ubiq
