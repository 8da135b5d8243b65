#pragma once

#include <Eigen/Core>

#include "pbr/batching.hpp"

namespace pbr {

/// Orthonormal factorization of the interference subspace span{x_m, X_m}.
/// The projector onto the orthogonal complement is applied as
/// v - U (U^H v); the Q x Q matrix is never formed.
struct ProjectionBasis {
    int batch_index = 0;
    Eigen::MatrixXcd basis;      ///< Q x rank, orthonormal columns
    int rank = 0;
    bool rank_deficient = false; ///< numerical rank < L+1 was detected
};

/// Rank-revealing QR (column-pivoted) factorization of [x_m, X_m].
/// On rank deficiency, returns the detected-rank basis with a warning flag
/// instead of failing; the threshold is Q * eps * |largest diagonal|.
ProjectionBasis build_basis(const Batch& batch);
ProjectionBasis build_basis(const Eigen::MatrixXcd& interference, int batch_index = 0);

/// v - U (U^H v): the component of v orthogonal to the interference span.
Eigen::VectorXcd project_out(const ProjectionBasis& basis, const Eigen::VectorXcd& v);

}  // namespace pbr
