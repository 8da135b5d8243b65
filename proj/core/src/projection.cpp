#include "pbr/projection.hpp"

#include <Eigen/QR>
#include <limits>
#include <stdexcept>

namespace pbr {

ProjectionBasis build_basis(const Eigen::MatrixXcd& interference, int batch_index) {
    const auto rows = interference.rows();
    const auto cols = interference.cols();
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("build_basis: empty interference matrix");
    if (cols >= rows)
        throw std::invalid_argument("build_basis: interference must be tall (Q > L+1)");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(interference);
    const Eigen::MatrixXcd& qrm = qr.matrixQR();

    // Numerical rank from the pivoted R diagonal.
    const double largest = std::abs(qrm(0, 0));
    const double thresh =
        static_cast<double>(rows) * std::numeric_limits<double>::epsilon() * largest;
    int rank = 0;
    for (Eigen::Index i = 0; i < cols; ++i) {
        if (std::abs(qrm(i, i)) > thresh) ++rank;
        else break;
    }
    if (rank == 0) rank = largest > 0.0 ? 1 : 0;
    if (rank == 0) throw std::invalid_argument("build_basis: zero interference matrix");

    ProjectionBasis basis;
    basis.batch_index = batch_index;
    basis.rank = rank;
    basis.rank_deficient = rank < cols;
    basis.basis = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, rank);
    return basis;
}

ProjectionBasis build_basis(const Batch& batch) {
    return build_basis(batch.interference_matrix(), batch.index);
}

Eigen::VectorXcd project_out(const ProjectionBasis& basis, const Eigen::VectorXcd& v) {
    if (v.size() != basis.basis.rows())
        throw std::invalid_argument("project_out: length mismatch");
    Eigen::VectorXcd coef = basis.basis.adjoint() * v;
    return v - basis.basis * coef;
}

}  // namespace pbr
