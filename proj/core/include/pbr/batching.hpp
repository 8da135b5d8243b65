#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "pbr/scene.hpp"

namespace pbr {

/// One batch of surveillance data plus a view into the shared reference
/// stream. The Toeplitz clutter matrix is represented by its generating
/// window in the reference and materialized only on demand.
struct Batch {
    int index = 1;        ///< m, 1-based
    int q_offset = 0;     ///< (m-1)*Q, surveillance index of the first sample
    int batch_len = 0;    ///< Q
    int clutter_order = 0;///< L

    Eigen::VectorXcd surveillance;  ///< y_m, length Q
    std::shared_ptr<const ComplexSeries> reference;  ///< full stream, t0 = -preroll*dt
    int preroll = 0;      ///< reference samples available before n = 0

    double dt() const { return reference->dt; }
    /// x_m: the reference over this batch's sample range.
    Eigen::VectorXcd reference_vector() const;
    /// Column l of the clutter matrix: x at integer lag l (exact shift).
    Eigen::VectorXcd clutter_column(int lag) const;
    /// [x_m, X_m], Q x (L+1). Dense; built only when the projection needs it.
    Eigen::MatrixXcd interference_matrix() const;
};

/// Splits a node record into M non-overlapping batches of Q = floor(N/M)
/// samples; the N - M*Q tail is discarded. Throws std::invalid_argument when
/// L >= Q-1 or the reference lacks L samples of pre-roll.
std::vector<Batch> make_batches(const NodeSignals& node, int n_batches, int clutter_order);

/// x_m(tau): the fractionally delayed reference windowed to batch m, using
/// the same interpolation kernel as the simulator. Integer tau = l*dt
/// reproduces clutter_column(l) exactly. tau must lie within
/// [0, (L + kernel half-width)*dt].
Eigen::VectorXcd delayed_reference(const Batch& batch, double tau);

}  // namespace pbr
