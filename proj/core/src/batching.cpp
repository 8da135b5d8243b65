#include "pbr/batching.hpp"

#include <cmath>
#include <stdexcept>

namespace pbr {

namespace {

// Reference-array index of surveillance sample n.
inline std::ptrdiff_t ref_index(const Batch& b, std::ptrdiff_t n) { return n + b.preroll; }

}  // namespace

Eigen::VectorXcd Batch::reference_vector() const {
    Eigen::VectorXcd x(batch_len);
    for (int q = 0; q < batch_len; ++q)
        x[q] = reference->samples[static_cast<std::size_t>(ref_index(*this, q_offset + q))];
    return x;
}

Eigen::VectorXcd Batch::clutter_column(int lag) const {
    if (lag < 1 || lag > clutter_order)
        throw std::invalid_argument("Batch::clutter_column: lag outside [1, L]");
    Eigen::VectorXcd col(batch_len);
    for (int q = 0; q < batch_len; ++q)
        col[q] = reference->samples[static_cast<std::size_t>(ref_index(*this, q_offset + q - lag))];
    return col;
}

Eigen::MatrixXcd Batch::interference_matrix() const {
    Eigen::MatrixXcd m(batch_len, clutter_order + 1);
    m.col(0) = reference_vector();
    for (int lag = 1; lag <= clutter_order; ++lag) m.col(lag) = clutter_column(lag);
    return m;
}

std::vector<Batch> make_batches(const NodeSignals& node, int n_batches, int clutter_order) {
    if (n_batches < 1) throw std::invalid_argument("make_batches: M must be >= 1");
    if (clutter_order < 0) throw std::invalid_argument("make_batches: L must be >= 0");
    const int n = static_cast<int>(node.surveillance.size());
    const int q = n / n_batches;  // floor rule; the tail is discarded
    if (clutter_order >= q - 1)
        throw std::invalid_argument("make_batches: requires L < Q-1");

    const int preroll = static_cast<int>(std::llround(-node.reference.t0 / node.reference.dt));
    if (preroll < clutter_order)
        throw std::invalid_argument("make_batches: reference lacks L samples of pre-roll");
    if (static_cast<int>(node.reference.size()) < preroll + n_batches * q)
        throw std::invalid_argument("make_batches: reference shorter than the batched record");

    auto ref = std::make_shared<ComplexSeries>(node.reference);
    std::vector<Batch> batches;
    batches.reserve(static_cast<std::size_t>(n_batches));
    for (int m = 1; m <= n_batches; ++m) {
        Batch b;
        b.index = m;
        b.q_offset = (m - 1) * q;
        b.batch_len = q;
        b.clutter_order = clutter_order;
        b.reference = ref;
        b.preroll = preroll;
        b.surveillance.resize(q);
        for (int i = 0; i < q; ++i)
            b.surveillance[i] = node.surveillance.samples[static_cast<std::size_t>(b.q_offset + i)];
        batches.push_back(std::move(b));
    }
    return batches;
}

Eigen::VectorXcd delayed_reference(const Batch& batch, double tau) {
    const double dt = batch.dt();
    const double tau_max = (batch.clutter_order + kKernelHalfWidth) * dt;
    if (tau < 0.0 || tau > tau_max)
        throw std::invalid_argument("delayed_reference: tau outside [0, (L + kernel half-width)*dt]");
    const auto vals = delayed_window(*batch.reference, tau,
                                     ref_index(batch, batch.q_offset),
                                     static_cast<std::size_t>(batch.batch_len));
    return Eigen::Map<const Eigen::VectorXcd>(vals.data(), batch.batch_len);
}

}  // namespace pbr
