#include "gde/fusion/attention.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "gde/errors.hpp"

namespace gde::fusion {

AttentionMask::AttentionMask(int ws, int hs, int window_radius)
    : ws_(ws), hs_(hs), radius_(window_radius) {
    if (ws < 1 || hs < 1) throw ZeroDimension();
    const int n = ws * hs;
    matrix_.setZero(n, n);
    for (int i = 0; i < n; ++i) {
        const int ri = i / ws, ci = i % ws;
        const int r0 = std::max(0, ri - radius_), r1 = std::min(hs - 1, ri + radius_);
        const int c0 = std::max(0, ci - radius_), c1 = std::min(ws - 1, ci + radius_);
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) matrix_(i, r * ws + c) = 1.0;
        }
    }
}

bool AttentionMask::visible(int i, int j) const {
    const int ri = i / ws_, ci = i % ws_;
    const int rj = j / ws_, cj = j % ws_;
    return std::max(std::abs(ri - rj), std::abs(ci - cj)) <= radius_;
}

Eigen::MatrixXd masked_attention_weights(const Eigen::MatrixXd& scores, const AttentionMask& mask,
                                         MaskMode mode) {
    const Eigen::Index n = scores.rows();
    const Eigen::MatrixXd& m = mask.matrix();
    Eigen::MatrixXd w(n, n);

    if (mode == MaskMode::Multiplicative) {
        // softmax -> elementwise mask -> row renormalization. Masked raw
        // probabilities cancel out of the renormalized ratio, so the exps
        // are stabilized by the unmasked row maximum and evaluated only
        // where the mask keeps them; a dominant masked logit would
        // otherwise underflow every surviving entry.
        for (Eigen::Index i = 0; i < n; ++i) {
            double rowmax = -std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (m(i, j) != 0.0) rowmax = std::max(rowmax, scores(i, j));
            }
            if (!std::isfinite(rowmax)) throw MaskAllZeroRow(static_cast<int>(i));
            double denom = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double e = (m(i, j) != 0.0) ? std::exp(scores(i, j) - rowmax) : 0.0;
                w(i, j) = e;
                denom += e;
            }
            if (denom < 1e-30) throw MaskAllZeroRow(static_cast<int>(i));
            w.row(i) /= denom;
        }
    } else {
        // additive variant: a large negative penalty on masked logits, then
        // one plain softmax over the whole row. Scalar std::exp so the
        // penalized entries underflow to exactly 0 (Eigen's packet exp
        // clamps instead of underflowing).
        constexpr double kMaskPenalty = -1e30;
        for (Eigen::Index i = 0; i < n; ++i) {
            double rowmax = -std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j) {
                const double z = scores(i, j) + (1.0 - m(i, j)) * kMaskPenalty;
                w(i, j) = z;
                rowmax = std::max(rowmax, z);
            }
            if (!(rowmax > kMaskPenalty / 2)) throw MaskAllZeroRow(static_cast<int>(i));
            double denom = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                w(i, j) = std::exp(w(i, j) - rowmax);
                denom += w(i, j);
            }
            if (denom < 1e-30) throw MaskAllZeroRow(static_cast<int>(i));
            w.row(i) /= denom;
        }
    }
    return w;
}

Eigen::MatrixXd masked_attention_backward(const Eigen::MatrixXd& weights,
                                          const Eigen::MatrixXd& d_weights) {
    // Masked softmax Jacobian: dS_ij = W_ij * (dW_ij - sum_k W_ik dW_ik).
    // W is zero at masked entries, so those score gradients vanish exactly.
    const Eigen::VectorXd row_dot = (weights.array() * d_weights.array()).rowwise().sum();
    return weights.array() * (d_weights.colwise() - row_dot).array();
}

}  // namespace gde::fusion
