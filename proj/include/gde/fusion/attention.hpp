#pragma once

#include <Eigen/Dense>

namespace gde::fusion {

enum class MaskMode {
    /// Literal reading: full softmax, elementwise mask multiply, then
    /// row renormalization so every row stays a convex combination.
    Multiplicative,
    /// Additive -inf logits on masked entries before the softmax.
    /// Mathematically identical to Multiplicative after renormalization.
    Additive,
};

/// Binary visibility window on a 2D feature grid: position i attends to j
/// iff their Chebyshev distance is at most window_radius. Symmetric, with
/// every position visible to itself.
class AttentionMask {
public:
    AttentionMask(int ws, int hs, int window_radius);

    int ws() const { return ws_; }
    int hs() const { return hs_; }
    int window_radius() const { return radius_; }
    bool visible(int i, int j) const;

    /// Dense N x N 0/1 matrix.
    const Eigen::MatrixXd& matrix() const { return matrix_; }

private:
    int ws_;
    int hs_;
    int radius_;
    Eigen::MatrixXd matrix_;
};

/// Row-stochastic masked attention weights from raw scores S (N x N).
/// Masked entries are exactly 0; every row sums to 1. Throws MaskAllZeroRow
/// if a renormalization denominator underflows (cannot happen while the
/// diagonal is visible).
Eigen::MatrixXd masked_attention_weights(const Eigen::MatrixXd& scores, const AttentionMask& mask,
                                         MaskMode mode);

/// Backward through masked_attention_weights: given the forward weights W
/// and dL/dW, returns dL/dS. Gradients at masked score entries are exactly
/// zero.
Eigen::MatrixXd masked_attention_backward(const Eigen::MatrixXd& weights,
                                          const Eigen::MatrixXd& d_weights);

}  // namespace gde::fusion
