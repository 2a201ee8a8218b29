#pragma once

#include <vector>

#include "gde/fusion/attention.hpp"
#include "gde/fusion/feature_map.hpp"

namespace gde::fusion {

// Large enough that a degenerate row (all channels equal, which 2-channel
// maps hit routinely) keeps inv_std <= 10 and the backward pass stays
// friendly to finite-difference validation.
inline constexpr double kLayerNormEpsilon = 1e-2;

// Every parameter is stored as a column-vector or matrix of doubles so the
// checkpoint writer, the optimizer and the finite-difference harness can
// treat them uniformly.
struct LayerNormParams {
    Eigen::MatrixXd gamma;  // C x 1
    Eigen::MatrixXd beta;   // C x 1
};

struct AttentionParams {
    Eigen::MatrixXd wq, wk, wv;  // C x C
};

struct CrossAttentionParams {
    Eigen::MatrixXd wq, wk;          // C x C
    Eigen::MatrixXd wv_enc, wv_dec;  // C x C value projections for both sources
    Eigen::MatrixXd w_out;           // 2C x C, applied after channel concat
};

/// 3x3 same-padding convolution. Kernel rows index the output channel;
/// columns follow tap = ((dy+1)*3 + (dx+1))*C_in + ci with dy down, dx right.
struct ConvParams {
    Eigen::MatrixXd w;  // C_out x 9*C_in
    Eigen::MatrixXd b;  // C_out x 1
};

struct EncoderLayerParams {
    LayerNormParams ln1;
    AttentionParams attn;
    LayerNormParams ln2;
    ConvParams conv1, conv2;
};

struct DecoderLayerParams {
    LayerNormParams ln1;
    AttentionParams self_attn;
    LayerNormParams ln2;
    CrossAttentionParams cross;
    LayerNormParams ln3;
    ConvParams conv1, conv2;
};

// ---- primitive forward/backward ----

struct LayerNormCache {
    Eigen::MatrixXd xhat;     // N x C
    Eigen::VectorXd inv_std;  // N
};

Eigen::MatrixXd layer_norm_forward(const Eigen::MatrixXd& x, const LayerNormParams& p,
                                   LayerNormCache* cache);
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy, const LayerNormParams& p,
                                    const LayerNormCache& cache, LayerNormParams& grad);

Eigen::MatrixXd conv3x3_forward(const Eigen::MatrixXd& x, int ws, int hs, const ConvParams& p);
/// Returns dL/dx and accumulates kernel/bias gradients into `grad`.
Eigen::MatrixXd conv3x3_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x, int ws,
                                 int hs, const ConvParams& p, ConvParams& grad);

// ---- sublayers (pre-norm + residual) ----

struct SelfAttentionCache {
    LayerNormCache ln;
    Eigen::MatrixXd xn, q, k, v;
    std::vector<Eigen::MatrixXd> head_weights;
};

Eigen::MatrixXd self_attention_forward(const Eigen::MatrixXd& x, const LayerNormParams& ln,
                                       const AttentionParams& p, const AttentionMask& mask,
                                       MaskMode mode, int heads, SelfAttentionCache* cache);
Eigen::MatrixXd self_attention_backward(const Eigen::MatrixXd& dout, const LayerNormParams& ln,
                                        const AttentionParams& p, int heads,
                                        const SelfAttentionCache& cache, LayerNormParams& ln_grad,
                                        AttentionParams& grad);

struct CrossAttentionCache {
    LayerNormCache ln;
    Eigen::MatrixXd qn, q, k, ve, vd, concat;
    std::vector<Eigen::MatrixXd> head_weights;
};

Eigen::MatrixXd cross_attention_forward(const Eigen::MatrixXd& q_in, const Eigen::MatrixXd& enc,
                                        const LayerNormParams& ln, const CrossAttentionParams& p,
                                        const AttentionMask& mask, MaskMode mode, int heads,
                                        CrossAttentionCache* cache);
/// Returns dL/dq_in; adds the encoder-path gradient into `d_enc`.
Eigen::MatrixXd cross_attention_backward(const Eigen::MatrixXd& dout, const Eigen::MatrixXd& enc,
                                         const LayerNormParams& ln, const CrossAttentionParams& p,
                                         int heads, const CrossAttentionCache& cache,
                                         Eigen::MatrixXd& d_enc, LayerNormParams& ln_grad,
                                         CrossAttentionParams& grad);

struct ConvFfnCache {
    LayerNormCache ln;
    Eigen::MatrixXd xn, h1, a;
};

Eigen::MatrixXd conv_ffn_forward(const Eigen::MatrixXd& x, int ws, int hs,
                                 const LayerNormParams& ln, const ConvParams& conv1,
                                 const ConvParams& conv2, ConvFfnCache* cache);
Eigen::MatrixXd conv_ffn_backward(const Eigen::MatrixXd& dout, int ws, int hs,
                                  const LayerNormParams& ln, const ConvParams& conv1,
                                  const ConvParams& conv2, const ConvFfnCache& cache,
                                  LayerNormParams& ln_grad, ConvParams& conv1_grad,
                                  ConvParams& conv2_grad);

// ---- standalone sublayer wrappers on feature maps ----

/// Pre-norm masked self-attention sublayer with residual.
FeatureMap masked_self_attention(const FeatureMap& x, const LayerNormParams& ln,
                                 const AttentionParams& p, const AttentionMask& mask,
                                 MaskMode mode = MaskMode::Multiplicative, int heads = 1);

/// Pre-norm convolutional FFN sublayer (two 3x3 convolutions with a ReLU
/// between) with residual.
FeatureMap conv_ffn(const FeatureMap& x, const LayerNormParams& ln, const ConvParams& conv1,
                    const ConvParams& conv2);

}  // namespace gde::fusion
