#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gde/fusion/layers.hpp"
#include "gde/ground_depth.hpp"

namespace gde::fusion {

struct FusionConfig {
    int channels = 4;
    int heads = 1;
    int encoder_layers = 2;
    int decoder_layers = 2;
    int window_radius = 8;
    MaskMode mask_mode = MaskMode::Multiplicative;
};

/// All trainable state. `visit` enumerates every parameter matrix in a
/// fixed order shared by the optimizer, the checkpoint format and the
/// finite-difference harness.
struct FusionWeights {
    std::vector<EncoderLayerParams> encoder;
    std::vector<DecoderLayerParams> decoder;
    Eigen::MatrixXd embed_w, embed_b;  // C x 1: scalar ground depth -> C query channels
    Eigen::MatrixXd head_w, head_b;    // C x 1 and 1 x 1 depth-regression readout

    template <typename Self, typename Fn>
    static void visit_impl(Self& self, Fn&& fn) {
        for (size_t l = 0; l < self.encoder.size(); ++l) {
            auto& e = self.encoder[l];
            const std::string p = "enc" + std::to_string(l) + ".";
            fn(p + "ln1.gamma", e.ln1.gamma);
            fn(p + "ln1.beta", e.ln1.beta);
            fn(p + "attn.wq", e.attn.wq);
            fn(p + "attn.wk", e.attn.wk);
            fn(p + "attn.wv", e.attn.wv);
            fn(p + "ln2.gamma", e.ln2.gamma);
            fn(p + "ln2.beta", e.ln2.beta);
            fn(p + "conv1.w", e.conv1.w);
            fn(p + "conv1.b", e.conv1.b);
            fn(p + "conv2.w", e.conv2.w);
            fn(p + "conv2.b", e.conv2.b);
        }
        for (size_t l = 0; l < self.decoder.size(); ++l) {
            auto& d = self.decoder[l];
            const std::string p = "dec" + std::to_string(l) + ".";
            fn(p + "ln1.gamma", d.ln1.gamma);
            fn(p + "ln1.beta", d.ln1.beta);
            fn(p + "self.wq", d.self_attn.wq);
            fn(p + "self.wk", d.self_attn.wk);
            fn(p + "self.wv", d.self_attn.wv);
            fn(p + "ln2.gamma", d.ln2.gamma);
            fn(p + "ln2.beta", d.ln2.beta);
            fn(p + "cross.wq", d.cross.wq);
            fn(p + "cross.wk", d.cross.wk);
            fn(p + "cross.wv_enc", d.cross.wv_enc);
            fn(p + "cross.wv_dec", d.cross.wv_dec);
            fn(p + "cross.w_out", d.cross.w_out);
            fn(p + "ln3.gamma", d.ln3.gamma);
            fn(p + "ln3.beta", d.ln3.beta);
            fn(p + "conv1.w", d.conv1.w);
            fn(p + "conv1.b", d.conv1.b);
            fn(p + "conv2.w", d.conv2.w);
            fn(p + "conv2.b", d.conv2.b);
        }
        fn("embed.w", self.embed_w);
        fn("embed.b", self.embed_b);
        fn("head.w", self.head_w);
        fn("head.b", self.head_b);
    }

    template <typename Fn>
    void visit(Fn&& fn) {
        visit_impl(*this, fn);
    }
    template <typename Fn>
    void visit(Fn&& fn) const {
        visit_impl(*this, fn);
    }
};

/// Zero-valued weights with the shapes implied by the config.
FusionWeights zero_weights(const FusionConfig& cfg);

/// Deterministic random initialization (layer norms at identity).
FusionWeights init_weights(const FusionConfig& cfg, uint64_t seed);

// ---- forward-only surface ----

/// Encoder: adds the position encoding, then L x (masked self-attention ->
/// convolutional FFN).
FeatureMap encode(const FeatureMap& img, const FeatureMap& pe,
                  const std::vector<EncoderLayerParams>& layers, const AttentionMask& mask,
                  MaskMode mode = MaskMode::Multiplicative, int heads = 1);

/// Decoder: embeds the flattened encoded ground depth as location queries
/// (adds pe), then L x (self-attention -> cross-attention over the encoder
/// output with concatenated values -> convolutional FFN).
FeatureMap decode(const GroundDepthMap& depth, const FeatureMap& encoder_out,
                  const FeatureMap& pe, const std::vector<DecoderLayerParams>& layers,
                  const Eigen::MatrixXd& embed_w, const Eigen::MatrixXd& embed_b,
                  const AttentionMask& mask, MaskMode mode = MaskMode::Multiplicative,
                  int heads = 1);

// ---- trainable pipeline ----

struct PixelTarget {
    int index = 0;      // flat feature-map index
    double depth = 0.0;  // meters
};

enum class HeadMode { EncoderOnly, Fused };

class FusionModel {
public:
    FusionModel(FusionConfig cfg, uint64_t init_seed)
        : config(cfg), weights(init_weights(cfg, init_seed)) {}

    FeatureMap run_encoder(const FeatureMap& img) const;
    FeatureMap run_decoder(const GroundDepthMap& depth, const FeatureMap& encoder_out) const;

    /// Per-pixel depth readout of a feature map.
    Eigen::VectorXd head(const FeatureMap& features) const;

    /// Full-pipeline prediction. `depth` may be null in EncoderOnly mode.
    Eigen::VectorXd predict(const FeatureMap& img, const GroundDepthMap* depth,
                            HeadMode mode) const;

    /// Mean squared error over the target pixels; when `grads` is non-null,
    /// accumulates reverse-mode gradients for every parameter, and
    /// optionally for the inputs.
    double loss_and_gradients(const FeatureMap& img, const GroundDepthMap* depth,
                              const std::vector<PixelTarget>& targets, HeadMode mode,
                              FusionWeights* grads, Eigen::MatrixXd* d_img = nullptr,
                              Eigen::VectorXd* d_depth = nullptr) const;

    FusionConfig config;
    FusionWeights weights;
};

/// Plain Adam; state grows to match the weights on first step.
class Adam {
public:
    explicit Adam(double lr = 1e-2, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void set_lr(double lr) { lr_ = lr; }
    void step(FusionWeights& weights, const FusionWeights& grads);

private:
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<Eigen::MatrixXd> m_, v_;
};

// ---- finite-difference gradient checking ----

struct GradCheckReport {
    struct Entry {
        std::string param_class;
        double max_rel_err = 0.0;
    };
    std::vector<Entry> entries;
    double worst = 0.0;
    bool passed = false;
};

/// Compares analytic gradients against central finite differences
/// (h = 1e-5) on `num_configs` random 4x4x2 setups, alternating head count
/// and mask mode. `break_gradient` corrupts one analytic gradient entry as
/// a negative control. Deterministic in `seed`.
GradCheckReport run_gradient_check(uint64_t seed, int num_configs, double tolerance = 1e-4,
                                   bool break_gradient = false);

}  // namespace gde::fusion
