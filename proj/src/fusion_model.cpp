#include "gde/fusion/model.hpp"

#include <cmath>
#include <map>
#include <random>

#include "gde/errors.hpp"

namespace gde::fusion {

namespace {

LayerNormParams make_ln(int c) {
    LayerNormParams p;
    p.gamma = Eigen::MatrixXd::Zero(c, 1);
    p.beta = Eigen::MatrixXd::Zero(c, 1);
    return p;
}

ConvParams make_conv(int c) {
    ConvParams p;
    p.w = Eigen::MatrixXd::Zero(c, 9 * c);
    p.b = Eigen::MatrixXd::Zero(c, 1);
    return p;
}

}  // namespace

FusionWeights zero_weights(const FusionConfig& cfg) {
    const int c = cfg.channels;
    FusionWeights w;
    w.encoder.resize(cfg.encoder_layers);
    for (auto& e : w.encoder) {
        e.ln1 = make_ln(c);
        e.attn.wq = e.attn.wk = e.attn.wv = Eigen::MatrixXd::Zero(c, c);
        e.ln2 = make_ln(c);
        e.conv1 = make_conv(c);
        e.conv2 = make_conv(c);
    }
    w.decoder.resize(cfg.decoder_layers);
    for (auto& d : w.decoder) {
        d.ln1 = make_ln(c);
        d.self_attn.wq = d.self_attn.wk = d.self_attn.wv = Eigen::MatrixXd::Zero(c, c);
        d.ln2 = make_ln(c);
        d.cross.wq = d.cross.wk = d.cross.wv_enc = d.cross.wv_dec = Eigen::MatrixXd::Zero(c, c);
        d.cross.w_out = Eigen::MatrixXd::Zero(2 * c, c);
        d.ln3 = make_ln(c);
        d.conv1 = make_conv(c);
        d.conv2 = make_conv(c);
    }
    w.embed_w = Eigen::MatrixXd::Zero(c, 1);
    w.embed_b = Eigen::MatrixXd::Zero(c, 1);
    w.head_w = Eigen::MatrixXd::Zero(c, 1);
    w.head_b = Eigen::MatrixXd::Zero(1, 1);
    return w;
}

FusionWeights init_weights(const FusionConfig& cfg, uint64_t seed) {
    FusionWeights w = zero_weights(cfg);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double c = cfg.channels;
    w.visit([&](const std::string& name, Eigen::MatrixXd& m) {
        double scale = 0.0;
        if (name.find("ln") != std::string::npos) {
            if (name.find("gamma") != std::string::npos) m.setOnes();  // identity norms
            return;
        }
        if (name.find("conv") != std::string::npos) {
            scale = (name.back() == 'w') ? 1.0 / std::sqrt(9.0 * c) : 0.0;
        } else if (name.find("w_out") != std::string::npos) {
            scale = 1.0 / std::sqrt(2.0 * c);
        } else if (name.find("head.b") != std::string::npos ||
                   name.find("embed.b") != std::string::npos) {
            scale = 0.0;
        } else {
            scale = 1.0 / std::sqrt(c);
        }
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                const double g = normal(rng);
                m(i, j) = scale * g;
            }
        }
    });
    return w;
}

// ---- cached pipeline ----

namespace {

struct EncoderLayerCache {
    SelfAttentionCache attn;
    ConvFfnCache ffn;
};

struct DecoderLayerCache {
    SelfAttentionCache self;
    CrossAttentionCache cross;
    ConvFfnCache ffn;
};

struct PipelineCache {
    std::vector<EncoderLayerCache> enc;
    Eigen::MatrixXd enc_out;
    Eigen::VectorXd depth_vec;
    std::vector<DecoderLayerCache> dec;
    Eigen::MatrixXd features;  // head input (enc_out or dec_out)
    Eigen::VectorXd pred;
};

Eigen::MatrixXd encode_core(const Eigen::MatrixXd& img, const Eigen::MatrixXd& pe, int ws, int hs,
                            const std::vector<EncoderLayerParams>& layers,
                            const AttentionMask& mask, MaskMode mode, int heads,
                            std::vector<EncoderLayerCache>* caches) {
    Eigen::MatrixXd x = img + pe;
    if (caches) caches->resize(layers.size());
    for (size_t l = 0; l < layers.size(); ++l) {
        auto* c = caches ? &(*caches)[l] : nullptr;
        x = self_attention_forward(x, layers[l].ln1, layers[l].attn, mask, mode, heads,
                                   c ? &c->attn : nullptr);
        x = conv_ffn_forward(x, ws, hs, layers[l].ln2, layers[l].conv1, layers[l].conv2,
                             c ? &c->ffn : nullptr);
    }
    return x;
}

Eigen::MatrixXd decode_core(const Eigen::VectorXd& depth_vec, const Eigen::MatrixXd& enc,
                            const Eigen::MatrixXd& pe, int ws, int hs,
                            const std::vector<DecoderLayerParams>& layers,
                            const Eigen::MatrixXd& embed_w, const Eigen::MatrixXd& embed_b,
                            const AttentionMask& mask, MaskMode mode, int heads,
                            std::vector<DecoderLayerCache>* caches) {
    // Location queries: scalar ground depth linearly embedded to C channels.
    Eigen::MatrixXd q = depth_vec * embed_w.col(0).transpose();
    q.rowwise() += embed_b.col(0).transpose();
    q += pe;
    if (caches) caches->resize(layers.size());
    for (size_t l = 0; l < layers.size(); ++l) {
        auto* c = caches ? &(*caches)[l] : nullptr;
        q = self_attention_forward(q, layers[l].ln1, layers[l].self_attn, mask, mode, heads,
                                   c ? &c->self : nullptr);
        q = cross_attention_forward(q, enc, layers[l].ln2, layers[l].cross, mask, mode, heads,
                                    c ? &c->cross : nullptr);
        q = conv_ffn_forward(q, ws, hs, layers[l].ln3, layers[l].conv1, layers[l].conv2,
                             c ? &c->ffn : nullptr);
    }
    return q;
}

Eigen::VectorXd flatten_depth(const GroundDepthMap& depth) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(depth.encoded.size()));
    for (size_t i = 0; i < depth.encoded.size(); ++i) v(static_cast<Eigen::Index>(i)) = depth.encoded[i];
    return v;
}

}  // namespace

FeatureMap encode(const FeatureMap& img, const FeatureMap& pe,
                  const std::vector<EncoderLayerParams>& layers, const AttentionMask& mask,
                  MaskMode mode, int heads) {
    if (layers.empty()) throw DimensionMismatch("encoder needs at least one layer");
    if (pe.ws != img.ws || pe.hs != img.hs || pe.data.cols() != img.data.cols()) {
        throw DimensionMismatch("position encoding does not match the feature map");
    }
    if (mask.ws() != img.ws || mask.hs() != img.hs) {
        throw DimensionMismatch("attention mask grid does not match the feature map");
    }
    FeatureMap out = img;
    out.data = encode_core(img.data, pe.data, img.ws, img.hs, layers, mask, mode, heads, nullptr);
    return out;
}

FeatureMap decode(const GroundDepthMap& depth, const FeatureMap& encoder_out,
                  const FeatureMap& pe, const std::vector<DecoderLayerParams>& layers,
                  const Eigen::MatrixXd& embed_w, const Eigen::MatrixXd& embed_b,
                  const AttentionMask& mask, MaskMode mode, int heads) {
    if (depth.width != encoder_out.ws || depth.height != encoder_out.hs) {
        throw DimensionMismatch("ground-depth map does not match the encoder grid");
    }
    if (layers.empty()) throw DimensionMismatch("decoder needs at least one layer");
    FeatureMap out = encoder_out;
    out.data = decode_core(flatten_depth(depth), encoder_out.data, pe.data, encoder_out.ws,
                           encoder_out.hs, layers, embed_w, embed_b, mask, mode, heads, nullptr);
    return out;
}

FeatureMap FusionModel::run_encoder(const FeatureMap& img) const {
    const FeatureMap pe = position_encoding(img.ws, img.hs, config.channels);
    const AttentionMask mask(img.ws, img.hs, config.window_radius);
    return encode(img, pe, weights.encoder, mask, config.mask_mode, config.heads);
}

FeatureMap FusionModel::run_decoder(const GroundDepthMap& depth,
                                    const FeatureMap& encoder_out) const {
    const FeatureMap pe = position_encoding(encoder_out.ws, encoder_out.hs, config.channels);
    const AttentionMask mask(encoder_out.ws, encoder_out.hs, config.window_radius);
    return decode(depth, encoder_out, pe, weights.decoder, weights.embed_w, weights.embed_b, mask,
                  config.mask_mode, config.heads);
}

Eigen::VectorXd FusionModel::head(const FeatureMap& features) const {
    return (features.data * weights.head_w.col(0)).array() + weights.head_b(0, 0);
}

Eigen::VectorXd FusionModel::predict(const FeatureMap& img, const GroundDepthMap* depth,
                                     HeadMode mode) const {
    FeatureMap f = run_encoder(img);
    if (mode == HeadMode::Fused) {
        if (!depth) throw DimensionMismatch("fused mode needs a ground-depth map");
        f = run_decoder(*depth, f);
    }
    return head(f);
}

double FusionModel::loss_and_gradients(const FeatureMap& img, const GroundDepthMap* depth,
                                       const std::vector<PixelTarget>& targets, HeadMode mode,
                                       FusionWeights* grads, Eigen::MatrixXd* d_img,
                                       Eigen::VectorXd* d_depth) const {
    const int ws = img.ws, hs = img.hs;
    const FeatureMap pe = position_encoding(ws, hs, config.channels);
    const AttentionMask mask(ws, hs, config.window_radius);

    PipelineCache cache;
    cache.enc_out = encode_core(img.data, pe.data, ws, hs, weights.encoder, mask,
                                config.mask_mode, config.heads, grads ? &cache.enc : nullptr);
    if (mode == HeadMode::Fused) {
        if (!depth) throw DimensionMismatch("fused mode needs a ground-depth map");
        if (depth->width != ws || depth->height != hs) {
            throw DimensionMismatch("ground-depth map does not match the feature grid");
        }
        cache.depth_vec = flatten_depth(*depth);
        cache.features = decode_core(cache.depth_vec, cache.enc_out, pe.data, ws, hs,
                                     weights.decoder, weights.embed_w, weights.embed_b, mask,
                                     config.mask_mode, config.heads,
                                     grads ? &cache.dec : nullptr);
    } else {
        cache.features = cache.enc_out;
    }
    cache.pred = (cache.features * weights.head_w.col(0)).array() + weights.head_b(0, 0);

    double loss = 0.0;
    for (const auto& t : targets) {
        const double r = cache.pred(t.index) - t.depth;
        loss += r * r;
    }
    loss /= static_cast<double>(targets.size());
    if (!grads) return loss;

    // ---- backward ----
    Eigen::VectorXd d_pred = Eigen::VectorXd::Zero(cache.pred.size());
    for (const auto& t : targets) {
        d_pred(t.index) += 2.0 * (cache.pred(t.index) - t.depth) / static_cast<double>(targets.size());
    }
    Eigen::MatrixXd d_features = d_pred * weights.head_w.col(0).transpose();
    grads->head_w.col(0) += cache.features.transpose() * d_pred;
    grads->head_b(0, 0) += d_pred.sum();

    Eigen::MatrixXd d_enc_out = Eigen::MatrixXd::Zero(cache.enc_out.rows(), cache.enc_out.cols());
    if (mode == HeadMode::Fused) {
        Eigen::MatrixXd dq = d_features;
        for (int l = static_cast<int>(weights.decoder.size()) - 1; l >= 0; --l) {
            const auto& lw = weights.decoder[l];
            auto& lc = cache.dec[l];
            auto& lg = grads->decoder[l];
            dq = conv_ffn_backward(dq, ws, hs, lw.ln3, lw.conv1, lw.conv2, lc.ffn, lg.ln3,
                                   lg.conv1, lg.conv2);
            dq = cross_attention_backward(dq, cache.enc_out, lw.ln2, lw.cross, config.heads,
                                          lc.cross, d_enc_out, lg.ln2, lg.cross);
            dq = self_attention_backward(dq, lw.ln1, lw.self_attn, config.heads, lc.self, lg.ln1,
                                         lg.self_attn);
        }
        // Through the query embedding: q0 = depth * embed_w^T + embed_b + pe.
        // d_enc_out itself was accumulated by the cross-attention layers.
        grads->embed_w.col(0) += dq.transpose() * cache.depth_vec;
        grads->embed_b.col(0) += dq.colwise().sum().transpose();
        if (d_depth) *d_depth = dq * weights.embed_w.col(0);
    } else {
        d_enc_out = d_features;
    }

    Eigen::MatrixXd dx = d_enc_out;
    for (int l = static_cast<int>(weights.encoder.size()) - 1; l >= 0; --l) {
        const auto& lw = weights.encoder[l];
        auto& lc = cache.enc[l];
        auto& lg = grads->encoder[l];
        dx = conv_ffn_backward(dx, ws, hs, lw.ln2, lw.conv1, lw.conv2, lc.ffn, lg.ln2, lg.conv1,
                               lg.conv2);
        dx = self_attention_backward(dx, lw.ln1, lw.attn, config.heads, lc.attn, lg.ln1, lg.attn);
    }
    if (d_img) *d_img = dx;  // d(img + pe)/d(img) is the identity
    return loss;
}

void Adam::step(FusionWeights& weights, const FusionWeights& grads) {
    std::vector<Eigen::MatrixXd*> ws, gs;
    weights.visit([&](const std::string&, Eigen::MatrixXd& m) { ws.push_back(&m); });
    const_cast<FusionWeights&>(grads).visit(
        [&](const std::string&, Eigen::MatrixXd& m) { gs.push_back(&m); });
    if (m_.empty()) {
        for (auto* g : gs) {
            m_.push_back(Eigen::MatrixXd::Zero(g->rows(), g->cols()));
            v_.push_back(Eigen::MatrixXd::Zero(g->rows(), g->cols()));
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < ws.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * (*gs[i]);
        v_[i] = beta2_ * v_[i].array().matrix() +
                (1.0 - beta2_) * gs[i]->array().square().matrix();
        ws[i]->array() -=
            lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
    }
}

// ---- gradient check ----

namespace {

std::string param_class_of(const std::string& name) {
    // enc0.attn.wq -> enc.attn.wq
    std::string out;
    out.reserve(name.size());
    for (size_t i = 0; i < name.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(name[i])) && i > 0 &&
            (name.compare(0, 3, "enc") == 0 || name.compare(0, 3, "dec") == 0) && i < 5) {
            continue;
        }
        out.push_back(name[i]);
    }
    return out;
}

struct CheckSetup {
    FusionModel model;
    FeatureMap img;
    GroundDepthMap depth;
    std::vector<PixelTarget> targets;
};

CheckSetup make_setup(uint64_t seed, int variant) {
    const int ws = 4, hs = 4, c = 2;
    FusionConfig cfg;
    cfg.channels = c;
    cfg.heads = (variant % 2 == 0) ? 1 : 2;
    cfg.encoder_layers = 2;
    cfg.decoder_layers = 2;
    cfg.window_radius = (variant % 3 == 0) ? 1 : 2;
    cfg.mask_mode = (variant % 2 == 0) ? MaskMode::Multiplicative : MaskMode::Additive;

    CheckSetup s{FusionModel(cfg, seed), make_feature_map(ws, hs, c), GroundDepthMap{}, {}};
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < s.img.data.rows(); ++i) {
        for (Eigen::Index j = 0; j < s.img.data.cols(); ++j) s.img.data(i, j) = normal(rng);
    }
    s.depth.width = ws;
    s.depth.height = hs;
    s.depth.encoded.resize(static_cast<size_t>(ws) * hs);
    s.depth.depth.resize(static_cast<size_t>(ws) * hs);
    for (auto& d : s.depth.encoded) d = std::abs(normal(rng)) * 2.0;
    for (size_t i = 0; i < s.depth.depth.size(); ++i) {
        s.depth.depth[i] = s.depth.encoded[i] > 0 ? 10.0 / s.depth.encoded[i] : 0.0;
    }
    // O(1) target scale keeps the loss third derivative moderate, which the
    // h = 1e-5 central differences need to stay inside the 1e-4 band.
    std::uniform_real_distribution<double> depth_target(0.5, 3.0);
    for (int i = 0; i < ws * hs; ++i) s.targets.push_back({i, depth_target(rng)});
    return s;
}

/// Conditioning of a random configuration for finite differences. A ReLU
/// input within ~h of the kink breaks the two-sided difference; a layer-norm
/// row with near-zero variance blows up third derivatives (C = 2 rows can
/// degenerate), which h^2 truncation error then amplifies past the band.
struct FdConditioning {
    double min_relu_margin = std::numeric_limits<double>::infinity();
    double max_inv_std = 0.0;

    bool acceptable() const { return min_relu_margin > 1e-3 && max_inv_std < 20.0; }
};

FdConditioning fd_conditioning(const FusionModel& model, const CheckSetup& s) {
    const FeatureMap pe = position_encoding(s.img.ws, s.img.hs, model.config.channels);
    const AttentionMask mask(s.img.ws, s.img.hs, model.config.window_radius);
    FdConditioning cond;
    auto track_ln = [&](const LayerNormCache& c) {
        cond.max_inv_std = std::max(cond.max_inv_std, c.inv_std.maxCoeff());
    };

    Eigen::MatrixXd x = s.img.data + pe.data;
    for (const auto& l : model.weights.encoder) {
        SelfAttentionCache attn_cache;
        x = self_attention_forward(x, l.ln1, l.attn, mask, model.config.mask_mode,
                                   model.config.heads, &attn_cache);
        track_ln(attn_cache.ln);
        ConvFfnCache cache;
        x = conv_ffn_forward(x, s.img.ws, s.img.hs, l.ln2, l.conv1, l.conv2, &cache);
        track_ln(cache.ln);
        cond.min_relu_margin = std::min(cond.min_relu_margin, cache.h1.cwiseAbs().minCoeff());
    }
    Eigen::MatrixXd enc = x;
    Eigen::VectorXd depth_vec(static_cast<Eigen::Index>(s.depth.encoded.size()));
    for (size_t i = 0; i < s.depth.encoded.size(); ++i) depth_vec(i) = s.depth.encoded[i];
    Eigen::MatrixXd q = depth_vec * model.weights.embed_w.col(0).transpose();
    q.rowwise() += model.weights.embed_b.col(0).transpose();
    q += pe.data;
    for (const auto& l : model.weights.decoder) {
        SelfAttentionCache self_cache;
        q = self_attention_forward(q, l.ln1, l.self_attn, mask, model.config.mask_mode,
                                   model.config.heads, &self_cache);
        track_ln(self_cache.ln);
        CrossAttentionCache cross_cache;
        q = cross_attention_forward(q, enc, l.ln2, l.cross, mask, model.config.mask_mode,
                                    model.config.heads, &cross_cache);
        track_ln(cross_cache.ln);
        ConvFfnCache cache;
        q = conv_ffn_forward(q, s.img.ws, s.img.hs, l.ln3, l.conv1, l.conv2, &cache);
        track_ln(cache.ln);
        cond.min_relu_margin = std::min(cond.min_relu_margin, cache.h1.cwiseAbs().minCoeff());
    }
    return cond;
}

}  // namespace

GradCheckReport run_gradient_check(uint64_t seed, int num_configs, double tolerance,
                                   bool break_gradient) {
    constexpr double kStep = 1e-5;
    std::map<std::string, double> worst_by_class;

    for (int cfg_i = 0; cfg_i < num_configs; ++cfg_i) {
        CheckSetup setup = make_setup(seed + 1000003ULL * cfg_i, cfg_i);
        // Step past configurations that are ill-conditioned for differencing.
        for (uint64_t bump = 1; !fd_conditioning(setup.model, setup).acceptable() && bump < 256;
             ++bump) {
            setup = make_setup(seed + 1000003ULL * cfg_i + bump * 7919ULL, cfg_i);
        }
        FusionModel& model = setup.model;

        FusionWeights grads = zero_weights(model.config);
        Eigen::MatrixXd d_img;
        Eigen::VectorXd d_depth;
        model.loss_and_gradients(setup.img, &setup.depth, setup.targets, HeadMode::Fused, &grads,
                                 &d_img, &d_depth);
        if (break_gradient && cfg_i == 0) {
            grads.encoder[0].attn.wq(0, 0) += 0.01;
        }

        auto loss_at = [&]() {
            return model.loss_and_gradients(setup.img, &setup.depth, setup.targets,
                                            HeadMode::Fused, nullptr);
        };
        auto record = [&](const std::string& cls, double analytic, double fd) {
            const double rel =
                std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-3});
            auto [it, inserted] = worst_by_class.emplace(cls, rel);
            if (!inserted) it->second = std::max(it->second, rel);
        };

        std::vector<std::pair<std::string, Eigen::MatrixXd*>> params;
        model.weights.visit(
            [&](const std::string& name, Eigen::MatrixXd& m) { params.emplace_back(name, &m); });
        std::vector<Eigen::MatrixXd*> grad_mats;
        grads.visit([&](const std::string&, Eigen::MatrixXd& m) { grad_mats.push_back(&m); });

        for (size_t p = 0; p < params.size(); ++p) {
            Eigen::MatrixXd& w = *params[p].second;
            for (Eigen::Index i = 0; i < w.size(); ++i) {
                const double saved = w(i);
                w(i) = saved + kStep;
                const double up = loss_at();
                w(i) = saved - kStep;
                const double down = loss_at();
                w(i) = saved;
                record(param_class_of(params[p].first), (*grad_mats[p])(i),
                       (up - down) / (2.0 * kStep));
            }
        }
        for (Eigen::Index i = 0; i < setup.img.data.size(); ++i) {
            const double saved = setup.img.data(i);
            setup.img.data(i) = saved + kStep;
            const double up = loss_at();
            setup.img.data(i) = saved - kStep;
            const double down = loss_at();
            setup.img.data(i) = saved;
            record("input.features", d_img(i), (up - down) / (2.0 * kStep));
        }
        for (size_t i = 0; i < setup.depth.encoded.size(); ++i) {
            const double saved = setup.depth.encoded[i];
            setup.depth.encoded[i] = saved + kStep;
            const double up = loss_at();
            setup.depth.encoded[i] = saved - kStep;
            const double down = loss_at();
            setup.depth.encoded[i] = saved;
            record("input.depth", d_depth(static_cast<Eigen::Index>(i)),
                   (up - down) / (2.0 * kStep));
        }
    }

    GradCheckReport report;
    for (const auto& [cls, err] : worst_by_class) {
        report.entries.push_back({cls, err});
        report.worst = std::max(report.worst, err);
    }
    report.passed = report.worst < tolerance;
    return report;
}

}  // namespace gde::fusion
