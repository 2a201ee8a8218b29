#include "gde/fusion/layers.hpp"

#include <cmath>

#include "gde/errors.hpp"

namespace gde::fusion {

Eigen::MatrixXd layer_norm_forward(const Eigen::MatrixXd& x, const LayerNormParams& p,
                                   LayerNormCache* cache) {
    const Eigen::Index n = x.rows(), c = x.cols();
    Eigen::MatrixXd y(n, c);
    Eigen::MatrixXd xhat(n, c);
    Eigen::VectorXd inv_std(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = x.row(i).mean();
        const double var = (x.row(i).array() - mu).square().mean();
        const double is = 1.0 / std::sqrt(var + kLayerNormEpsilon);
        inv_std(i) = is;
        xhat.row(i) = (x.row(i).array() - mu) * is;
        y.row(i) =
            xhat.row(i).cwiseProduct(p.gamma.col(0).transpose()) + p.beta.col(0).transpose();
    }
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy, const LayerNormParams& p,
                                    const LayerNormCache& cache, LayerNormParams& grad) {
    const Eigen::Index n = dy.rows(), c = dy.cols();
    grad.gamma.col(0) += (dy.array() * cache.xhat.array()).colwise().sum().transpose().matrix();
    grad.beta.col(0) += dy.colwise().sum().transpose();

    Eigen::MatrixXd dx(n, c);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::ArrayXd dxhat = dy.row(i).transpose().array() * p.gamma.col(0).array();
        const double sum_dxhat = dxhat.sum();
        const double sum_dxhat_xhat = (dxhat * cache.xhat.row(i).transpose().array()).sum();
        dx.row(i) = (cache.inv_std(i) / static_cast<double>(c)) *
                    (static_cast<double>(c) * dxhat - sum_dxhat -
                     cache.xhat.row(i).transpose().array() * sum_dxhat_xhat)
                        .matrix()
                        .transpose();
    }
    return dx;
}

Eigen::MatrixXd conv3x3_forward(const Eigen::MatrixXd& x, int ws, int hs, const ConvParams& p) {
    const Eigen::Index c_in = x.cols();
    Eigen::MatrixXd y = p.b.col(0).transpose().replicate(x.rows(), 1);
    for (int r = 0; r < hs; ++r) {
        for (int col = 0; col < ws; ++col) {
            const Eigen::Index dst = static_cast<Eigen::Index>(r) * ws + col;
            for (int dy = -1; dy <= 1; ++dy) {
                const int rr = r + dy;
                if (rr < 0 || rr >= hs) continue;
                for (int dx = -1; dx <= 1; ++dx) {
                    const int cc = col + dx;
                    if (cc < 0 || cc >= ws) continue;
                    const Eigen::Index src = static_cast<Eigen::Index>(rr) * ws + cc;
                    const Eigen::Index tap0 = ((dy + 1) * 3 + (dx + 1)) * c_in;
                    y.row(dst).noalias() +=
                        x.row(src) * p.w.middleCols(tap0, c_in).transpose();
                }
            }
        }
    }
    return y;
}

Eigen::MatrixXd conv3x3_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x, int ws,
                                 int hs, const ConvParams& p, ConvParams& grad) {
    const Eigen::Index c_in = x.cols();
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    grad.b.col(0) += dy.colwise().sum().transpose();
    for (int r = 0; r < hs; ++r) {
        for (int col = 0; col < ws; ++col) {
            const Eigen::Index dst = static_cast<Eigen::Index>(r) * ws + col;
            for (int dyo = -1; dyo <= 1; ++dyo) {
                const int rr = r + dyo;
                if (rr < 0 || rr >= hs) continue;
                for (int dxo = -1; dxo <= 1; ++dxo) {
                    const int cc = col + dxo;
                    if (cc < 0 || cc >= ws) continue;
                    const Eigen::Index src = static_cast<Eigen::Index>(rr) * ws + cc;
                    const Eigen::Index tap0 = ((dyo + 1) * 3 + (dxo + 1)) * c_in;
                    grad.w.middleCols(tap0, c_in).noalias() +=
                        dy.row(dst).transpose() * x.row(src);
                    dx.row(src).noalias() += dy.row(dst) * p.w.middleCols(tap0, c_in);
                }
            }
        }
    }
    return dx;
}

namespace {

double head_scale(Eigen::Index channels, int heads) {
    return 1.0 / std::sqrt(static_cast<double>(channels) / heads);
}

void check_heads(Eigen::Index channels, int heads) {
    if (heads < 1 || channels % heads != 0) {
        throw DimensionMismatch("channel count must be divisible by the head count");
    }
}

}  // namespace

Eigen::MatrixXd self_attention_forward(const Eigen::MatrixXd& x, const LayerNormParams& ln,
                                       const AttentionParams& p, const AttentionMask& mask,
                                       MaskMode mode, int heads, SelfAttentionCache* cache) {
    check_heads(x.cols(), heads);
    LayerNormCache ln_cache;
    const Eigen::MatrixXd xn = layer_norm_forward(x, ln, &ln_cache);
    const Eigen::MatrixXd q = xn * p.wq;
    const Eigen::MatrixXd k = xn * p.wk;
    const Eigen::MatrixXd v = xn * p.wv;

    const Eigen::Index ch = x.cols() / heads;
    const double alpha = head_scale(x.cols(), heads);
    Eigen::MatrixXd out(x.rows(), x.cols());
    std::vector<Eigen::MatrixXd> head_weights(heads);
    for (int h = 0; h < heads; ++h) {
        const Eigen::Index c0 = h * ch;
        const Eigen::MatrixXd scores =
            alpha * q.middleCols(c0, ch) * k.middleCols(c0, ch).transpose();
        head_weights[h] = masked_attention_weights(scores, mask, mode);
        out.middleCols(c0, ch).noalias() = head_weights[h] * v.middleCols(c0, ch);
    }
    if (cache) {
        cache->ln = std::move(ln_cache);
        cache->xn = xn;
        cache->q = q;
        cache->k = k;
        cache->v = v;
        cache->head_weights = std::move(head_weights);
    }
    return x + out;
}

Eigen::MatrixXd self_attention_backward(const Eigen::MatrixXd& dout, const LayerNormParams& ln,
                                        const AttentionParams& p, int heads,
                                        const SelfAttentionCache& cache, LayerNormParams& ln_grad,
                                        AttentionParams& grad) {
    const Eigen::Index ch = dout.cols() / heads;
    const double alpha = head_scale(dout.cols(), heads);
    Eigen::MatrixXd dq(dout.rows(), dout.cols());
    Eigen::MatrixXd dk(dout.rows(), dout.cols());
    Eigen::MatrixXd dv(dout.rows(), dout.cols());
    for (int h = 0; h < heads; ++h) {
        const Eigen::Index c0 = h * ch;
        const Eigen::MatrixXd& w = cache.head_weights[h];
        const auto do_h = dout.middleCols(c0, ch);
        const Eigen::MatrixXd dw = do_h * cache.v.middleCols(c0, ch).transpose();
        dv.middleCols(c0, ch).noalias() = w.transpose() * do_h;
        const Eigen::MatrixXd ds = masked_attention_backward(w, dw);
        dq.middleCols(c0, ch).noalias() = alpha * ds * cache.k.middleCols(c0, ch);
        dk.middleCols(c0, ch).noalias() = alpha * ds.transpose() * cache.q.middleCols(c0, ch);
    }
    grad.wq.noalias() += cache.xn.transpose() * dq;
    grad.wk.noalias() += cache.xn.transpose() * dk;
    grad.wv.noalias() += cache.xn.transpose() * dv;
    const Eigen::MatrixXd dxn =
        dq * p.wq.transpose() + dk * p.wk.transpose() + dv * p.wv.transpose();
    return dout + layer_norm_backward(dxn, ln, cache.ln, ln_grad);
}

Eigen::MatrixXd cross_attention_forward(const Eigen::MatrixXd& q_in, const Eigen::MatrixXd& enc,
                                        const LayerNormParams& ln, const CrossAttentionParams& p,
                                        const AttentionMask& mask, MaskMode mode, int heads,
                                        CrossAttentionCache* cache) {
    if (q_in.rows() != enc.rows()) {
        throw DimensionMismatch("decoder query and encoder output differ in length");
    }
    check_heads(q_in.cols(), heads);
    LayerNormCache ln_cache;
    const Eigen::MatrixXd qn = layer_norm_forward(q_in, ln, &ln_cache);
    const Eigen::MatrixXd q = qn * p.wq;
    const Eigen::MatrixXd k = enc * p.wk;
    const Eigen::MatrixXd ve = enc * p.wv_enc;
    const Eigen::MatrixXd vd = qn * p.wv_dec;

    const Eigen::Index c = q_in.cols();
    const Eigen::Index ch = c / heads;
    const double alpha = head_scale(c, heads);
    Eigen::MatrixXd concat(q_in.rows(), 2 * c);
    std::vector<Eigen::MatrixXd> head_weights(heads);
    for (int h = 0; h < heads; ++h) {
        const Eigen::Index c0 = h * ch;
        const Eigen::MatrixXd scores =
            alpha * q.middleCols(c0, ch) * k.middleCols(c0, ch).transpose();
        head_weights[h] = masked_attention_weights(scores, mask, mode);
        concat.middleCols(c0, ch).noalias() = head_weights[h] * ve.middleCols(c0, ch);
        concat.middleCols(c + c0, ch).noalias() = head_weights[h] * vd.middleCols(c0, ch);
    }
    Eigen::MatrixXd out = concat * p.w_out;
    if (cache) {
        cache->ln = std::move(ln_cache);
        cache->qn = qn;
        cache->q = q;
        cache->k = k;
        cache->ve = ve;
        cache->vd = vd;
        cache->concat = concat;
        cache->head_weights = std::move(head_weights);
    }
    return q_in + out;
}

Eigen::MatrixXd cross_attention_backward(const Eigen::MatrixXd& dout, const Eigen::MatrixXd& enc,
                                         const LayerNormParams& ln, const CrossAttentionParams& p,
                                         int heads, const CrossAttentionCache& cache,
                                         Eigen::MatrixXd& d_enc, LayerNormParams& ln_grad,
                                         CrossAttentionParams& grad) {
    const Eigen::Index c = dout.cols();
    const Eigen::Index ch = c / heads;
    const double alpha = head_scale(c, heads);

    grad.w_out.noalias() += cache.concat.transpose() * dout;
    const Eigen::MatrixXd dconcat = dout * p.w_out.transpose();

    Eigen::MatrixXd dq(dout.rows(), c), dk(dout.rows(), c);
    Eigen::MatrixXd dve(dout.rows(), c), dvd(dout.rows(), c);
    for (int h = 0; h < heads; ++h) {
        const Eigen::Index c0 = h * ch;
        const Eigen::MatrixXd& w = cache.head_weights[h];
        const auto doe = dconcat.middleCols(c0, ch);
        const auto dod = dconcat.middleCols(c + c0, ch);
        dve.middleCols(c0, ch).noalias() = w.transpose() * doe;
        dvd.middleCols(c0, ch).noalias() = w.transpose() * dod;
        const Eigen::MatrixXd dw = doe * cache.ve.middleCols(c0, ch).transpose() +
                                   dod * cache.vd.middleCols(c0, ch).transpose();
        const Eigen::MatrixXd ds = masked_attention_backward(w, dw);
        dq.middleCols(c0, ch).noalias() = alpha * ds * cache.k.middleCols(c0, ch);
        dk.middleCols(c0, ch).noalias() = alpha * ds.transpose() * cache.q.middleCols(c0, ch);
    }
    grad.wq.noalias() += cache.qn.transpose() * dq;
    grad.wk.noalias() += enc.transpose() * dk;
    grad.wv_enc.noalias() += enc.transpose() * dve;
    grad.wv_dec.noalias() += cache.qn.transpose() * dvd;

    d_enc.noalias() += dk * p.wk.transpose() + dve * p.wv_enc.transpose();
    const Eigen::MatrixXd dqn = dq * p.wq.transpose() + dvd * p.wv_dec.transpose();
    return dout + layer_norm_backward(dqn, ln, cache.ln, ln_grad);
}

Eigen::MatrixXd conv_ffn_forward(const Eigen::MatrixXd& x, int ws, int hs,
                                 const LayerNormParams& ln, const ConvParams& conv1,
                                 const ConvParams& conv2, ConvFfnCache* cache) {
    LayerNormCache ln_cache;
    const Eigen::MatrixXd xn = layer_norm_forward(x, ln, &ln_cache);
    const Eigen::MatrixXd h1 = conv3x3_forward(xn, ws, hs, conv1);
    const Eigen::MatrixXd a = h1.cwiseMax(0.0);
    Eigen::MatrixXd out = x + conv3x3_forward(a, ws, hs, conv2);
    if (cache) {
        cache->ln = std::move(ln_cache);
        cache->xn = xn;
        cache->h1 = h1;
        cache->a = a;
    }
    return out;
}

Eigen::MatrixXd conv_ffn_backward(const Eigen::MatrixXd& dout, int ws, int hs,
                                  const LayerNormParams& ln, const ConvParams& conv1,
                                  const ConvParams& conv2, const ConvFfnCache& cache,
                                  LayerNormParams& ln_grad, ConvParams& conv1_grad,
                                  ConvParams& conv2_grad) {
    Eigen::MatrixXd da = conv3x3_backward(dout, cache.a, ws, hs, conv2, conv2_grad);
    const Eigen::MatrixXd dh1 =
        (cache.h1.array() > 0.0).select(da, Eigen::MatrixXd::Zero(da.rows(), da.cols()));
    const Eigen::MatrixXd dxn = conv3x3_backward(dh1, cache.xn, ws, hs, conv1, conv1_grad);
    return dout + layer_norm_backward(dxn, ln, cache.ln, ln_grad);
}

FeatureMap masked_self_attention(const FeatureMap& x, const LayerNormParams& ln,
                                 const AttentionParams& p, const AttentionMask& mask,
                                 MaskMode mode, int heads) {
    if (mask.ws() != x.ws || mask.hs() != x.hs) {
        throw DimensionMismatch("attention mask grid does not match the feature map");
    }
    FeatureMap out = x;
    out.data = self_attention_forward(x.data, ln, p, mask, mode, heads, nullptr);
    return out;
}

FeatureMap conv_ffn(const FeatureMap& x, const LayerNormParams& ln, const ConvParams& conv1,
                    const ConvParams& conv2) {
    FeatureMap out = x;
    out.data = conv_ffn_forward(x.data, x.ws, x.hs, ln, conv1, conv2, nullptr);
    return out;
}

}  // namespace gde::fusion
