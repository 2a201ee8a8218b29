// Naive reference implementation of the fusion transformer forward passes,
// written with plain loops and std::vector only. Test oracle: must stay
// independent of the Eigen-based library path it checks.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace ref {

using Grid = std::vector<std::vector<double>>;  // N rows x C cols

inline Grid zeros(size_t n, size_t c) { return Grid(n, std::vector<double>(c, 0.0)); }

inline Grid add(const Grid& a, const Grid& b) {
    Grid out = a;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) out[i][j] += b[i][j];
    return out;
}

inline Grid layer_norm(const Grid& x, const std::vector<double>& gamma,
                       const std::vector<double>& beta, double eps = 1e-2) {
    Grid out = zeros(x.size(), x[0].size());
    const double c = static_cast<double>(x[0].size());
    for (size_t i = 0; i < x.size(); ++i) {
        double mu = 0.0;
        for (double v : x[i]) mu += v;
        mu /= c;
        double var = 0.0;
        for (double v : x[i]) var += (v - mu) * (v - mu);
        var /= c;
        const double inv = 1.0 / std::sqrt(var + eps);
        for (size_t j = 0; j < x[i].size(); ++j) {
            out[i][j] = gamma[j] * ((x[i][j] - mu) * inv) + beta[j];
        }
    }
    return out;
}

inline Grid matmul(const Grid& x, const Grid& w) {  // (N x C) * (C x D)
    Grid out = zeros(x.size(), w[0].size());
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t k = 0; k < w.size(); ++k)
            for (size_t j = 0; j < w[0].size(); ++j) out[i][j] += x[i][k] * w[k][j];
    return out;
}

inline bool visible(size_t i, size_t j, int ws, int radius) {
    const int ri = static_cast<int>(i) / ws, ci = static_cast<int>(i) % ws;
    const int rj = static_cast<int>(j) / ws, cj = static_cast<int>(j) % ws;
    return std::max(std::abs(ri - rj), std::abs(ci - cj)) <= radius;
}

/// Masked softmax over the visible entries of scores (the reduced form both
/// mask modes compute).
inline Grid masked_softmax(const Grid& scores, int ws, int radius) {
    const size_t n = scores.size();
    Grid w = zeros(n, n);
    for (size_t i = 0; i < n; ++i) {
        double mx = -1e300;
        for (size_t j = 0; j < n; ++j)
            if (visible(i, j, ws, radius)) mx = std::max(mx, scores[i][j]);
        double denom = 0.0;
        for (size_t j = 0; j < n; ++j) {
            if (visible(i, j, ws, radius)) {
                w[i][j] = std::exp(scores[i][j] - mx);
                denom += w[i][j];
            }
        }
        for (size_t j = 0; j < n; ++j) w[i][j] /= denom;
    }
    return w;
}

/// Attention over already-projected q, k applied to values v, per head.
inline Grid attend(const Grid& q, const Grid& k, const Grid& v, int ws, int radius, int heads) {
    const size_t n = q.size(), c = q[0].size();
    const size_t ch = c / heads;
    const double alpha = 1.0 / std::sqrt(static_cast<double>(ch));
    Grid out = zeros(n, c);
    for (int h = 0; h < heads; ++h) {
        const size_t c0 = h * ch;
        Grid scores = zeros(n, n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (size_t d = 0; d < ch; ++d) s += q[i][c0 + d] * k[j][c0 + d];
                scores[i][j] = alpha * s;
            }
        const Grid w = masked_softmax(scores, ws, radius);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                for (size_t d = 0; d < ch; ++d) out[i][c0 + d] += w[i][j] * v[j][c0 + d];
    }
    return out;
}

struct LnRef {
    std::vector<double> gamma, beta;
};
struct AttnRef {
    Grid wq, wk, wv;
};
struct ConvRef {
    Grid w;                  // C_out x 9*C_in
    std::vector<double> b;   // C_out
};
struct CrossRef {
    Grid wq, wk, wv_enc, wv_dec, w_out;
};
struct EncLayerRef {
    LnRef ln1;
    AttnRef attn;
    LnRef ln2;
    ConvRef conv1, conv2;
};
struct DecLayerRef {
    LnRef ln1;
    AttnRef self_attn;
    LnRef ln2;
    CrossRef cross;
    LnRef ln3;
    ConvRef conv1, conv2;
};

inline Grid conv3x3(const Grid& x, int ws, int hs, const ConvRef& p) {
    const size_t c_in = x[0].size();
    const size_t c_out = p.b.size();
    Grid out = zeros(x.size(), c_out);
    for (int r = 0; r < hs; ++r) {
        for (int col = 0; col < ws; ++col) {
            for (size_t co = 0; co < c_out; ++co) {
                double acc = p.b[co];
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int rr = r + dy, cc = col + dx;
                        if (rr < 0 || rr >= hs || cc < 0 || cc >= ws) continue;
                        for (size_t ci = 0; ci < c_in; ++ci) {
                            const size_t tap = ((dy + 1) * 3 + (dx + 1)) * c_in + ci;
                            acc += p.w[co][tap] * x[rr * ws + cc][ci];
                        }
                    }
                }
                out[r * ws + col][co] = acc;
            }
        }
    }
    return out;
}

inline Grid self_attention_sublayer(const Grid& x, const LnRef& ln, const AttnRef& p, int ws,
                                    int radius, int heads) {
    const Grid xn = layer_norm(x, ln.gamma, ln.beta);
    return add(x, attend(matmul(xn, p.wq), matmul(xn, p.wk), matmul(xn, p.wv), ws, radius, heads));
}

inline Grid conv_ffn_sublayer(const Grid& x, const LnRef& ln, const ConvRef& c1, const ConvRef& c2,
                              int ws, int hs) {
    Grid h1 = conv3x3(layer_norm(x, ln.gamma, ln.beta), ws, hs, c1);
    for (auto& row : h1)
        for (auto& v : row) v = std::max(0.0, v);
    return add(x, conv3x3(h1, ws, hs, c2));
}

inline Grid encode(const Grid& img, const Grid& pe, const std::vector<EncLayerRef>& layers, int ws,
                   int hs, int radius, int heads) {
    Grid x = add(img, pe);
    for (const auto& l : layers) {
        x = self_attention_sublayer(x, l.ln1, l.attn, ws, radius, heads);
        x = conv_ffn_sublayer(x, l.ln2, l.conv1, l.conv2, ws, hs);
    }
    return x;
}

inline Grid cross_attention_sublayer(const Grid& q_in, const Grid& enc, const LnRef& ln,
                                     const CrossRef& p, int ws, int radius, int heads) {
    const size_t n = q_in.size(), c = q_in[0].size();
    const Grid qn = layer_norm(q_in, ln.gamma, ln.beta);
    const Grid q = matmul(qn, p.wq);
    const Grid k = matmul(enc, p.wk);
    const Grid ve = matmul(enc, p.wv_enc);
    const Grid vd = matmul(qn, p.wv_dec);
    const Grid oe = attend(q, k, ve, ws, radius, heads);
    const Grid od = attend(q, k, vd, ws, radius, heads);
    Grid concat = zeros(n, 2 * c);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < c; ++j) {
            concat[i][j] = oe[i][j];
            concat[i][c + j] = od[i][j];
        }
    return add(q_in, matmul(concat, p.w_out));
}

inline Grid decode(const std::vector<double>& depth, const Grid& enc, const Grid& pe,
                   const std::vector<DecLayerRef>& layers, const std::vector<double>& embed_w,
                   const std::vector<double>& embed_b, int ws, int hs, int radius, int heads) {
    const size_t n = depth.size(), c = embed_w.size();
    Grid q = zeros(n, c);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < c; ++j) q[i][j] = depth[i] * embed_w[j] + embed_b[j] + pe[i][j];
    for (const auto& l : layers) {
        q = self_attention_sublayer(q, l.ln1, l.self_attn, ws, radius, heads);
        q = cross_attention_sublayer(q, enc, l.ln2, l.cross, ws, radius, heads);
        q = conv_ffn_sublayer(q, l.ln3, l.conv1, l.conv2, ws, hs);
    }
    return q;
}

}  // namespace ref
