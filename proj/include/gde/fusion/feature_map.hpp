#pragma once

#include <Eigen/Dense>

namespace gde::fusion {

/// Flattened 2D feature tensor: N x C matrix with N = ws*hs and flat index
/// = row*ws + col. All transformer stages preserve (ws, hs, C).
struct FeatureMap {
    int ws = 0;
    int hs = 0;
    Eigen::MatrixXd data;  // N x C

    int size() const { return ws * hs; }
    int channels() const { return static_cast<int>(data.cols()); }
    int flat_index(int row, int col) const { return row * ws + col; }
};

FeatureMap make_feature_map(int ws, int hs, int channels);

/// Fixed 2D sinusoidal position encoding, C/2 channels per image axis.
/// Within an axis block of size B = C/2, slot t uses frequency
/// 10000^(-2*floor(t/2)/B), sin for even t and cos for odd t, applied to the
/// 0-based column (first block) or row (second block). Deterministic in
/// (ws, hs, channels); entries lie in [-1, 1]. Channels must be even.
FeatureMap position_encoding(int ws, int hs, int channels);

}  // namespace gde::fusion
