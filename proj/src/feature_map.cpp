#include "gde/fusion/feature_map.hpp"

#include <cmath>

#include "gde/errors.hpp"

namespace gde::fusion {

FeatureMap make_feature_map(int ws, int hs, int channels) {
    if (ws < 1 || hs < 1) throw ZeroDimension();
    FeatureMap fm;
    fm.ws = ws;
    fm.hs = hs;
    fm.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ws) * hs, channels);
    return fm;
}

FeatureMap position_encoding(int ws, int hs, int channels) {
    if (channels % 2 != 0 || channels < 2) {
        throw DimensionMismatch("position encoding needs an even channel count");
    }
    FeatureMap pe = make_feature_map(ws, hs, channels);
    const int block = channels / 2;
    for (int row = 0; row < hs; ++row) {
        for (int col = 0; col < ws; ++col) {
            const int i = pe.flat_index(row, col);
            for (int t = 0; t < block; ++t) {
                const double omega = std::pow(10000.0, -2.0 * (t / 2) / block);
                const double sx = (t % 2 == 0) ? std::sin(col * omega) : std::cos(col * omega);
                const double sy = (t % 2 == 0) ? std::sin(row * omega) : std::cos(row * omega);
                pe.data(i, t) = sx;
                pe.data(i, block + t) = sy;
            }
        }
    }
    return pe;
}

}  // namespace gde::fusion
