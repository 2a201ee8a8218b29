#include "gde/fusion/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "gde/csv.hpp"
#include "gde/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts need byte swaps");

namespace gde::fusion {

namespace {

constexpr char kMagic[8] = {'G', 'D', 'E', 'W', 'G', 'T', '0', '1'};

using nlohmann::json;

}  // namespace

std::string checkpoint_bytes(const FusionConfig& cfg, const FusionWeights& weights) {
    json header;
    header["format"] = "gde-weights";
    header["version"] = 1;
    header["channels"] = cfg.channels;
    header["heads"] = cfg.heads;
    header["encoder_layers"] = cfg.encoder_layers;
    header["decoder_layers"] = cfg.decoder_layers;
    header["window_radius"] = cfg.window_radius;
    header["mask_mode"] = cfg.mask_mode == MaskMode::Multiplicative ? "multiplicative" : "additive";
    header["norm_placement"] = "pre";
    json arrays = json::array();
    weights.visit([&](const std::string& name, const Eigen::MatrixXd& m) {
        arrays.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    });
    header["arrays"] = arrays;

    const std::string header_str = header.dump();
    std::string out(kMagic, sizeof(kMagic));
    const auto len = static_cast<uint32_t>(header_str.size());
    out.append(reinterpret_cast<const char*>(&len), 4);
    out += header_str;
    weights.visit([&](const std::string&, const Eigen::MatrixXd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                const double v = m(r, c);
                out.append(reinterpret_cast<const char*>(&v), 8);
            }
        }
    });
    return out;
}

std::pair<FusionConfig, FusionWeights> parse_checkpoint(const std::string& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw ParseError("MalformedFloat", 0, 0, "not a gde weight checkpoint");
    }
    uint32_t len = 0;
    std::memcpy(&len, bytes.data() + 8, 4);
    if (bytes.size() < 12 + static_cast<size_t>(len)) {
        throw ParseError("WrongFieldCount", 0, 0, "truncated checkpoint header");
    }
    json header = json::parse(bytes.substr(12, len));

    FusionConfig cfg;
    cfg.channels = header.at("channels").get<int>();
    cfg.heads = header.at("heads").get<int>();
    cfg.encoder_layers = header.at("encoder_layers").get<int>();
    cfg.decoder_layers = header.at("decoder_layers").get<int>();
    cfg.window_radius = header.at("window_radius").get<int>();
    cfg.mask_mode = header.at("mask_mode").get<std::string>() == "additive"
                        ? MaskMode::Additive
                        : MaskMode::Multiplicative;

    FusionWeights weights = zero_weights(cfg);
    size_t offset = 12 + len;
    size_t array_i = 0;
    const json& arrays = header.at("arrays");
    weights.visit([&](const std::string& name, Eigen::MatrixXd& m) {
        const json& meta = arrays.at(array_i++);
        if (meta.at("name").get<std::string>() != name ||
            meta.at("rows").get<Eigen::Index>() != m.rows() ||
            meta.at("cols").get<Eigen::Index>() != m.cols()) {
            throw ParseError("WrongFieldCount", 0, 0, "checkpoint array mismatch at " + name);
        }
        const size_t need = static_cast<size_t>(m.size()) * 8;
        if (bytes.size() < offset + need) {
            throw ParseError("WrongFieldCount", 0, 0, "truncated checkpoint payload at " + name);
        }
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                std::memcpy(&m(r, c), bytes.data() + offset, 8);
                offset += 8;
            }
        }
    });
    return {cfg, std::move(weights)};
}

void save_checkpoint(const std::string& path, const FusionConfig& cfg,
                     const FusionWeights& weights) {
    write_file(path, checkpoint_bytes(cfg, weights));
}

std::pair<FusionConfig, FusionWeights> load_checkpoint(const std::string& path) {
    return parse_checkpoint(read_file(path));
}

}  // namespace gde::fusion
