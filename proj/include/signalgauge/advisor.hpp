#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "metrics.hpp"

namespace sg {

enum class Regime { Underflow, Overflow, Balanced };

inline const char* regime_name(Regime r) {
    switch (r) {
    case Regime::Underflow: return "underflow";
    case Regime::Overflow: return "overflow";
    case Regime::Balanced: return "balanced";
    }
    return "?";
}

struct InformationRegime {
    Regime regime = Regime::Balanced;
    std::string rationale_text;
};

// Calibration anchors for regime classification. The defaults are the two
// published dataset measurements; band edges sit at geometric means between
// each anchor and the midpoint, leaving a balanced band in between.
struct RegimeBands {
    double me_low = 3.139;
    double snr_low = 0.44;
    double me_high = 6.612;
    double snr_high = 2.40;

    double me_low_edge() const { return edge_low(me_low, me_high); }
    double me_high_edge() const { return edge_high(me_low, me_high); }
    double snr_low_edge() const { return edge_low(snr_low, snr_high); }
    double snr_high_edge() const { return edge_high(snr_low, snr_high); }

private:
    static double edge_low(double lo, double hi) {
        return std::sqrt(lo * std::sqrt(lo * hi));
    }
    static double edge_high(double lo, double hi) {
        return std::sqrt(hi * std::sqrt(lo * hi));
    }
};

// Underflow only when both measures sit at or below the low band; overflow
// only when both exceed the high band; anything mixed is balanced.
inline InformationRegime classify_regime(const SignalMetrics& m,
                                         const RegimeBands& bands = RegimeBands{}) {
    InformationRegime out;
    std::ostringstream why;
    const bool me_low = m.me_bits_per_pixel <= bands.me_low_edge();
    const bool snr_low = m.snr <= bands.snr_low_edge();
    const bool me_high = m.me_bits_per_pixel > bands.me_high_edge();
    const bool snr_high = m.snr > bands.snr_high_edge();

    if (me_low && snr_low) {
        out.regime = Regime::Underflow;
        why << "ME " << m.me_bits_per_pixel << " <= " << bands.me_low_edge() << " and SNR "
            << m.snr << " <= " << bands.snr_low_edge()
            << ": low amount and quality of signal information";
    } else if (me_high && snr_high) {
        out.regime = Regime::Overflow;
        why << "ME " << m.me_bits_per_pixel << " > " << bands.me_high_edge() << " and SNR "
            << m.snr << " > " << bands.snr_high_edge()
            << ": high amount and quality of signal information";
    } else {
        out.regime = Regime::Balanced;
        why << "ME " << m.me_bits_per_pixel << " and SNR " << m.snr
            << " do not jointly fall in the low or high band";
    }
    out.rationale_text = why.str();
    return out;
}

// Ordered conv-block widths plus FC-layer widths, with the fixed VGG-variant
// defaults: 3x3 kernels, stride 1, 2x2 max-pool per block, dropout 0.5
// before the classifier.
struct ArchitectureSpec {
    std::vector<int> conv_blocks;
    int kernel_size = 3;
    int stride = 1;
    int pool = 2;
    std::vector<int> fc_layers;
    double dropout_rate = 0.5;
    int input_height = 0;
    int input_width = 0;
    int input_channels = 0;
    int num_classes = 10;
};

// Spatial side length after the conv/pool stack (same-padded convolutions
// keep dimensions; each pool divides by `pool`). Throws if any stage would
// drop a dimension below 1 or pooling does not divide evenly.
inline std::pair<int, int> output_spatial(const ArchitectureSpec& s) {
    int h = s.input_height, w = s.input_width;
    for (std::size_t b = 0; b < s.conv_blocks.size(); ++b) {
        if (s.pool > 0) {
            if (h < s.pool || w < s.pool || h % s.pool != 0 || w % s.pool != 0)
                throw GeometryExhausted("block " + std::to_string(b) + " cannot pool " +
                                        std::to_string(h) + "x" + std::to_string(w));
            h /= s.pool;
            w /= s.pool;
        }
    }
    return {h, w};
}

// Total trainable parameters: conv weights/biases, FC chain, classifier.
inline std::size_t parameter_count(const ArchitectureSpec& s) {
    std::size_t total = 0;
    int in_ch = s.input_channels;
    for (int k : s.conv_blocks) {
        total += std::size_t(k) * in_ch * s.kernel_size * s.kernel_size + std::size_t(k);
        in_ch = k;
    }
    auto [h, w] = output_spatial(s);
    std::size_t prev = std::size_t(h) * w * in_ch;
    for (int u : s.fc_layers) {
        total += prev * std::size_t(u) + std::size_t(u);
        prev = std::size_t(u);
    }
    total += prev * std::size_t(s.num_classes) + std::size_t(s.num_classes);
    return total;
}

// Sizing rules: FC chain starts at one neuron per input value
// (height * width * channels) and halves per layer; conv blocks start at 32
// kernels and double per block; block count follows the regime (underflow
// and balanced get 2 blocks when geometry allows, falling back to 1;
// overflow gets 3). FC depth matches conv depth.
inline ArchitectureSpec recommend_architecture(const SignalMetrics& metrics, int height,
                                               int width, int channels, int num_classes,
                                               std::size_t capacity_budget = 0,
                                               const RegimeBands& bands = RegimeBands{}) {
    if (height < 1 || width < 1 || channels < 1)
        throw DomainError("invalid input geometry");
    const InformationRegime regime = classify_regime(metrics, bands);

    auto geometry_ok = [&](int blocks) {
        int h = height, w = width;
        for (int b = 0; b < blocks; ++b) {
            if (h < 2 || w < 2 || h % 2 != 0 || w % 2 != 0)
                return false;
            h /= 2;
            w /= 2;
        }
        return true;
    };

    int blocks = regime.regime == Regime::Overflow ? 3 : 2;
    if (regime.regime != Regime::Overflow && !geometry_ok(blocks))
        blocks = 1;
    if (!geometry_ok(blocks))
        throw GeometryExhausted("input " + std::to_string(height) + "x" + std::to_string(width) +
                                " cannot support " + std::to_string(blocks) + " pooling stages");

    ArchitectureSpec spec;
    spec.input_height = height;
    spec.input_width = width;
    spec.input_channels = channels;
    spec.num_classes = num_classes;
    int kernels = 32;
    for (int b = 0; b < blocks; ++b) {
        spec.conv_blocks.push_back(kernels);
        kernels *= 2;
    }
    int units = height * width * channels;
    for (int b = 0; b < blocks; ++b) {
        spec.fc_layers.push_back(units);
        units /= 2;
    }

    if (capacity_budget > 0) {
        while (parameter_count(spec) > capacity_budget) {
            if (spec.fc_layers.size() > 1)
                spec.fc_layers.pop_back();
            else if (spec.conv_blocks.size() > 1)
                spec.conv_blocks.pop_back();
            else
                throw GeometryExhausted("no architecture fits within budget " +
                                        std::to_string(capacity_budget));
        }
    }
    return spec;
}

inline void to_json(nlohmann::json& j, const ArchitectureSpec& s) {
    j = nlohmann::json{{"conv_blocks", s.conv_blocks},
                       {"kernel_size", s.kernel_size},
                       {"stride", s.stride},
                       {"pool", s.pool},
                       {"fc_layers", s.fc_layers},
                       {"dropout_rate", s.dropout_rate},
                       {"input_height", s.input_height},
                       {"input_width", s.input_width},
                       {"input_channels", s.input_channels},
                       {"num_classes", s.num_classes}};
}

inline void from_json(const nlohmann::json& j, ArchitectureSpec& s) {
    j.at("conv_blocks").get_to(s.conv_blocks);
    s.kernel_size = j.value("kernel_size", 3);
    s.stride = j.value("stride", 1);
    s.pool = j.value("pool", 2);
    j.at("fc_layers").get_to(s.fc_layers);
    s.dropout_rate = j.value("dropout_rate", 0.5);
    j.at("input_height").get_to(s.input_height);
    j.at("input_width").get_to(s.input_width);
    j.at("input_channels").get_to(s.input_channels);
    s.num_classes = j.value("num_classes", 10);
}

} // namespace sg
