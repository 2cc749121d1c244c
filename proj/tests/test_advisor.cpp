#include <catch2/catch_amalgamated.hpp>

#include "signalgauge/advisor.hpp"
#include "signalgauge/experiment.hpp"

namespace {

sg::SignalMetrics metrics(double me, double snr) {
    sg::SignalMetrics m;
    m.me_bits_per_pixel = me;
    m.snr = snr;
    return m;
}

const sg::SignalMetrics kMnist = metrics(3.139, 0.44);
const sg::SignalMetrics kCifar = metrics(6.612, 2.40);

} // namespace

TEST_CASE("published anchors classify as underflow / overflow") {
    CHECK(sg::classify_regime(kMnist).regime == sg::Regime::Underflow);
    CHECK(sg::classify_regime(kCifar).regime == sg::Regime::Overflow);
}

TEST_CASE("midway metrics are balanced") {
    const sg::RegimeBands bands;
    const double me_mid = std::sqrt(bands.me_low * bands.me_high);
    const double snr_mid = std::sqrt(bands.snr_low * bands.snr_high);
    auto r = sg::classify_regime(metrics(me_mid, snr_mid));
    CHECK(r.regime == sg::Regime::Balanced);
    CHECK_FALSE(r.rationale_text.empty());
}

TEST_CASE("mixed signals yield balanced") {
    CHECK(sg::classify_regime(metrics(3.139, 2.40)).regime == sg::Regime::Balanced);
    CHECK(sg::classify_regime(metrics(6.612, 0.44)).regime == sg::Regime::Balanced);
}

TEST_CASE("recommendation for the low-information anchor") {
    auto spec = sg::recommend_architecture(kMnist, 28, 28, 1, 10);
    CHECK(spec.conv_blocks == std::vector<int>{32, 64});
    CHECK(spec.fc_layers == std::vector<int>{784, 392});
    CHECK(spec.dropout_rate == 0.5);
    CHECK(spec.kernel_size == 3);
}

TEST_CASE("recommendation for the high-information anchor") {
    auto spec = sg::recommend_architecture(kCifar, 32, 32, 3, 10);
    CHECK(spec.conv_blocks == std::vector<int>{32, 64, 128});
    CHECK(spec.fc_layers == std::vector<int>{3072, 1536, 768});
}

TEST_CASE("degenerate geometry is rejected") {
    CHECK_THROWS_AS(sg::recommend_architecture(kCifar, 1, 1, 1, 10), sg::GeometryExhausted);
}

TEST_CASE("halving and doubling rules hold across a metric sweep") {
    for (double me = 0.5; me <= 9.0; me += 0.85) {
        for (double snr = 0.1; snr <= 4.0; snr += 0.45) {
            auto spec = sg::recommend_architecture(metrics(me, snr), 32, 32, 3, 10);
            for (std::size_t i = 1; i < spec.fc_layers.size(); ++i)
                CHECK(spec.fc_layers[i] == spec.fc_layers[i - 1] / 2);
            for (std::size_t i = 1; i < spec.conv_blocks.size(); ++i)
                CHECK(spec.conv_blocks[i] == 2 * spec.conv_blocks[i - 1]);
            CHECK(spec.fc_layers.front() == 32 * 32 * 3);
        }
    }
}

TEST_CASE("conv depth is monotone in each measure") {
    auto depth = [](double me, double snr) {
        return sg::recommend_architecture(metrics(me, snr), 32, 32, 3, 10).conv_blocks.size();
    };
    for (double snr : {0.2, 1.0, 3.0}) {
        std::size_t prev = 0;
        for (double me = 0.5; me <= 9.0; me += 0.25) {
            const std::size_t d = depth(me, snr);
            CHECK(d >= prev);
            prev = d;
        }
    }
    for (double me : {2.0, 5.0, 8.0}) {
        std::size_t prev = 0;
        for (double snr = 0.1; snr <= 4.0; snr += 0.1) {
            const std::size_t d = depth(me, snr);
            CHECK(d >= prev);
            prev = d;
        }
    }
}

TEST_CASE("identical metrics yield identical specs") {
    auto a = sg::recommend_architecture(kMnist, 28, 28, 1, 10);
    auto b = sg::recommend_architecture(kMnist, 28, 28, 1, 10);
    CHECK(a.conv_blocks == b.conv_blocks);
    CHECK(a.fc_layers == b.fc_layers);
}

TEST_CASE("budget cap trims the architecture") {
    auto full = sg::recommend_architecture(kCifar, 32, 32, 3, 10);
    const std::size_t full_params = sg::parameter_count(full);
    // fc_layers[0] is pinned to the input size, so the single-FC spec is the
    // capacity floor; a budget of two thirds forces trimming but stays
    // reachable
    const std::size_t budget = full_params * 2 / 3;
    auto capped = sg::recommend_architecture(kCifar, 32, 32, 3, 10, budget);
    CHECK(sg::parameter_count(capped) <= budget);
    CHECK(sg::parameter_count(capped) < full_params);
    CHECK_FALSE(capped.fc_layers.empty());
    // an impossible budget is refused rather than silently violated
    CHECK_THROWS_AS(sg::recommend_architecture(kCifar, 32, 32, 3, 10, 1000),
                    sg::GeometryExhausted);
}

TEST_CASE("spec JSON round-trips") {
    auto spec = sg::recommend_architecture(kCifar, 32, 32, 3, 10);
    nlohmann::json j = spec;
    auto back = j.get<sg::ArchitectureSpec>();
    CHECK(back.conv_blocks == spec.conv_blocks);
    CHECK(back.fc_layers == spec.fc_layers);
    CHECK(back.input_height == spec.input_height);
    CHECK(back.dropout_rate == spec.dropout_rate);
}

TEST_CASE("parameter_count closed form") {
    sg::ArchitectureSpec spec;
    spec.conv_blocks = {32};
    spec.fc_layers = {784};
    spec.input_height = spec.input_width = 28;
    spec.input_channels = 1;
    spec.num_classes = 10;
    // conv 3*3*1*32+32; dense (14*14*32)*784+784; classifier 784*10+10
    const std::size_t expected = (3 * 3 * 1 * 32 + 32) + (14 * 14 * 32) * 784 + 784 + 784 * 10 + 10;
    CHECK(sg::parameter_count(spec) == expected);
}
