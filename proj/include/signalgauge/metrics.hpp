#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"

namespace sg {

// Per-channel and aggregate information measures of a dataset or class.
// me_bits_per_pixel is the dataset-averaged disk-neighborhood local entropy;
// snr is mean pixel intensity over the standard deviation of pixel intensity.
struct SignalMetrics {
    double me_bits_per_pixel = 0.0;
    double snr = 0.0;
    std::vector<double> per_channel_me;
    std::vector<double> per_channel_snr;
    double signal_mean = 0.0; // pooled over all channels
    double signal_std = 0.0;
    std::size_t image_count = 0;
};

// How pixels are pooled for SNR. Pooled: one mean/std over every pixel of the
// channel across all images. PerImage: per-image SNR averaged over images.
enum class SnrPooling { Pooled, PerImage };

// Hartley information ceiling: `choices` independent selections from
// `symbols` equiprobable symbols carry choices * log2(symbols) bits.
inline double hartley_bound(std::uint64_t symbols, std::uint64_t choices) {
    if (symbols < 1 || choices < 1)
        throw DomainError("hartley_bound requires symbols >= 1 and choices >= 1");
    return static_cast<double>(choices) * std::log2(static_cast<double>(symbols));
}

namespace detail {

// c * log2(c) lookup for histogram counts, c = 0 mapped to 0.
inline const std::vector<double>& clog2_table(std::size_t max_count) {
    static thread_local std::vector<double> table;
    if (table.size() < max_count + 1) {
        std::size_t old = table.size();
        table.resize(max_count + 1);
        if (old == 0) {
            table[0] = 0.0;
            old = 1;
        }
        for (std::size_t c = old; c <= max_count; ++c)
            table[c] = static_cast<double>(c) * std::log2(static_cast<double>(c));
    }
    return table;
}

} // namespace detail

// Mean over all pixels of the Shannon entropy of the gray-level histogram in
// a disk neighborhood (dx^2 + dy^2 <= radius^2, clipped at image borders).
// Runs a sliding histogram along each row; entropy is recovered from the
// running sum S = sum c*log2(c) as log2(N) - S/N.
inline double local_entropy_image(const std::uint8_t* img, int height, int width, int radius) {
    if (height <= 0 || width <= 0)
        throw EmptyImage("local_entropy_image on empty raster");
    if (radius < 1)
        throw DomainError("neighborhood radius must be >= 1");

    std::vector<int> halfwidth(2 * static_cast<std::size_t>(radius) + 1);
    for (int dy = -radius; dy <= radius; ++dy)
        halfwidth[static_cast<std::size_t>(dy + radius)] =
            static_cast<int>(std::floor(std::sqrt(double(radius) * radius - double(dy) * dy)));

    const std::size_t max_area = (2 * std::size_t(radius) + 1) * (2 * std::size_t(radius) + 1);
    const auto& clog2 = detail::clog2_table(max_area);

    std::array<int, 256> hist{};
    double entropy_sum = 0.0;

    for (int y = 0; y < height; ++y) {
        hist.fill(0);
        int count = 0;
        double s = 0.0;
        auto add = [&](std::uint8_t v) {
            int& c = hist[v];
            s += clog2[static_cast<std::size_t>(c + 1)] - clog2[static_cast<std::size_t>(c)];
            ++c;
            ++count;
        };
        auto remove = [&](std::uint8_t v) {
            int& c = hist[v];
            s += clog2[static_cast<std::size_t>(c - 1)] - clog2[static_cast<std::size_t>(c)];
            --c;
            --count;
        };

        for (int dy = -radius; dy <= radius; ++dy) {
            const int yy = y + dy;
            if (yy < 0 || yy >= height)
                continue;
            const int hw = halfwidth[static_cast<std::size_t>(dy + radius)];
            const int hi = std::min(hw, width - 1);
            for (int xx = 0; xx <= hi; ++xx)
                add(img[yy * width + xx]);
        }
        entropy_sum += std::log2(double(count)) - s / double(count);

        for (int x = 1; x < width; ++x) {
            for (int dy = -radius; dy <= radius; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= height)
                    continue;
                const int hw = halfwidth[static_cast<std::size_t>(dy + radius)];
                const int left = x - 1 - hw;
                if (left >= 0)
                    remove(img[yy * width + left]);
                const int right = x + hw;
                if (right < width)
                    add(img[yy * width + right]);
            }
            entropy_sum += std::log2(double(count)) - s / double(count);
        }
    }
    return entropy_sum / (double(height) * double(width));
}

inline double local_entropy_image(const std::vector<std::uint8_t>& img, int height, int width,
                                  int radius) {
    if (img.empty())
        throw EmptyImage("local_entropy_image on empty raster");
    return local_entropy_image(img.data(), height, width, radius);
}

// Arithmetic mean of pixel values, Kahan-compensated.
inline double signal_mean(std::span<const std::uint8_t> pixels) {
    if (pixels.empty())
        throw EmptySequence("signal_mean of empty sequence");
    double sum = 0.0, comp = 0.0;
    for (std::uint8_t v : pixels) {
        double y = double(v) - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / double(pixels.size());
}

// Population standard deviation (divisor n) about the supplied mean.
inline double signal_std(std::span<const std::uint8_t> pixels, double mean) {
    if (pixels.empty())
        throw EmptySequence("signal_std of empty sequence");
    double sum = 0.0, comp = 0.0;
    for (std::uint8_t v : pixels) {
        double d = double(v) - mean;
        double y = d * d - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return std::sqrt(sum / double(pixels.size()));
}

// Per-channel ME = mean over images of the disk local entropy; the aggregate
// is the mean of the channel values. radius <= 0 selects the default
// neighborhood, a disk whose radius equals the image side length.
inline SignalMetrics dataset_me(const ImageDataset& ds, int radius = 0) {
    if (ds.empty())
        throw EmptyDataset("dataset_me");
    const int r = radius > 0 ? radius : std::max(ds.height, ds.width);

    SignalMetrics m;
    m.image_count = ds.size();
    m.per_channel_me.assign(static_cast<std::size_t>(ds.channels), 0.0);
    std::vector<std::uint8_t> plane;
    for (int c = 0; c < ds.channels; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            ds.channel_plane(i, c, plane);
            sum += local_entropy_image(plane.data(), ds.height, ds.width, r);
        }
        m.per_channel_me[static_cast<std::size_t>(c)] = sum / double(ds.size());
    }
    double total = 0.0;
    for (double v : m.per_channel_me)
        total += v;
    m.me_bits_per_pixel = total / double(ds.channels);
    return m;
}

// Per-channel SNR = mean / std over that channel's pixels; aggregate is the
// mean of channel SNRs. Pooled mode pools pixels across all images.
inline SignalMetrics dataset_snr(const ImageDataset& ds, SnrPooling pooling = SnrPooling::Pooled) {
    if (ds.empty())
        throw EmptyDataset("dataset_snr");

    SignalMetrics m;
    m.image_count = ds.size();
    std::vector<std::uint8_t> plane;
    const std::size_t plane_px = static_cast<std::size_t>(ds.height) * ds.width;

    for (int c = 0; c < ds.channels; ++c) {
        if (pooling == SnrPooling::Pooled) {
            std::vector<std::uint8_t> pooled;
            pooled.reserve(plane_px * ds.size());
            for (std::size_t i = 0; i < ds.size(); ++i) {
                ds.channel_plane(i, c, plane);
                pooled.insert(pooled.end(), plane.begin(), plane.end());
            }
            const double mu = signal_mean(pooled);
            const double sigma = signal_std(pooled, mu);
            if (sigma == 0.0)
                throw ZeroNoise("channel " + std::to_string(c) + " is constant");
            m.per_channel_snr.push_back(mu / sigma);
        } else {
            double sum = 0.0;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                ds.channel_plane(i, c, plane);
                const double mu = signal_mean(plane);
                const double sigma = signal_std(plane, mu);
                if (sigma == 0.0)
                    throw ZeroNoise("image " + std::to_string(i) + " channel " +
                                    std::to_string(c) + " is constant");
                sum += mu / sigma;
            }
            m.per_channel_snr.push_back(sum / double(ds.size()));
        }
    }
    double total = 0.0;
    for (double v : m.per_channel_snr)
        total += v;
    m.snr = total / double(ds.channels);

    // pooled moments over every pixel regardless of channel
    m.signal_mean = signal_mean(ds.pixels);
    m.signal_std = signal_std(ds.pixels, m.signal_mean);
    return m;
}

// Full metrics (ME + SNR) in one structure.
inline SignalMetrics dataset_metrics(const ImageDataset& ds, int radius = 0,
                                     SnrPooling pooling = SnrPooling::Pooled) {
    SignalMetrics me = dataset_me(ds, radius);
    SignalMetrics snr = dataset_snr(ds, pooling);
    snr.me_bits_per_pixel = me.me_bits_per_pixel;
    snr.per_channel_me = std::move(me.per_channel_me);
    return snr;
}

// Per-class metrics. Errors (empty class, zero noise) are reported in the
// entry rather than aborting the whole map.
struct ClassMetrics {
    bool ok = false;
    std::string error;
    SignalMetrics metrics;
};

inline std::map<int, ClassMetrics> per_class_metrics(const ImageDataset& ds, int radius = 0,
                                                     SnrPooling pooling = SnrPooling::Pooled) {
    if (ds.empty())
        throw EmptyDataset("per_class_metrics");

    std::array<bool, kNumClasses> present{};
    for (std::uint8_t l : ds.labels)
        present[l] = true;

    std::map<int, ClassMetrics> out;
    for (int cls = 0; cls < kNumClasses; ++cls) {
        if (!present[static_cast<std::size_t>(cls)])
            continue;
        ImageDataset part;
        part.height = ds.height;
        part.width = ds.width;
        part.channels = ds.channels;
        part.name = ds.name + "-class" + std::to_string(cls);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (ds.labels[i] != cls)
                continue;
            auto im = ds.image(i);
            part.pixels.insert(part.pixels.end(), im.begin(), im.end());
            part.labels.push_back(ds.labels[i]);
        }
        ClassMetrics cm;
        if (part.empty()) {
            cm.error = "empty class";
        } else {
            try {
                cm.metrics = dataset_metrics(part, radius, pooling);
                cm.ok = true;
            } catch (const std::exception& e) {
                cm.error = e.what();
            }
        }
        out.emplace(cls, std::move(cm));
    }
    return out;
}

} // namespace sg
