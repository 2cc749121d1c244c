#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "signalgauge/dataset.hpp"
#include "signalgauge/rng.hpp"

namespace sgtest {

// Synthetic labeled dataset with pseudo-random pixels.
inline sg::ImageDataset random_dataset(std::size_t count, int height, int width, int channels,
                                       std::uint64_t seed, int num_classes = 10) {
    sg::ImageDataset ds;
    ds.height = height;
    ds.width = width;
    ds.channels = channels;
    ds.name = "synthetic";
    sg::Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t p = 0; p < std::size_t(height) * width * channels; ++p)
            ds.pixels.push_back(static_cast<std::uint8_t>(rng.next_below(256)));
        ds.labels.push_back(static_cast<std::uint8_t>(rng.next_below(std::uint64_t(num_classes))));
    }
    return ds;
}

// A dataset whose label is recoverable from the mean brightness, so tiny
// networks can actually learn it: class c images have pixel values centered
// on c * 25.
inline sg::ImageDataset separable_dataset(std::size_t count, int height, int width,
                                          std::uint64_t seed, int num_classes = 10) {
    sg::ImageDataset ds;
    ds.height = height;
    ds.width = width;
    ds.channels = 1;
    ds.name = "separable";
    sg::Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const int cls = static_cast<int>(i % std::size_t(num_classes));
        for (int p = 0; p < height * width; ++p) {
            const int noise = static_cast<int>(rng.next_below(11)) - 5;
            int v = cls * 25 + 12 + noise;
            ds.pixels.push_back(static_cast<std::uint8_t>(std::clamp(v, 0, 255)));
        }
        ds.labels.push_back(static_cast<std::uint8_t>(cls));
    }
    return ds;
}

// Brute-force per-pixel disk entropy: independent of the sliding-histogram
// implementation path.
inline double brute_force_local_entropy(const std::vector<std::uint8_t>& img, int height,
                                        int width, int radius) {
    double total = 0.0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            std::vector<int> hist(256, 0);
            int count = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    if (dy * dy + dx * dx > radius * radius)
                        continue;
                    const int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= height || xx < 0 || xx >= width)
                        continue;
                    ++hist[img[std::size_t(yy) * width + xx]];
                    ++count;
                }
            }
            double h = 0.0;
            for (int c : hist) {
                if (c == 0)
                    continue;
                const double p = double(c) / count;
                h -= p * std::log2(p);
            }
            total += h;
        }
    }
    return total / (double(height) * width);
}

// Normalized gradient-check error: |a - f| relative to the larger magnitude,
// floored at 1 to keep near-zero gradients meaningful.
inline double grad_error(double analytic, double numeric) {
    return std::fabs(analytic - numeric) /
           std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
}

} // namespace sgtest
