#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace sg {

constexpr std::uint32_t kIdxImageMagic = 0x00000803; // 2051
constexpr std::uint32_t kIdxLabelMagic = 0x00000801; // 2049
constexpr std::size_t kCifarRecordBytes = 3073;      // label + 3 x 1024 channel planes
constexpr int kNumClasses = 10;

// Labeled raster images, all sharing one geometry. Pixels are stored in a
// single contiguous buffer, row-major, channels interleaved per pixel (HWC).
// Immutable after construction; safe to share across threads.
struct ImageDataset {
    std::vector<std::uint8_t> pixels;
    std::vector<std::uint8_t> labels;
    int height = 0;
    int width = 0;
    int channels = 0;
    std::string name;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }
    std::size_t image_bytes() const {
        return static_cast<std::size_t>(height) * width * channels;
    }
    std::span<const std::uint8_t> image(std::size_t i) const {
        return {pixels.data() + i * image_bytes(), image_bytes()};
    }

    // Extracts one channel of image i as a packed plane (row-major).
    void channel_plane(std::size_t i, int c, std::vector<std::uint8_t>& out) const {
        out.resize(static_cast<std::size_t>(height) * width);
        const std::uint8_t* src = pixels.data() + i * image_bytes() + c;
        for (std::size_t p = 0; p < out.size(); ++p)
            out[p] = src[p * channels];
    }
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw TruncatedFile(path + " cannot be opened");
    f.seekg(0, std::ios::end);
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(f.tellg()));
    f.seekg(0);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    return buf;
}

inline std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void put_be32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(static_cast<std::uint8_t>(x >> 24));
    v.push_back(static_cast<std::uint8_t>(x >> 16));
    v.push_back(static_cast<std::uint8_t>(x >> 8));
    v.push_back(static_cast<std::uint8_t>(x));
}

} // namespace detail

// MNIST IDX loader. Big-endian headers, image magic 2051, label magic 2049.
inline ImageDataset load_mnist(const std::string& image_path, const std::string& label_path) {
    auto img = detail::read_file(image_path);
    auto lbl = detail::read_file(label_path);
    if (img.size() < 16)
        throw TruncatedFile(image_path + " shorter than IDX image header");
    if (lbl.size() < 8)
        throw TruncatedFile(label_path + " shorter than IDX label header");
    if (detail::be32(img.data()) != kIdxImageMagic)
        throw BadMagic(image_path + " is not an IDX image file");
    if (detail::be32(lbl.data()) != kIdxLabelMagic)
        throw BadMagic(label_path + " is not an IDX label file");

    const std::uint32_t n_images = detail::be32(img.data() + 4);
    const std::uint32_t rows = detail::be32(img.data() + 8);
    const std::uint32_t cols = detail::be32(img.data() + 12);
    const std::uint32_t n_labels = detail::be32(lbl.data() + 4);
    if (n_images != n_labels)
        throw CountMismatch(std::to_string(n_images) + " images vs " +
                            std::to_string(n_labels) + " labels");
    const std::size_t payload = std::size_t(n_images) * rows * cols;
    if (img.size() < 16 + payload)
        throw TruncatedFile(image_path + " payload shorter than header claims");
    if (lbl.size() < 8 + n_labels)
        throw TruncatedFile(label_path + " payload shorter than header claims");

    ImageDataset ds;
    ds.height = static_cast<int>(rows);
    ds.width = static_cast<int>(cols);
    ds.channels = 1;
    ds.name = "mnist";
    ds.pixels.assign(img.begin() + 16, img.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
    ds.labels.assign(lbl.begin() + 8, lbl.begin() + 8 + n_labels);
    return ds;
}

// CIFAR-10 binary batches: 3073-byte records, label byte then planar R/G/B.
// Planes are de-interleaved into per-pixel RGB; records concatenate across
// files in argument order.
inline ImageDataset load_cifar10(const std::vector<std::string>& batch_paths) {
    ImageDataset ds;
    ds.height = 32;
    ds.width = 32;
    ds.channels = 3;
    ds.name = "cifar10";
    for (const auto& path : batch_paths) {
        auto buf = detail::read_file(path);
        if (buf.size() % kCifarRecordBytes != 0)
            throw TruncatedFile(path + " length is not a multiple of 3073");
        const std::size_t n = buf.size() / kCifarRecordBytes;
        for (std::size_t r = 0; r < n; ++r) {
            const std::uint8_t* rec = buf.data() + r * kCifarRecordBytes;
            if (rec[0] > 9)
                throw BadLabel(path + " record " + std::to_string(r) + " has label " +
                               std::to_string(rec[0]));
            ds.labels.push_back(rec[0]);
            const std::uint8_t* planes = rec + 1;
            for (std::size_t p = 0; p < 1024; ++p) {
                ds.pixels.push_back(planes[p]);
                ds.pixels.push_back(planes[1024 + p]);
                ds.pixels.push_back(planes[2048 + p]);
            }
        }
    }
    return ds;
}

// Writers for the same two formats (round-trip fixtures and synthetic data).
inline void save_idx(const ImageDataset& ds, const std::string& image_path,
                     const std::string& label_path) {
    std::vector<std::uint8_t> img;
    detail::put_be32(img, kIdxImageMagic);
    detail::put_be32(img, static_cast<std::uint32_t>(ds.size()));
    detail::put_be32(img, static_cast<std::uint32_t>(ds.height));
    detail::put_be32(img, static_cast<std::uint32_t>(ds.width));
    img.insert(img.end(), ds.pixels.begin(), ds.pixels.end());

    std::vector<std::uint8_t> lbl;
    detail::put_be32(lbl, kIdxLabelMagic);
    detail::put_be32(lbl, static_cast<std::uint32_t>(ds.size()));
    lbl.insert(lbl.end(), ds.labels.begin(), ds.labels.end());

    std::ofstream fi(image_path, std::ios::binary);
    fi.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
    std::ofstream fl(label_path, std::ios::binary);
    fl.write(reinterpret_cast<const char*>(lbl.data()), static_cast<std::streamsize>(lbl.size()));
}

inline void save_cifar10(const ImageDataset& ds, const std::string& path) {
    std::vector<std::uint8_t> buf;
    buf.reserve(ds.size() * kCifarRecordBytes);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        buf.push_back(ds.labels[i]);
        auto im = ds.image(i);
        for (int c = 0; c < 3; ++c)
            for (std::size_t p = 0; p < 1024; ++p)
                buf.push_back(im[p * 3 + static_cast<std::size_t>(c)]);
    }
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

// Deterministic shuffled split: Fisher-Yates permutation under `seed`, first
// train_count images to train, next val_count to validation.
inline std::pair<ImageDataset, ImageDataset> split_shuffle(const ImageDataset& ds,
                                                           std::size_t train_count,
                                                           std::size_t val_count,
                                                           std::uint64_t seed) {
    if (train_count + val_count > ds.size())
        throw InsufficientData("requested " + std::to_string(train_count + val_count) +
                               " of " + std::to_string(ds.size()) + " images");
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    auto take = [&](std::size_t begin, std::size_t count, const std::string& suffix) {
        ImageDataset out;
        out.height = ds.height;
        out.width = ds.width;
        out.channels = ds.channels;
        out.name = ds.name + suffix;
        out.pixels.reserve(count * ds.image_bytes());
        out.labels.reserve(count);
        for (std::size_t i = begin; i < begin + count; ++i) {
            auto im = ds.image(order[i]);
            out.pixels.insert(out.pixels.end(), im.begin(), im.end());
            out.labels.push_back(ds.labels[order[i]]);
        }
        return out;
    };
    return {take(0, train_count, "-train"), take(train_count, val_count, "-val")};
}

// Prefix subset without shuffling (smoke tests, --subset runs).
inline ImageDataset take_prefix(const ImageDataset& ds, std::size_t count) {
    if (count > ds.size())
        throw InsufficientData("prefix of " + std::to_string(count) + " from " +
                               std::to_string(ds.size()));
    ImageDataset out;
    out.height = ds.height;
    out.width = ds.width;
    out.channels = ds.channels;
    out.name = ds.name;
    out.pixels.assign(ds.pixels.begin(),
                      ds.pixels.begin() + static_cast<std::ptrdiff_t>(count * ds.image_bytes()));
    out.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(count));
    return out;
}

} // namespace sg
