#pragma once

#include <stdexcept>
#include <string>

namespace sg {

struct BadMagic : std::runtime_error {
    explicit BadMagic(const std::string& msg) : std::runtime_error("bad magic: " + msg) {}
};

struct TruncatedFile : std::runtime_error {
    explicit TruncatedFile(const std::string& msg) : std::runtime_error("truncated file: " + msg) {}
};

struct CountMismatch : std::runtime_error {
    explicit CountMismatch(const std::string& msg) : std::runtime_error("count mismatch: " + msg) {}
};

struct BadLabel : std::runtime_error {
    explicit BadLabel(const std::string& msg) : std::runtime_error("bad label: " + msg) {}
};

struct InsufficientData : std::runtime_error {
    explicit InsufficientData(const std::string& msg) : std::runtime_error("insufficient data: " + msg) {}
};

struct EmptyImage : std::runtime_error {
    explicit EmptyImage(const std::string& msg) : std::runtime_error("empty image: " + msg) {}
};

struct EmptyDataset : std::runtime_error {
    explicit EmptyDataset(const std::string& msg) : std::runtime_error("empty dataset: " + msg) {}
};

struct EmptySequence : std::runtime_error {
    explicit EmptySequence(const std::string& msg) : std::runtime_error("empty sequence: " + msg) {}
};

struct ZeroNoise : std::runtime_error {
    explicit ZeroNoise(const std::string& msg) : std::runtime_error("zero noise: " + msg) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error("domain error: " + msg) {}
};

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& msg) : std::runtime_error("shape mismatch: " + msg) {}
};

struct GeometryExhausted : std::runtime_error {
    explicit GeometryExhausted(const std::string& msg) : std::runtime_error("geometry exhausted: " + msg) {}
};

struct UnknownDataset : std::runtime_error {
    explicit UnknownDataset(const std::string& msg) : std::runtime_error("unknown dataset: " + msg) {}
};

struct LengthMismatch : std::runtime_error {
    explicit LengthMismatch(const std::string& msg) : std::runtime_error("length mismatch: " + msg) {}
};

struct TooFewSamples : std::runtime_error {
    explicit TooFewSamples(const std::string& msg) : std::runtime_error("too few samples: " + msg) {}
};

} // namespace sg
