#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chromanoise/errors.hpp"

namespace chromanoise {

/// Planar 3-channel image, channel order R,G,B, row-major planes.
/// Normalized images keep every sample in [0,1]; loaders and degraders
/// enforce that, while synthetic intermediates are free to hold any value.
class RgbImage {
public:
    static constexpr int kChannels = 3;

    RgbImage() = default;

    RgbImage(int width, int height, double fill = 0.0)
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0) {
            throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
        }
        const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
        for (auto& p : planes_) p.assign(n, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    std::span<double> plane(int c) { return planes_[static_cast<std::size_t>(c)]; }
    std::span<const double> plane(int c) const { return planes_[static_cast<std::size_t>(c)]; }

    double& at(int c, int row, int col) {
        return planes_[static_cast<std::size_t>(c)]
                      [static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(col)];
    }
    double at(int c, int row, int col) const {
        return planes_[static_cast<std::size_t>(c)]
                      [static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(col)];
    }

    bool same_dimensions(const RgbImage& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::array<std::vector<double>, kChannels> planes_;
};

/// Parameters of the estimation pipeline. Defaults follow the reference
/// configuration: gamma 2.0, 5x5 patches, 1000 patches, blur sigma 5.0.
struct EstimatorConfig {
    double gamma = 2.0;
    int patch_size = 5;
    int num_patches = 1000;
    double blur_sigma = 5.0;
    std::uint64_t seed = 1;
    double exposure_low = 2.0 / 255.0;
    double exposure_high = 253.0 / 255.0;

    void validate() const {
        if (gamma < 0.0) {
            throw Error(ErrorKind::InvalidArgument, "gamma must be >= 0");
        }
        if (patch_size < 2) {
            throw Error(ErrorKind::InvalidArgument, "patch size must be >= 2");
        }
        if (num_patches < 1) {
            throw Error(ErrorKind::InvalidArgument, "patch count must be >= 1");
        }
        if (!(blur_sigma > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "blur sigma must be > 0");
        }
        if (!(exposure_low < exposure_high)) {
            throw Error(ErrorKind::InvalidArgument, "exposure_low must be < exposure_high");
        }
    }
};

enum class ExclusionReason { None, Overexposed, Underexposed };

inline std::string to_string(ExclusionReason reason) {
    switch (reason) {
        case ExclusionReason::Overexposed: return "overexposed";
        case ExclusionReason::Underexposed: return "underexposed";
        case ExclusionReason::None: break;
    }
    return "none";
}

inline ExclusionReason exclusion_reason_from_string(const std::string& s) {
    if (s == "overexposed") return ExclusionReason::Overexposed;
    if (s == "underexposed") return ExclusionReason::Underexposed;
    if (s == "none") return ExclusionReason::None;
    throw Error(ErrorKind::InvalidArgument, "unknown exclusion reason: " + s);
}

/// A sampled window. RGB patches carry k*k samples per channel; concatenated
/// RAW patches carry 2*k*k (the two sub-image windows back to back).
struct Patch {
    int row = 0;  // origin in the source grid
    int col = 0;
    int size = 0;
    std::array<std::vector<double>, RgbImage::kChannels> samples;
};

struct PatchStats {
    int row = 0;
    int col = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double sigma2 = 0.0;
    double loss = 0.0;
    double weight = 0.0;
    ExclusionReason excluded = ExclusionReason::None;
};

}  // namespace chromanoise
