#pragma once

#include <utility>
#include <vector>

#include "chromanoise/errors.hpp"
#include "chromanoise/image.hpp"
#include "chromanoise/rng.hpp"

namespace chromanoise {

/// N_p top-left origins drawn uniformly (with replacement) from the
/// (rows-k+1) x (cols-k+1) grid of valid positions. Single sequential RNG
/// stream: same seed, same origin list, on any platform.
inline std::vector<std::pair<int, int>> sample_patch_origins(int grid_rows, int grid_cols,
                                                             const EstimatorConfig& config) {
    config.validate();
    const int k = config.patch_size;
    if (grid_rows < k || grid_cols < k) {
        throw Error(ErrorKind::ImageTooSmall, "image smaller than patch size");
    }
    const std::uint64_t row_span = static_cast<std::uint64_t>(grid_rows - k + 1);
    const std::uint64_t col_span = static_cast<std::uint64_t>(grid_cols - k + 1);
    Rng rng(config.seed);
    std::vector<std::pair<int, int>> origins;
    origins.reserve(static_cast<std::size_t>(config.num_patches));
    for (int i = 0; i < config.num_patches; ++i) {
        const int r = static_cast<int>(rng.uniform_below(row_span));
        const int c = static_cast<int>(rng.uniform_below(col_span));
        origins.emplace_back(r, c);
    }
    return origins;
}

/// Copies the k x k window at (row, col) out of the image.
inline Patch extract_patch(const RgbImage& image, int row, int col, int k) {
    Patch patch;
    patch.row = row;
    patch.col = col;
    patch.size = k;
    for (int c = 0; c < RgbImage::kChannels; ++c) {
        auto& dst = patch.samples[static_cast<std::size_t>(c)];
        dst.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
        for (int r = 0; r < k; ++r) {
            for (int cc = 0; cc < k; ++cc) {
                dst.push_back(image.at(c, row + r, col + cc));
            }
        }
    }
    return patch;
}

inline std::vector<Patch> sample_patches(const RgbImage& image, const EstimatorConfig& config) {
    const auto origins = sample_patch_origins(image.height(), image.width(), config);
    std::vector<Patch> patches;
    patches.reserve(origins.size());
    for (const auto& [r, c] : origins) {
        patches.push_back(extract_patch(image, r, c, config.patch_size));
    }
    return patches;
}

/// Any-pixel rule: a single sample at or beyond either exposure threshold
/// disqualifies the patch. Saturated samples carry clipped noise, which
/// biases the level estimate low.
inline ExclusionReason exposure_exclusion(const Patch& patch, const EstimatorConfig& config) {
    bool over = false;
    bool under = false;
    for (const auto& channel : patch.samples) {
        for (double v : channel) {
            if (v >= config.exposure_high) over = true;
            if (v <= config.exposure_low) under = true;
        }
    }
    if (over) return ExclusionReason::Overexposed;
    if (under) return ExclusionReason::Underexposed;
    return ExclusionReason::None;
}

}  // namespace chromanoise
