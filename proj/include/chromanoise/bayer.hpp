#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "chromanoise/errors.hpp"
#include "chromanoise/estimator.hpp"
#include "chromanoise/image.hpp"

namespace chromanoise {

enum class CfaPattern { RGGB, BGGR, GRBG, GBRG };

inline std::string to_string(CfaPattern pattern) {
    switch (pattern) {
        case CfaPattern::RGGB: return "RGGB";
        case CfaPattern::BGGR: return "BGGR";
        case CfaPattern::GRBG: return "GRBG";
        case CfaPattern::GBRG: return "GBRG";
    }
    return "RGGB";
}

inline CfaPattern cfa_pattern_from_string(const std::string& s) {
    if (s == "RGGB") return CfaPattern::RGGB;
    if (s == "BGGR") return CfaPattern::BGGR;
    if (s == "GRBG") return CfaPattern::GRBG;
    if (s == "GBRG") return CfaPattern::GBRG;
    throw Error(ErrorKind::InvalidArgument, "unknown CFA pattern: " + s);
}

/// Channel index (0=R, 1=G, 2=B) of cell (row, col) under the pattern.
inline int cfa_color_at(CfaPattern pattern, int row, int col) {
    static constexpr int kTiles[4][2][2] = {
        {{0, 1}, {1, 2}},  // RGGB
        {{2, 1}, {1, 0}},  // BGGR
        {{1, 0}, {2, 1}},  // GRBG
        {{1, 2}, {0, 1}},  // GBRG
    };
    return kTiles[static_cast<int>(pattern)][row & 1][col & 1];
}

/// Single-plane CFA mosaic, normalized to [0,1]. max_value and black_level
/// record the original integer scale for provenance.
struct BayerFrame {
    int width = 0;
    int height = 0;
    std::vector<double> plane;  // row-major
    CfaPattern pattern = CfaPattern::RGGB;
    int max_value = 65535;
    int black_level = 0;

    BayerFrame() = default;

    BayerFrame(int w, int h, CfaPattern p, double fill = 0.0) : width(w), height(h), pattern(p) {
        validate_dimensions(w, h);
        plane.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }

    static void validate_dimensions(int w, int h) {
        if (w <= 0 || h <= 0) {
            throw Error(ErrorKind::InvalidFrame, "frame dimensions must be positive");
        }
        if (w % 2 != 0 || h % 2 != 0) {
            throw Error(ErrorKind::InvalidFrame, "frame dimensions must be even");
        }
    }

    double& at(int row, int col) {
        return plane[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(col)];
    }
    double at(int row, int col) const {
        return plane[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(col)];
    }
};

/// Half-resolution RGB images anchored at the two green subgroups.
struct SubImagePair {
    RgbImage sub0;  // anchored at greens sharing a row with R cells
    RgbImage sub1;  // anchored at greens sharing a row with B cells
};

namespace detail {

struct TilePosition {
    int row;
    int col;
};

/// Tile positions of the green anchored next to R (G0) and next to B (G1).
inline std::pair<TilePosition, TilePosition> green_anchors(CfaPattern pattern) {
    TilePosition red{};
    TilePosition greens[2];
    int n_greens = 0;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const int color = cfa_color_at(pattern, r, c);
            if (color == 0) red = {r, c};
            if (color == 1) greens[n_greens++] = {r, c};
        }
    }
    if (greens[0].row == red.row) return {greens[0], greens[1]};
    return {greens[1], greens[0]};
}

/// Average of the two cells at (row, col +- 1); replicates the single
/// in-bounds neighbor on the frame border.
inline double horizontal_neighbor_mean(const BayerFrame& frame, int row, int col) {
    const bool left = col - 1 >= 0;
    const bool right = col + 1 < frame.width;
    if (left && right) return 0.5 * (frame.at(row, col - 1) + frame.at(row, col + 1));
    return left ? frame.at(row, col - 1) : frame.at(row, col + 1);
}

inline double vertical_neighbor_mean(const BayerFrame& frame, int row, int col) {
    const bool up = row - 1 >= 0;
    const bool down = row + 1 < frame.height;
    if (up && down) return 0.5 * (frame.at(row - 1, col) + frame.at(row + 1, col));
    return up ? frame.at(row - 1, col) : frame.at(row + 1, col);
}

}  // namespace detail

/// Builds the two half-resolution sub-images. Green planes are pure copies
/// of CFA greens; R and B at each green site average the two adjacent cells
/// of that color. At a G0 site the R cells sit in the same row and the B
/// cells in the same column; at a G1 site the roles transpose.
inline SubImagePair extract_subimages(const BayerFrame& frame) {
    BayerFrame::validate_dimensions(frame.width, frame.height);
    const auto [g0, g1] = detail::green_anchors(frame.pattern);
    const int sub_w = frame.width / 2;
    const int sub_h = frame.height / 2;

    SubImagePair pair{RgbImage(sub_w, sub_h), RgbImage(sub_w, sub_h)};
    for (int i = 0; i < sub_h; ++i) {
        for (int j = 0; j < sub_w; ++j) {
            {
                const int r = 2 * i + g0.row;
                const int c = 2 * j + g0.col;
                pair.sub0.at(0, i, j) = detail::horizontal_neighbor_mean(frame, r, c);
                pair.sub0.at(1, i, j) = frame.at(r, c);
                pair.sub0.at(2, i, j) = detail::vertical_neighbor_mean(frame, r, c);
            }
            {
                const int r = 2 * i + g1.row;
                const int c = 2 * j + g1.col;
                pair.sub1.at(0, i, j) = detail::vertical_neighbor_mean(frame, r, c);
                pair.sub1.at(1, i, j) = frame.at(r, c);
                pair.sub1.at(2, i, j) = detail::horizontal_neighbor_mean(frame, r, c);
            }
        }
    }
    return pair;
}

/// Concatenates the k x k windows of both sub-images at each sampled origin
/// into one patch of 2*k*k samples per channel.
inline std::vector<Patch> sample_raw_patches(const SubImagePair& pair,
                                             const EstimatorConfig& config) {
    if (!pair.sub0.same_dimensions(pair.sub1)) {
        throw Error(ErrorKind::InvalidFrame, "sub-images must share dimensions");
    }
    const auto origins = sample_patch_origins(pair.sub0.height(), pair.sub0.width(), config);
    const int k = config.patch_size;
    std::vector<Patch> patches;
    patches.reserve(origins.size());
    for (const auto& [row, col] : origins) {
        Patch patch;
        patch.row = row;
        patch.col = col;
        patch.size = k;
        for (int c = 0; c < RgbImage::kChannels; ++c) {
            auto& dst = patch.samples[static_cast<std::size_t>(c)];
            dst.reserve(2 * static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
            for (int r = 0; r < k; ++r) {
                for (int cc = 0; cc < k; ++cc) dst.push_back(pair.sub0.at(c, row + r, col + cc));
            }
            for (int r = 0; r < k; ++r) {
                for (int cc = 0; cc < k; ++cc) dst.push_back(pair.sub1.at(c, row + r, col + cc));
            }
        }
        patches.push_back(std::move(patch));
    }
    return patches;
}

/// RAW pipeline: sub-image extraction, concatenated patches, 9/4 factor.
/// The loss of a concatenated patch is the mean of the two window losses on
/// the independently blurred sub-images.
inline EstimateReport estimate_noise_raw(const BayerFrame& frame, const EstimatorConfig& config,
                                         int threads = 1) {
    config.validate();
    if (frame.width < 2 * config.patch_size || frame.height < 2 * config.patch_size) {
        throw Error(ErrorKind::ImageTooSmall, "frame smaller than twice the patch size");
    }
    const SubImagePair pair = extract_subimages(frame);
    const RgbImage blurred0 = gaussian_blur(pair.sub0, config.blur_sigma, threads);
    const RgbImage blurred1 = gaussian_blur(pair.sub1, config.blur_sigma, threads);
    const std::vector<Patch> patches = sample_raw_patches(pair, config);

    std::vector<PatchStats> stats(patches.size());
    parallel_for(0, static_cast<std::int64_t>(patches.size()), threads, [&](std::int64_t i) {
        const Patch& patch = patches[static_cast<std::size_t>(i)];
        PatchStats& s = stats[static_cast<std::size_t>(i)];
        s.row = patch.row;
        s.col = patch.col;
        s.excluded = exposure_exclusion(patch, config);
        if (s.excluded != ExclusionReason::None) return;
        s.alpha = compute_alpha(patch);
        s.beta = compute_beta(patch);
        s.sigma2 = 2.25 * (s.alpha - s.beta);
        s.loss = 0.5 * (compute_patch_loss(blurred0, patch.row, patch.col, patch.size) +
                        compute_patch_loss(blurred1, patch.row, patch.col, patch.size));
    });

    return detail::finalize_report(std::move(stats), config, PatchMode::Raw);
}

}  // namespace chromanoise
