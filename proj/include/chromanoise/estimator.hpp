#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "chromanoise/filtering.hpp"
#include "chromanoise/image.hpp"
#include "chromanoise/parallel.hpp"
#include "chromanoise/patches.hpp"
#include "chromanoise/stats.hpp"

namespace chromanoise {

enum class PatchMode { Rgb, Raw };

inline std::string to_string(PatchMode mode) {
    return mode == PatchMode::Raw ? "raw" : "rgb";
}

/// Mean of the three per-channel sample variances in the patch.
inline double compute_alpha(const Patch& patch) {
    CompensatedSum s;
    for (const auto& channel : patch.samples) s.add(sample_variance(channel));
    return s.value() / 3.0;
}

/// Sample variance of the per-pixel channel mean (R+G+B)/3.
inline double compute_beta(const Patch& patch) {
    const std::size_t n = patch.samples[0].size();
    std::vector<double> mean_image(n);
    for (std::size_t i = 0; i < n; ++i) {
        mean_image[i] = (patch.samples[0][i] + patch.samples[1][i] + patch.samples[2][i]) / 3.0;
    }
    return sample_variance(mean_image);
}

/// Per-patch noise-variance estimate: 3/2 (alpha - beta) for RGB patches,
/// 9/4 for concatenated RAW patches whose interpolated R/B planes carry
/// half the photosite noise. Not clamped: alpha >= beta holds for any
/// sample values (Cauchy-Schwarz), so the value is nonnegative up to
/// floating-point dust.
inline double estimate_patch_sigma2(const Patch& patch, PatchMode mode) {
    const double factor = mode == PatchMode::Raw ? 2.25 : 1.5;
    return factor * (compute_alpha(patch) - compute_beta(patch));
}

/// Mean variance of the pairwise channel differences over the k x k window
/// at (row, col) of an already-blurred image. Measures how far the window
/// is from having constant channel differences.
inline double compute_patch_loss(const RgbImage& blurred, int row, int col, int k) {
    const std::size_t n = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
    if (n < 2) {
        throw Error(ErrorKind::DegeneratePatch, "loss window needs at least two samples");
    }
    std::vector<double> d0(n), d1(n), d2(n);
    std::size_t i = 0;
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c, ++i) {
            const double red = blurred.at(0, row + r, col + c);
            const double green = blurred.at(1, row + r, col + c);
            const double blue = blurred.at(2, row + r, col + c);
            d0[i] = red - green;
            d1[i] = green - blue;
            d2[i] = blue - red;
        }
    }
    return (sample_variance(d0) + sample_variance(d1) + sample_variance(d2)) / 3.0;
}

/// w_i = exp(-gamma * L_i / mean(L)). A zero mean loss (image satisfies the
/// constant-difference condition everywhere) degenerates to uniform weights.
inline std::vector<double> compute_weights(const std::vector<double>& losses, double gamma) {
    if (losses.empty()) {
        throw Error(ErrorKind::NoUsablePatches, "no losses to weight");
    }
    if (gamma < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "gamma must be >= 0");
    }
    CompensatedSum total;
    for (double l : losses) total.add(l);
    const double mean_loss = total.value() / static_cast<double>(losses.size());
    std::vector<double> weights(losses.size());
    if (mean_loss <= 0.0) {
        std::fill(weights.begin(), weights.end(), 1.0);
        return weights;
    }
    for (std::size_t i = 0; i < losses.size(); ++i) {
        weights[i] = std::exp(-gamma * losses[i] / mean_loss);
    }
    return weights;
}

/// Weighted mean of per-patch sigma2 over non-excluded patches, accumulated
/// in patch-index order with compensated sums.
inline double aggregate_weighted(const std::vector<PatchStats>& stats) {
    CompensatedSum numerator;
    CompensatedSum denominator;
    bool any = false;
    for (const auto& s : stats) {
        if (s.excluded != ExclusionReason::None) continue;
        numerator.add(s.weight * s.sigma2);
        denominator.add(s.weight);
        any = true;
    }
    if (!any) {
        throw Error(ErrorKind::NoUsablePatches, "every patch was excluded");
    }
    return numerator.value() / denominator.value();
}

struct EstimateReport {
    double sigma = 0.0;
    double sigma2 = 0.0;
    int patches_used = 0;
    int patches_excluded = 0;
    double mean_loss = 0.0;  // normalization factor over usable patches
    PatchMode mode = PatchMode::Rgb;
    EstimatorConfig config;
    std::vector<PatchStats> per_patch;
};

namespace detail {

/// Weights, aggregate and bookkeeping shared by the RGB and RAW pipelines.
/// Losses of excluded patches stay out of the normalization factor.
inline EstimateReport finalize_report(std::vector<PatchStats> stats, const EstimatorConfig& config,
                                      PatchMode mode) {
    std::vector<double> usable_losses;
    usable_losses.reserve(stats.size());
    for (const auto& s : stats) {
        if (s.excluded == ExclusionReason::None) usable_losses.push_back(s.loss);
    }
    if (usable_losses.empty()) {
        throw Error(ErrorKind::NoUsablePatches, "every patch was excluded");
    }
    const auto weights = compute_weights(usable_losses, config.gamma);
    CompensatedSum loss_sum;
    for (double l : usable_losses) loss_sum.add(l);

    std::size_t w = 0;
    for (auto& s : stats) {
        if (s.excluded == ExclusionReason::None) s.weight = weights[w++];
    }

    EstimateReport report;
    report.mode = mode;
    report.config = config;
    report.mean_loss = loss_sum.value() / static_cast<double>(usable_losses.size());
    report.sigma2 = aggregate_weighted(stats);
    report.sigma = std::sqrt(std::max(report.sigma2, 0.0));
    report.patches_used = static_cast<int>(usable_losses.size());
    report.patches_excluded = static_cast<int>(stats.size()) - report.patches_used;
    report.per_patch = std::move(stats);
    return report;
}

}  // namespace detail

/// Full pipeline: blur once, sample N_p patches, exclude saturated ones,
/// compute per-patch statistics, weight by loss, aggregate. Deterministic
/// for a fixed seed and independent of `threads`.
inline EstimateReport estimate_noise(const RgbImage& image, const EstimatorConfig& config,
                                     int threads = 1) {
    config.validate();
    if (image.width() < config.patch_size || image.height() < config.patch_size) {
        throw Error(ErrorKind::ImageTooSmall, "image smaller than patch size");
    }
    const RgbImage blurred = gaussian_blur(image, config.blur_sigma, threads);
    const std::vector<Patch> patches = sample_patches(image, config);

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
        s.sigma2 = 1.5 * (s.alpha - s.beta);
        s.loss = compute_patch_loss(blurred, patch.row, patch.col, patch.size);
    });

    return detail::finalize_report(std::move(stats), config, PatchMode::Rgb);
}

}  // namespace chromanoise
