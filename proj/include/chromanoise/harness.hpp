#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "chromanoise/bayer.hpp"
#include "chromanoise/estimator.hpp"
#include "chromanoise/filtering.hpp"
#include "chromanoise/image.hpp"
#include "chromanoise/rng.hpp"
#include "chromanoise/stats.hpp"

namespace chromanoise {

using ImageStack = std::vector<RgbImage>;
using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Adds i.i.d. zero-mean Gaussian noise per sample per channel, then clamps
/// to [0,1]. sigma = 0 returns the image untouched.
inline RgbImage degrade_gaussian(const RgbImage& image, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "noise sigma must be >= 0");
    }
    RgbImage out = image;
    if (sigma == 0.0) return out;
    Rng rng(seed);
    for (int c = 0; c < RgbImage::kChannels; ++c) {
        for (double& v : out.plane(c)) {
            v = std::clamp(v + sigma * rng.gaussian(), 0.0, 1.0);
        }
    }
    return out;
}

/// Noise injector with cross-channel mixing: the per-pixel noise vector is
/// `mix * n` for i.i.d. standard normal n, scaled by sigma. Emulates the
/// channel-correlated noise that in-camera processing produces.
inline RgbImage degrade_gaussian_mixed(const RgbImage& image, double sigma, const Matrix3& mix,
                                       std::uint64_t seed) {
    if (sigma < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "noise sigma must be >= 0");
    }
    RgbImage out = image;
    if (sigma == 0.0) return out;
    Rng rng(seed);
    const std::size_t n = image.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const double n0 = rng.gaussian();
        const double n1 = rng.gaussian();
        const double n2 = rng.gaussian();
        for (int c = 0; c < RgbImage::kChannels; ++c) {
            const auto& row = mix[static_cast<std::size_t>(c)];
            const double mixed = row[0] * n0 + row[1] * n1 + row[2] * n2;
            double& v = out.plane(c)[i];
            v = std::clamp(v + sigma * mixed, 0.0, 1.0);
        }
    }
    return out;
}

/// Photosite noise on a mosaic plane.
inline BayerFrame degrade_bayer_gaussian(const BayerFrame& frame, double sigma,
                                         std::uint64_t seed) {
    if (sigma < 0.0) {
        throw Error(ErrorKind::InvalidArgument, "noise sigma must be >= 0");
    }
    BayerFrame out = frame;
    if (sigma == 0.0) return out;
    Rng rng(seed);
    for (double& v : out.plane) {
        v = std::clamp(v + sigma * rng.gaussian(), 0.0, 1.0);
    }
    return out;
}

/// Stack recipe: per-pixel (and per-channel) sample variance across frames,
/// then the square root of the mean of those variances.
inline double ground_truth_from_stack(const ImageStack& stack) {
    if (stack.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "stack needs at least two frames");
    }
    for (const auto& frame : stack) {
        if (!frame.same_dimensions(stack.front())) {
            throw Error(ErrorKind::InvalidArgument, "stack frames must share dimensions");
        }
    }
    const std::size_t n = stack.front().pixel_count();
    const double m = static_cast<double>(stack.size());
    CompensatedSum total;
    std::vector<double> values(stack.size());
    for (int c = 0; c < RgbImage::kChannels; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            CompensatedSum mean_sum;
            for (std::size_t f = 0; f < stack.size(); ++f) {
                values[f] = stack[f].plane(c)[i];
                mean_sum.add(values[f]);
            }
            const double mean = mean_sum.value() / m;
            CompensatedSum dev_sum;
            for (double v : values) dev_sum.add((v - mean) * (v - mean));
            total.add(dev_sum.value() / (m - 1.0));
        }
    }
    const double mean_variance = total.value() / (3.0 * static_cast<double>(n));
    return std::sqrt(std::max(mean_variance, 0.0));
}

/// Same recipe over single-plane CFA frames.
inline double ground_truth_from_stack(const std::vector<BayerFrame>& stack) {
    if (stack.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "stack needs at least two frames");
    }
    for (const auto& frame : stack) {
        if (frame.width != stack.front().width || frame.height != stack.front().height) {
            throw Error(ErrorKind::InvalidArgument, "stack frames must share dimensions");
        }
    }
    const std::size_t n = stack.front().plane.size();
    const double m = static_cast<double>(stack.size());
    CompensatedSum total;
    std::vector<double> values(stack.size());
    for (std::size_t i = 0; i < n; ++i) {
        CompensatedSum mean_sum;
        for (std::size_t f = 0; f < stack.size(); ++f) {
            values[f] = stack[f].plane[i];
            mean_sum.add(values[f]);
        }
        const double mean = mean_sum.value() / m;
        CompensatedSum dev_sum;
        for (double v : values) dev_sum.add((v - mean) * (v - mean));
        total.add(dev_sum.value() / (m - 1.0));
    }
    return std::sqrt(std::max(total.value() / static_cast<double>(n), 0.0));
}

struct NoiseCorrelation {
    double rg = 0.0;
    double gb = 0.0;
    double br = 0.0;
};

/// Pearson correlation of the per-channel noise planes (noisy - reference)
/// for each channel pair.
inline NoiseCorrelation noise_correlation(const RgbImage& noisy, const RgbImage& reference) {
    if (!noisy.same_dimensions(reference)) {
        throw Error(ErrorKind::InvalidArgument, "images must share dimensions");
    }
    const std::size_t n = noisy.pixel_count();
    std::array<std::vector<double>, 3> noise;
    for (int c = 0; c < RgbImage::kChannels; ++c) {
        noise[static_cast<std::size_t>(c)].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            noise[static_cast<std::size_t>(c)][i] = noisy.plane(c)[i] - reference.plane(c)[i];
        }
    }
    NoiseCorrelation r;
    r.rg = pearson_correlation(noise[0], noise[1]);
    r.gb = pearson_correlation(noise[1], noise[2]);
    r.br = pearson_correlation(noise[2], noise[0]);
    return r;
}

namespace detail {

/// Band-limited random field: blurred white noise rescaled to [lo, hi].
inline std::vector<double> textured_field(int width, int height, double smooth_sigma, Rng& rng,
                                          double lo, double hi) {
    std::vector<double> field(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (double& v : field) v = rng.uniform01();
    field = blur_plane(field, width, height, GaussianKernel::create(smooth_sigma));
    const auto [mn_it, mx_it] = std::minmax_element(field.begin(), field.end());
    const double mn = *mn_it;
    const double span = *mx_it - mn;
    if (span <= 0.0) {
        std::fill(field.begin(), field.end(), 0.5 * (lo + hi));
        return field;
    }
    const double scale = (hi - lo) / span;
    for (double& v : field) v = lo + (v - mn) * scale;
    return field;
}

}  // namespace detail

/// Scene whose channels differ only by additive constants: a shared
/// band-limited texture t with R = t, G = t + 0.05, B = t + 0.10, kept well
/// inside the exposure thresholds. Every patch of it is unbiased for the
/// estimator by construction. Texture and offsets are snapped to a 2^-20
/// grid so the channel differences are constant bit for bit.
inline RgbImage make_condition_c_scene(int width, int height, std::uint64_t seed) {
    Rng rng(seed);
    auto texture = detail::textured_field(width, height, 3.0, rng, 0.35, 0.55);
    constexpr double kGrid = 1048576.0;  // 2^20
    for (double& v : texture) v = std::round(v * kGrid) / kGrid;
    RgbImage image(width, height);
    static constexpr double kOffsets[3] = {0.0, 52429.0 / kGrid, 104858.0 / kGrid};  // ~0.05, ~0.10
    for (int c = 0; c < RgbImage::kChannels; ++c) {
        auto plane = image.plane(c);
        for (std::size_t i = 0; i < texture.size(); ++i) plane[i] = texture[i] + kOffsets[c];
    }
    return image;
}

/// Textured scene that violates the constant-difference condition in the
/// regions selected by a smooth mask: shared texture plus masked independent
/// per-channel components of amplitude `violation` and correlation length
/// `violation_scale` pixels. Roughly half the image stays near-compliant,
/// which is what makes loss weighting effective on it; patches smaller than
/// the violation scale see locally constant differences, larger ones do not.
inline RgbImage make_textured_scene(int width, int height, std::uint64_t seed,
                                    double violation = 0.08, double violation_scale = 2.0) {
    Rng rng(seed);
    const auto shared = detail::textured_field(width, height, 3.0, rng, 0.0, 1.0);
    const auto mask = detail::textured_field(width, height, 24.0, rng, 0.0, 1.0);
    std::array<std::vector<double>, 3> extras;
    for (auto& e : extras) {
        e = detail::textured_field(width, height, violation_scale, rng, -0.5, 0.5);
    }

    RgbImage image(width, height);
    static constexpr double kOffsets[3] = {0.0, 0.03, 0.06};
    for (int c = 0; c < RgbImage::kChannels; ++c) {
        auto plane = image.plane(c);
        const auto& extra = extras[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < shared.size(); ++i) {
            const double m = mask[i] * mask[i];  // concentrate violations
            double v = 0.33 + 0.22 * shared[i] + kOffsets[c] + violation * m * extra[i];
            plane[i] = std::clamp(v, 0.02, 0.98);
        }
    }
    return image;
}

/// Samples each pixel's pattern-designated channel into a single plane.
inline BayerFrame mosaic_scene(const RgbImage& image, CfaPattern pattern) {
    BayerFrame::validate_dimensions(image.width(), image.height());
    BayerFrame frame(image.width(), image.height(), pattern);
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            frame.at(r, c) = image.at(cfa_color_at(pattern, r, c), r, c);
        }
    }
    return frame;
}

struct SweepRow {
    double sigma_injected = 0.0;
    double gamma = 0.0;
    int patch_size = 0;
    double sigma_est = 0.0;
    double sigma_gt = 0.0;
    double rel_error = 0.0;  // (est - gt)/gt; absolute difference when gt == 0
    EstimatorConfig config;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

/// Degrade / estimate / compare grid runner. For each sigma, a stack of
/// `stack_size` independently degraded frames supplies the ground truth and
/// the first frame is the estimation target, so every (gamma, k) cell at a
/// given sigma sees the same noisy image. Frame seeds derive from the base
/// seed with mix_seed, making rows reproducible bit for bit.
inline SweepResult run_sweep(const RgbImage& scene, const std::vector<double>& sigmas,
                             const std::vector<double>& gammas,
                             const std::vector<int>& patch_sizes, const EstimatorConfig& base,
                             int stack_size = 10, int threads = 1) {
    if (sigmas.empty() || gammas.empty() || patch_sizes.empty()) {
        throw Error(ErrorKind::InvalidArgument, "sweep grid must be non-empty");
    }
    if (stack_size < 2) {
        throw Error(ErrorKind::InvalidArgument, "stack size must be >= 2");
    }
    SweepResult result;
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
        const double sigma = sigmas[si];
        ImageStack stack;
        stack.reserve(static_cast<std::size_t>(stack_size));
        for (int f = 0; f < stack_size; ++f) {
            const std::uint64_t frame_seed =
                mix_seed(base.seed, si * 1000003ULL + static_cast<std::uint64_t>(f));
            stack.push_back(degrade_gaussian(scene, sigma, frame_seed));
        }
        const double sigma_gt = ground_truth_from_stack(stack);
        const RgbImage& noisy = stack.front();
        for (double gamma : gammas) {
            for (int k : patch_sizes) {
                EstimatorConfig config = base;
                config.gamma = gamma;
                config.patch_size = k;
                const EstimateReport report = estimate_noise(noisy, config, threads);
                SweepRow row;
                row.sigma_injected = sigma;
                row.gamma = gamma;
                row.patch_size = k;
                row.sigma_est = report.sigma;
                row.sigma_gt = sigma_gt;
                row.rel_error = sigma_gt > 0.0 ? (report.sigma - sigma_gt) / sigma_gt
                                               : report.sigma - sigma_gt;
                row.config = config;
                result.rows.push_back(row);
            }
        }
    }
    return result;
}

}  // namespace chromanoise
