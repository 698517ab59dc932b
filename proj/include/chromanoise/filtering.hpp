#pragma once

#include <cmath>
#include <vector>

#include "chromanoise/errors.hpp"
#include "chromanoise/image.hpp"
#include "chromanoise/parallel.hpp"
#include "chromanoise/stats.hpp"

namespace chromanoise {

/// Symmetric reflection with the edge sample repeated (..., x1, x0 | x0, x1, ...).
/// Folds as often as needed, so it stays valid for radii larger than n.
inline int mirror_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

/// Truncated 1-D Gaussian, radius ceil(3*sigma), taps renormalized to sum 1.
struct GaussianKernel {
    double sigma = 0.0;
    int radius = 0;
    std::vector<double> taps;  // size 2*radius+1, symmetric about taps[radius]

    static GaussianKernel create(double sigma) {
        if (!(sigma > 0.0)) {
            throw Error(ErrorKind::InvalidArgument, "gaussian sigma must be > 0");
        }
        GaussianKernel k;
        k.sigma = sigma;
        k.radius = static_cast<int>(std::ceil(3.0 * sigma));
        k.taps.resize(static_cast<std::size_t>(2 * k.radius + 1));
        CompensatedSum norm;
        for (int o = -k.radius; o <= k.radius; ++o) {
            const double t = std::exp(-0.5 * (o / sigma) * (o / sigma));
            k.taps[static_cast<std::size_t>(o + k.radius)] = t;
            norm.add(t);
        }
        const double inv = 1.0 / norm.value();
        for (double& t : k.taps) t *= inv;
        return k;
    }
};

/// Separable convolution of one row-major plane with mirrored borders.
inline std::vector<double> blur_plane(const std::vector<double>& plane, int width, int height,
                                      const GaussianKernel& kernel, int threads = 1) {
    const int radius = kernel.radius;
    const double* taps = kernel.taps.data() + radius;
    std::vector<double> horizontal(plane.size());
    std::vector<double> out(plane.size());

    parallel_for(0, height, threads, [&](std::int64_t r) {
        const double* src = plane.data() + r * width;
        double* dst = horizontal.data() + r * width;
        for (int c = 0; c < width; ++c) {
            double acc = 0.0;
            for (int o = -radius; o <= radius; ++o) {
                acc += taps[o] * src[mirror_index(c + o, width)];
            }
            dst[c] = acc;
        }
    });

    parallel_for(0, height, threads, [&](std::int64_t r) {
        double* dst = out.data() + r * width;
        for (int o = -radius; o <= radius; ++o) {
            const double* src = horizontal.data() +
                                static_cast<std::size_t>(mirror_index(static_cast<int>(r) + o, height)) * width;
            const double w = taps[o];
            if (o == -radius) {
                for (int c = 0; c < width; ++c) dst[c] = w * src[c];
            } else {
                for (int c = 0; c < width; ++c) dst[c] += w * src[c];
            }
        }
    });
    return out;
}

/// Blurs each channel independently with the same kernel. Output dimensions
/// equal the input's; inter-channel equalities are preserved exactly because
/// all channels see identical weights.
inline RgbImage gaussian_blur(const RgbImage& image, double sigma, int threads = 1) {
    const GaussianKernel kernel = GaussianKernel::create(sigma);
    RgbImage out(image.width(), image.height());
    for (int c = 0; c < RgbImage::kChannels; ++c) {
        std::vector<double> plane(image.plane(c).begin(), image.plane(c).end());
        auto blurred = blur_plane(plane, image.width(), image.height(), kernel, threads);
        std::copy(blurred.begin(), blurred.end(), out.plane(c).begin());
    }
    return out;
}

}  // namespace chromanoise
