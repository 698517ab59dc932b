#pragma once

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include <json.hpp>

#include "chromanoise/bayer.hpp"
#include "chromanoise/errors.hpp"
#include "chromanoise/estimator.hpp"
#include "chromanoise/harness.hpp"
#include "chromanoise/image.hpp"

namespace chromanoise {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr fp(std::fopen(path.string().c_str(), mode));
    if (!fp) {
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    }
    return fp;
}

inline double normalize_sample(std::uint32_t raw, std::uint32_t full_scale) {
    return static_cast<double>(raw) / static_cast<double>(full_scale);
}

struct JpegErrorHandler {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
};

inline void jpeg_error_longjmp(j_common_ptr cinfo) {
    auto* handler = reinterpret_cast<JpegErrorHandler*>(cinfo->err);
    std::longjmp(handler->jump, 1);
}

}  // namespace detail

inline bool looks_like_png(const std::filesystem::path& path) {
    auto fp = detail::open_file(path, "rb");
    unsigned char sig[8] = {};
    const std::size_t got = std::fread(sig, 1, 8, fp.get());
    return got == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

/// Decodes an 8- or 16-bit RGB PNG into normalized planes. Anything that is
/// not plain three-channel RGB (grayscale, palette, alpha) is rejected.
inline RgbImage load_png(const std::filesystem::path& path) {
    auto fp = detail::open_file(path, "rb");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error(ErrorKind::Decode, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorKind::Decode, "libpng init failed");
    }

    std::vector<unsigned char> raster;
    std::vector<png_bytep> rows;
    std::string problem;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::Decode,
                    problem.empty() ? "PNG decode failed: " + path.string() : problem);
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        problem = path.string() + ": grayscale PNG not supported, need RGB";
        png_error(png, "reject");
    }
    if (color_type != PNG_COLOR_TYPE_RGB || (bit_depth != 8 && bit_depth != 16)) {
        problem = path.string() + ": unsupported PNG layout, need 8- or 16-bit RGB";
        png_error(png, "reject");
    }

    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    raster.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = raster.data() + r * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    RgbImage image(static_cast<int>(width), static_cast<int>(height));
    const std::uint32_t full_scale = bit_depth == 16 ? 65535u : 255u;
    for (png_uint_32 r = 0; r < height; ++r) {
        const unsigned char* src = raster.data() + r * row_bytes;
        for (png_uint_32 c = 0; c < width; ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                std::uint32_t v;
                if (bit_depth == 16) {
                    v = static_cast<std::uint32_t>(src[0]) << 8 | src[1];
                    src += 2;
                } else {
                    v = *src++;
                }
                image.at(ch, static_cast<int>(r), static_cast<int>(c)) =
                    detail::normalize_sample(v, full_scale);
            }
        }
    }
    return image;
}

/// Writes a 16-bit RGB PNG; samples are quantized as round(v * 65535) after
/// clamping to [0,1], so a save/load round trip is exact at 16-bit scale.
inline void save_png16(const RgbImage& image, const std::filesystem::path& path) {
    auto fp = detail::open_file(path, "wb");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error(ErrorKind::Io, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorKind::Io, "libpng init failed");
    }

    const std::size_t row_bytes = static_cast<std::size_t>(image.width()) * 6;
    std::vector<unsigned char> raster(row_bytes * static_cast<std::size_t>(image.height()));
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
    for (int r = 0; r < image.height(); ++r) {
        unsigned char* dst = raster.data() + static_cast<std::size_t>(r) * row_bytes;
        rows[static_cast<std::size_t>(r)] = dst;
        for (int c = 0; c < image.width(); ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                const double v = std::clamp(image.at(ch, r, c), 0.0, 1.0);
                const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
                *dst++ = static_cast<unsigned char>(q >> 8);
                *dst++ = static_cast<unsigned char>(q & 0xff);
            }
        }
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::Io, "PNG write failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
                 static_cast<png_uint_32>(image.height()), 16, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

/// Baseline JPEG decode, read-only. Grayscale and progressive files are
/// rejected; the artifact never writes lossy formats.
inline RgbImage load_jpeg(const std::filesystem::path& path) {
    auto fp = detail::open_file(path, "rb");

    jpeg_decompress_struct cinfo{};
    detail::JpegErrorHandler err{};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = detail::jpeg_error_longjmp;

    std::vector<unsigned char> row;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw Error(ErrorKind::Decode, "JPEG decode failed: " + path.string());
    }

    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp.get());
    jpeg_read_header(&cinfo, TRUE);

    if (cinfo.jpeg_color_space == JCS_GRAYSCALE) {
        jpeg_destroy_decompress(&cinfo);
        throw Error(ErrorKind::Decode, path.string() + ": grayscale JPEG not supported, need RGB");
    }
    if (cinfo.progressive_mode) {
        jpeg_destroy_decompress(&cinfo);
        throw Error(ErrorKind::Decode, path.string() + ": only baseline JPEG is supported");
    }

    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    const int width = static_cast<int>(cinfo.output_width);
    const int height = static_cast<int>(cinfo.output_height);
    RgbImage image(width, height);
    row.resize(static_cast<std::size_t>(width) * 3);
    unsigned char* row_ptr = row.data();
    while (cinfo.output_scanline < cinfo.output_height) {
        const int r = static_cast<int>(cinfo.output_scanline);
        jpeg_read_scanlines(&cinfo, &row_ptr, 1);
        const unsigned char* src = row.data();
        for (int c = 0; c < width; ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                image.at(ch, r, c) = detail::normalize_sample(*src++, 255u);
            }
        }
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return image;
}

/// Dispatches on file magic: PNG signature or JPEG SOI marker.
inline RgbImage load_rgb(const std::filesystem::path& path) {
    unsigned char magic[8] = {};
    {
        auto fp = detail::open_file(path, "rb");
        if (std::fread(magic, 1, 8, fp.get()) < 2) {
            throw Error(ErrorKind::Decode, path.string() + ": file too short to identify");
        }
    }
    if (png_sig_cmp(magic, 0, 8) == 0) return load_png(path);
    if (magic[0] == 0xff && magic[1] == 0xd8) return load_jpeg(path);
    throw Error(ErrorKind::Decode, path.string() + ": not a PNG or JPEG file");
}

namespace detail {

inline int pgm_next_token(std::istream& in) {
    // skips whitespace and '#' comments, returns a nonnegative integer
    for (;;) {
        const int c = in.peek();
        if (c == EOF) throw Error(ErrorKind::Decode, "truncated PGM header");
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    int value = 0;
    if (!(in >> value) || value < 0) {
        throw Error(ErrorKind::Decode, "malformed PGM header");
    }
    return value;
}

}  // namespace detail

/// Optional sidecar metadata for a Bayer PGM: a "<file>.meta" next to the
/// frame with `pattern=RGGB` / `black_level=512` lines.
struct BayerSidecar {
    std::optional<CfaPattern> pattern;
    std::optional<int> black_level;
};

inline BayerSidecar read_bayer_sidecar(const std::filesystem::path& frame_path) {
    BayerSidecar meta;
    const std::filesystem::path sidecar = frame_path.string() + ".meta";
    std::ifstream in(sidecar);
    if (!in) return meta;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "pattern") {
            meta.pattern = cfa_pattern_from_string(value);
        } else if (key == "black_level") {
            meta.black_level = std::stoi(value);
        }
    }
    return meta;
}

/// Reads a binary PGM (P5) mosaic. Samples above 255 full scale are two
/// bytes, most significant first, per the PGM specification. Values map as
/// (raw - black_level) / (max_value - black_level), clamped to [0,1].
inline BayerFrame load_bayer(const std::filesystem::path& path, CfaPattern pattern,
                             int black_level = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (!in || m0 != 'P' || m1 != '5') {
        throw Error(ErrorKind::Decode, path.string() + ": not a binary PGM (P5) file");
    }
    const int width = detail::pgm_next_token(in);
    const int height = detail::pgm_next_token(in);
    const int max_value = detail::pgm_next_token(in);
    if (max_value < 255 || max_value > 65535) {
        throw Error(ErrorKind::Decode, path.string() + ": PGM max value must be in [255, 65535]");
    }
    in.get();  // single whitespace after maxval

    BayerFrame frame(width, height, pattern);
    frame.max_value = max_value;
    frame.black_level = black_level;
    if (black_level < 0 || black_level >= max_value) {
        throw Error(ErrorKind::InvalidArgument, "black level must be in [0, max_value)");
    }

    const bool two_bytes = max_value > 255;
    const std::size_t n = frame.plane.size();
    std::vector<unsigned char> bytes(n * (two_bytes ? 2 : 1));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw Error(ErrorKind::Decode, path.string() + ": truncated PGM raster");
    }

    const double scale = 1.0 / static_cast<double>(max_value - black_level);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t raw;
        if (two_bytes) {
            raw = static_cast<std::uint32_t>(bytes[2 * i]) << 8 | bytes[2 * i + 1];
        } else {
            raw = bytes[i];
        }
        const double v = (static_cast<double>(raw) - static_cast<double>(black_level)) * scale;
        frame.plane[i] = std::clamp(v, 0.0, 1.0);
    }
    return frame;
}

/// Writes the frame as a binary 16-bit PGM, undoing the normalization with
/// the frame's max_value and black_level.
inline void save_pgm16(const BayerFrame& frame, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out << "P5\n" << frame.width << " " << frame.height << "\n" << frame.max_value << "\n";
    const double span = static_cast<double>(frame.max_value - frame.black_level);
    for (double v : frame.plane) {
        const double denorm = std::clamp(v, 0.0, 1.0) * span + frame.black_level;
        const auto q = static_cast<std::uint16_t>(std::lround(denorm));
        const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                        static_cast<unsigned char>(q & 0xff)};
        out.write(reinterpret_cast<const char*>(bytes), 2);
    }
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline nlohmann::json config_to_json(const EstimatorConfig& config) {
    return nlohmann::json{
        {"gamma", config.gamma},
        {"patch_size", config.patch_size},
        {"num_patches", config.num_patches},
        {"blur_sigma", config.blur_sigma},
        {"seed", config.seed},
        {"exposure_low", config.exposure_low},
        {"exposure_high", config.exposure_high},
    };
}

inline EstimatorConfig config_from_json(const nlohmann::json& j) {
    EstimatorConfig config;
    config.gamma = j.at("gamma").get<double>();
    config.patch_size = j.at("patch_size").get<int>();
    config.num_patches = j.at("num_patches").get<int>();
    config.blur_sigma = j.at("blur_sigma").get<double>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.exposure_low = j.at("exposure_low").get<double>();
    config.exposure_high = j.at("exposure_high").get<double>();
    return config;
}

inline nlohmann::json report_to_json(const EstimateReport& report) {
    nlohmann::json per_patch = nlohmann::json::array();
    for (const auto& s : report.per_patch) {
        per_patch.push_back(nlohmann::json{
            {"row", s.row},
            {"col", s.col},
            {"alpha", s.alpha},
            {"beta", s.beta},
            {"sigma2", s.sigma2},
            {"loss", s.loss},
            {"weight", s.weight},
            {"excluded", to_string(s.excluded)},
        });
    }
    return nlohmann::json{
        {"mode", to_string(report.mode)},
        {"sigma", report.sigma},
        {"sigma2", report.sigma2},
        {"patches_used", report.patches_used},
        {"patches_excluded", report.patches_excluded},
        {"mean_loss", report.mean_loss},
        {"config", config_to_json(report.config)},
        {"per_patch", per_patch},
    };
}

inline EstimateReport report_from_json(const nlohmann::json& j) {
    EstimateReport report;
    report.mode = j.at("mode").get<std::string>() == "raw" ? PatchMode::Raw : PatchMode::Rgb;
    report.sigma = j.at("sigma").get<double>();
    report.sigma2 = j.at("sigma2").get<double>();
    report.patches_used = j.at("patches_used").get<int>();
    report.patches_excluded = j.at("patches_excluded").get<int>();
    report.mean_loss = j.at("mean_loss").get<double>();
    report.config = config_from_json(j.at("config"));
    for (const auto& p : j.at("per_patch")) {
        PatchStats s;
        s.row = p.at("row").get<int>();
        s.col = p.at("col").get<int>();
        s.alpha = p.at("alpha").get<double>();
        s.beta = p.at("beta").get<double>();
        s.sigma2 = p.at("sigma2").get<double>();
        s.loss = p.at("loss").get<double>();
        s.weight = p.at("weight").get<double>();
        s.excluded = exclusion_reason_from_string(p.at("excluded").get<std::string>());
        report.per_patch.push_back(s);
    }
    return report;
}

inline void write_report_json(const EstimateReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out << report_to_json(report).dump(2) << "\n";
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

inline EstimateReport read_report_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return report_from_json(j);
}

/// 12 significant digits, enough to reconstruct the value to visible
/// precision in any downstream tool.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string sweep_to_csv(const SweepResult& result) {
    std::string out =
        "sigma_injected,gamma,patch_size,num_patches,blur_sigma,seed,"
        "sigma_est,sigma_gt,rel_error\n";
    for (const auto& row : result.rows) {
        out += format_double(row.sigma_injected);
        out += ',';
        out += format_double(row.gamma);
        out += ',';
        out += std::to_string(row.patch_size);
        out += ',';
        out += std::to_string(row.config.num_patches);
        out += ',';
        out += format_double(row.config.blur_sigma);
        out += ',';
        out += std::to_string(row.config.seed);
        out += ',';
        out += format_double(row.sigma_est);
        out += ',';
        out += format_double(row.sigma_gt);
        out += ',';
        out += format_double(row.rel_error);
        out += '\n';
    }
    return out;
}

inline void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out << sweep_to_csv(result);
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace chromanoise
