#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "chromanoise/harness.hpp"
#include "chromanoise/io.hpp"
#include "chromanoise/rng.hpp"

namespace chromanoise {
namespace {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        dir_ = fs::temp_directory_path() /
               ("chromanoise_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
    fs::path path(const std::string& name) const { return dir_ / name; }

private:
    fs::path dir_;
    static inline int counter_ = 0;
};

void write_bytes(const fs::path& path, const unsigned char* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
}

#include "embedded_images.h"

TEST(LoadPng, HandConstructedPixelsAreExact) {
    TempDir tmp;
    const auto path = tmp.path("tiny.png");
    write_bytes(path, kPng2x2Rgb8, sizeof(kPng2x2Rgb8));
    const RgbImage image = load_rgb(path);
    ASSERT_EQ(image.width(), 2);
    ASSERT_EQ(image.height(), 2);
    const int expected[4][3] = {{10, 20, 30}, {40, 50, 60}, {70, 80, 90}, {200, 150, 100}};
    for (int i = 0; i < 4; ++i) {
        for (int c = 0; c < 3; ++c) {
            EXPECT_DOUBLE_EQ(image.plane(c)[static_cast<std::size_t>(i)], expected[i][c] / 255.0)
                << "pixel " << i << " channel " << c;
        }
    }
}

TEST(LoadPng, GrayscaleRejectedWithClearError) {
    TempDir tmp;
    const auto path = tmp.path("gray.png");
    write_bytes(path, kPngGray, sizeof(kPngGray));
    try {
        load_rgb(path);
        FAIL() << "expected Decode error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Decode);
        EXPECT_NE(std::string(e.what()).find("grayscale"), std::string::npos);
    }
}

TEST(LoadPng, TruncatedFileIsAnErrorNotACrash) {
    TempDir tmp;
    const auto path = tmp.path("trunc.png");
    write_bytes(path, kPng2x2Rgb8, 40);
    try {
        load_rgb(path);
        FAIL() << "expected Decode error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Decode);
    }
}

TEST(LoadRgb, MissingFileIsIoError) {
    try {
        load_rgb("/nonexistent/nowhere.png");
        FAIL() << "expected Io error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}

TEST(LoadRgb, UnknownMagicIsDecodeError) {
    TempDir tmp;
    const auto path = tmp.path("junk.png");
    const unsigned char junk[] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    write_bytes(path, junk, sizeof(junk));
    try {
        load_rgb(path);
        FAIL() << "expected Decode error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Decode);
    }
}

TEST(SavePng, RoundTripIsExactAtSixteenBitQuantization) {
    TempDir tmp;
    Rng rng(81);
    RgbImage image(23, 17);
    for (int c = 0; c < 3; ++c) {
        for (double& v : image.plane(c)) v = rng.uniform01();
    }
    const auto path = tmp.path("roundtrip.png");
    save_png16(image, path);
    const RgbImage loaded = load_rgb(path);
    ASSERT_EQ(loaded.width(), image.width());
    ASSERT_EQ(loaded.height(), image.height());
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < image.pixel_count(); ++i) {
            const double quantized = std::lround(image.plane(c)[i] * 65535.0) / 65535.0;
            ASSERT_EQ(loaded.plane(c)[i], quantized);
        }
    }
    // a second trip through the codec changes nothing
    const auto path2 = tmp.path("roundtrip2.png");
    save_png16(loaded, path2);
    const RgbImage loaded2 = load_rgb(path2);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < image.pixel_count(); ++i) {
            ASSERT_EQ(loaded2.plane(c)[i], loaded.plane(c)[i]);
        }
    }
}

TEST(LoadJpeg, SolidColorDecodesNearNominal) {
    TempDir tmp;
    const auto path = tmp.path("solid.jpg");
    write_bytes(path, kJpegSolid, sizeof(kJpegSolid));
    const RgbImage image = load_rgb(path);
    ASSERT_EQ(image.width(), 16);
    ASSERT_EQ(image.height(), 16);
    const double expected[3] = {128 / 255.0, 64 / 255.0, 32 / 255.0};
    for (int c = 0; c < 3; ++c) {
        for (double v : image.plane(c)) {
            ASSERT_NEAR(v, expected[c], 2.0 / 255.0);
        }
    }
}

TEST(LoadJpeg, TruncatedFileIsAnError) {
    TempDir tmp;
    const auto path = tmp.path("trunc.jpg");
    write_bytes(path, kJpegSolid, 100);
    try {
        load_rgb(path);
        FAIL() << "expected Decode error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Decode);
    }
}

// ---------------------------------------------------------------------------
// PGM / Bayer interchange
// ---------------------------------------------------------------------------

std::vector<unsigned char> pgm16_bytes(int width, int height, int maxval,
                                       const std::vector<int>& samples) {
    std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n" +
                         std::to_string(maxval) + "\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    for (int s : samples) {
        bytes.push_back(static_cast<unsigned char>(s >> 8));
        bytes.push_back(static_cast<unsigned char>(s & 0xff));
    }
    return bytes;
}

TEST(LoadBayer, HandConstructedSamplesAreExact) {
    TempDir tmp;
    const auto path = tmp.path("frame.pgm");
    const std::vector<int> samples = {0,    1000, 2000,  3000,  4000,  5000,  6000,  7000,
                                      8000, 9000, 10000, 11000, 12000, 13000, 14000, 65535};
    const auto bytes = pgm16_bytes(4, 4, 65535, samples);
    write_bytes(path, bytes.data(), bytes.size());
    const BayerFrame frame = load_bayer(path, CfaPattern::RGGB, 0);
    ASSERT_EQ(frame.width, 4);
    ASSERT_EQ(frame.height, 4);
    EXPECT_EQ(frame.max_value, 65535);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        ASSERT_DOUBLE_EQ(frame.plane[i], samples[i] / 65535.0);
    }
}

TEST(LoadBayer, BlackLevelMapping) {
    TempDir tmp;
    const auto path = tmp.path("black.pgm");
    const int maxval = 4000;
    // below black clamps to 0, black maps to 0, full scale maps to 1
    const std::vector<int> samples = {100, 2000, 4000, 3000};
    const auto bytes = pgm16_bytes(2, 2, maxval, samples);
    write_bytes(path, bytes.data(), bytes.size());
    const BayerFrame frame = load_bayer(path, CfaPattern::RGGB, 2000);
    EXPECT_EQ(frame.plane[0], 0.0);
    EXPECT_EQ(frame.plane[1], 0.0);
    EXPECT_EQ(frame.plane[2], 1.0);
    EXPECT_DOUBLE_EQ(frame.plane[3], 1000.0 / 2000.0);
}

TEST(LoadBayer, HeaderCommentsAreSkipped) {
    TempDir tmp;
    const auto path = tmp.path("comment.pgm");
    std::string header = "P5\n# camera frame\n2 2\n# maxval next\n65535\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    for (int s : {1, 2, 3, 4}) {
        bytes.push_back(static_cast<unsigned char>(s >> 8));
        bytes.push_back(static_cast<unsigned char>(s & 0xff));
    }
    write_bytes(path, bytes.data(), bytes.size());
    const BayerFrame frame = load_bayer(path, CfaPattern::GRBG, 0);
    EXPECT_DOUBLE_EQ(frame.plane[3], 4.0 / 65535.0);
    EXPECT_EQ(frame.pattern, CfaPattern::GRBG);
}

TEST(LoadBayer, RejectsMalformedInputs) {
    TempDir tmp;
    {  // odd dimensions
        const auto path = tmp.path("odd.pgm");
        const auto bytes = pgm16_bytes(3, 2, 65535, {1, 2, 3, 4, 5, 6});
        write_bytes(path, bytes.data(), bytes.size());
        EXPECT_THROW(load_bayer(path, CfaPattern::RGGB, 0), Error);
    }
    {  // black level at max
        const auto path = tmp.path("black.pgm");
        const auto bytes = pgm16_bytes(2, 2, 1000, {1, 2, 3, 4});
        write_bytes(path, bytes.data(), bytes.size());
        EXPECT_THROW(load_bayer(path, CfaPattern::RGGB, 1000), Error);
    }
    {  // maxval too small for the interchange format
        const auto path = tmp.path("small_max.pgm");
        const auto bytes = pgm16_bytes(2, 2, 100, {1, 2, 3, 4});
        write_bytes(path, bytes.data(), bytes.size());
        EXPECT_THROW(load_bayer(path, CfaPattern::RGGB, 0), Error);
    }
    {  // truncated raster
        const auto path = tmp.path("trunc.pgm");
        auto bytes = pgm16_bytes(2, 2, 65535, {1, 2, 3, 4});
        bytes.resize(bytes.size() - 3);
        write_bytes(path, bytes.data(), bytes.size());
        EXPECT_THROW(load_bayer(path, CfaPattern::RGGB, 0), Error);
    }
    {  // wrong magic
        const auto path = tmp.path("p2.pgm");
        const std::string text = "P2\n2 2\n255\n1 2 3 4\n";
        write_bytes(path, reinterpret_cast<const unsigned char*>(text.data()), text.size());
        EXPECT_THROW(load_bayer(path, CfaPattern::RGGB, 0), Error);
    }
}

TEST(LoadBayer, EightBitPgmIsAccepted) {
    TempDir tmp;
    const auto path = tmp.path("eight.pgm");
    const std::string header = "P5\n2 2\n255\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    for (int s : {0, 51, 102, 255}) bytes.push_back(static_cast<unsigned char>(s));
    write_bytes(path, bytes.data(), bytes.size());
    const BayerFrame frame = load_bayer(path, CfaPattern::RGGB, 0);
    EXPECT_DOUBLE_EQ(frame.plane[1], 51.0 / 255.0);
    EXPECT_DOUBLE_EQ(frame.plane[3], 1.0);
}

TEST(SavePgm, RoundTripIsExactAtSixteenBitQuantization) {
    TempDir tmp;
    Rng rng(82);
    BayerFrame frame(8, 6, CfaPattern::BGGR);
    for (double& v : frame.plane) v = rng.uniform01();
    const auto path = tmp.path("rt.pgm");
    save_pgm16(frame, path);
    const BayerFrame loaded = load_bayer(path, CfaPattern::BGGR, 0);
    for (std::size_t i = 0; i < frame.plane.size(); ++i) {
        const double quantized = std::lround(frame.plane[i] * 65535.0) / 65535.0;
        ASSERT_EQ(loaded.plane[i], quantized);
    }
}

TEST(BayerSidecar, ParsesPatternAndBlackLevel) {
    TempDir tmp;
    const auto frame_path = tmp.path("shot.pgm");
    std::ofstream meta(frame_path.string() + ".meta");
    meta << "pattern=GBRG\nblack_level=512\n";
    meta.close();
    const BayerSidecar sidecar = read_bayer_sidecar(frame_path);
    ASSERT_TRUE(sidecar.pattern.has_value());
    EXPECT_EQ(*sidecar.pattern, CfaPattern::GBRG);
    ASSERT_TRUE(sidecar.black_level.has_value());
    EXPECT_EQ(*sidecar.black_level, 512);

    const BayerSidecar none = read_bayer_sidecar(tmp.path("absent.pgm"));
    EXPECT_FALSE(none.pattern.has_value());
    EXPECT_FALSE(none.black_level.has_value());
}

// ---------------------------------------------------------------------------
// report serialization
// ---------------------------------------------------------------------------

TEST(ReportJson, RoundTripPreservesEverything) {
    TempDir tmp;
    const RgbImage scene = make_condition_c_scene(64, 64, 83);
    const RgbImage noisy = degrade_gaussian(scene, 0.05, 84);
    EstimatorConfig config;
    config.num_patches = 50;
    config.seed = 424242;
    const EstimateReport report = estimate_noise(noisy, config);

    const auto path = tmp.path("report.json");
    write_report_json(report, path);
    const EstimateReport back = read_report_json(path);

    EXPECT_EQ(back.sigma, report.sigma);
    EXPECT_EQ(back.sigma2, report.sigma2);
    EXPECT_EQ(back.patches_used, report.patches_used);
    EXPECT_EQ(back.patches_excluded, report.patches_excluded);
    EXPECT_EQ(back.mean_loss, report.mean_loss);
    EXPECT_EQ(back.mode, report.mode);
    EXPECT_EQ(back.config.gamma, report.config.gamma);
    EXPECT_EQ(back.config.seed, report.config.seed);
    ASSERT_EQ(back.per_patch.size(), report.per_patch.size());
    for (std::size_t i = 0; i < report.per_patch.size(); ++i) {
        EXPECT_EQ(back.per_patch[i].row, report.per_patch[i].row);
        EXPECT_EQ(back.per_patch[i].col, report.per_patch[i].col);
        EXPECT_EQ(back.per_patch[i].alpha, report.per_patch[i].alpha);
        EXPECT_EQ(back.per_patch[i].beta, report.per_patch[i].beta);
        EXPECT_EQ(back.per_patch[i].sigma2, report.per_patch[i].sigma2);
        EXPECT_EQ(back.per_patch[i].loss, report.per_patch[i].loss);
        EXPECT_EQ(back.per_patch[i].weight, report.per_patch[i].weight);
        EXPECT_EQ(back.per_patch[i].excluded, report.per_patch[i].excluded);
    }
}

TEST(SweepCsv, EmptySweepIsHeaderOnly) {
    const std::string csv = sweep_to_csv(SweepResult{});
    EXPECT_EQ(csv,
              "sigma_injected,gamma,patch_size,num_patches,blur_sigma,seed,"
              "sigma_est,sigma_gt,rel_error\n");
}

TEST(SweepCsv, ValuesSurviveAtStatedPrecision) {
    SweepResult result;
    SweepRow row;
    row.sigma_injected = 0.05;
    row.gamma = 2.0;
    row.patch_size = 5;
    row.sigma_est = 0.0485;
    row.sigma_gt = 0.048312345678;
    row.rel_error = (row.sigma_est - row.sigma_gt) / row.sigma_gt;
    row.config = EstimatorConfig{};
    result.rows.push_back(row);
    const std::string csv = sweep_to_csv(result);

    // one header line plus one row
    ASSERT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
    const std::string line = csv.substr(csv.find('\n') + 1);
    EXPECT_NE(line.find("0.0485,"), std::string::npos);
    EXPECT_NE(line.find("0.048312345678"), std::string::npos);

    // parse the estimate column back and compare at 12 significant digits
    std::vector<std::string> fields;
    std::size_t pos = 0;
    std::string rest = line;
    while ((pos = rest.find(',')) != std::string::npos) {
        fields.push_back(rest.substr(0, pos));
        rest = rest.substr(pos + 1);
    }
    fields.push_back(rest);
    ASSERT_EQ(fields.size(), 9u);
    EXPECT_DOUBLE_EQ(std::stod(fields[6]), 0.0485);
}

TEST(SweepCsv, WriteAndReadBack) {
    TempDir tmp;
    const RgbImage scene = make_condition_c_scene(96, 96, 85);
    EstimatorConfig config;
    config.num_patches = 100;
    const SweepResult result = run_sweep(scene, {0.05}, {2.0}, {5}, config, 3);
    const auto path = tmp.path("sweep.csv");
    write_sweep_csv(result, path);

    std::ifstream in(path);
    std::string header, line;
    ASSERT_TRUE(std::getline(in, header));
    ASSERT_TRUE(std::getline(in, line));
    EXPECT_NE(line.find("0.05,2,5,100,5,"), std::string::npos);
}

TEST(FormatDouble, TwelveSignificantDigits) {
    EXPECT_EQ(format_double(0.0485), "0.0485");
    EXPECT_EQ(format_double(2.0), "2");
    EXPECT_EQ(format_double(0.123456789012345), "0.123456789012");
}

}  // namespace
}  // namespace chromanoise
