// chromanoise: noise-level estimation for color images from inter-channel
// texture correlation, with a Bayer RAW extension and evaluation helpers.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chromanoise/bayer.hpp"
#include "chromanoise/estimator.hpp"
#include "chromanoise/harness.hpp"
#include "chromanoise/io.hpp"

namespace {

using namespace chromanoise;

struct EstimatorFlags {
    double gamma = 2.0;
    int patch_size = 5;
    int num_patches = 1000;
    double blur_sigma = 5.0;
    std::uint64_t seed = 1;
    double exposure_low = 2.0 / 255.0;
    double exposure_high = 253.0 / 255.0;

    EstimatorConfig to_config() const {
        EstimatorConfig config;
        config.gamma = gamma;
        config.patch_size = patch_size;
        config.num_patches = num_patches;
        config.blur_sigma = blur_sigma;
        config.seed = seed;
        config.exposure_low = exposure_low;
        config.exposure_high = exposure_high;
        return config;
    }
};

void add_estimator_flags(CLI::App* cmd, EstimatorFlags& flags) {
    cmd->add_option("--gamma", flags.gamma, "loss-filtering strength (0 = unweighted mean)")
        ->capture_default_str();
    cmd->add_option("--patch-size", flags.patch_size, "patch side length k")
        ->capture_default_str();
    cmd->add_option("--num-patches", flags.num_patches, "number of sampled patches")
        ->capture_default_str();
    cmd->add_option("--blur-sigma", flags.blur_sigma, "Gaussian sigma for the loss pre-blur")
        ->capture_default_str();
    cmd->add_option("--seed", flags.seed, "RNG seed for patch sampling")->capture_default_str();
    cmd->add_option("--exposure-low", flags.exposure_low,
                    "samples at or below this are underexposed")
        ->capture_default_str();
    cmd->add_option("--exposure-high", flags.exposure_high,
                    "samples at or above this are overexposed")
        ->capture_default_str();
}

int resolve_threads(const std::optional<int>& flag) {
    if (flag) {
        if (*flag < 1) throw Error(ErrorKind::InvalidArgument, "--threads must be >= 1");
        return *flag;
    }
    if (const char* env = std::getenv("CHROMA_NOISE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            throw Error(ErrorKind::InvalidArgument,
                        "CHROMA_NOISE_THREADS must be a positive integer");
        }
        return static_cast<int>(v);
    }
    return 1;
}

std::string config_echo(const EstimatorConfig& c, int threads) {
    std::string s;
    s += "gamma=" + format_double(c.gamma);
    s += " patch_size=" + std::to_string(c.patch_size);
    s += " num_patches=" + std::to_string(c.num_patches);
    s += " blur_sigma=" + format_double(c.blur_sigma);
    s += " seed=" + std::to_string(c.seed);
    s += " exposure_low=" + format_double(c.exposure_low);
    s += " exposure_high=" + format_double(c.exposure_high);
    s += " threads=" + std::to_string(threads);
    return s;
}

void emit_report(const EstimateReport& report, const std::string& format,
                 const std::string& output) {
    if (!output.empty()) {
        write_report_json(report, output);
    }
    if (format == "json") {
        std::cout << report_to_json(report).dump(2) << "\n";
    } else {
        std::cout << "sigma=" << format_double(report.sigma)
                  << " sigma2=" << format_double(report.sigma2) << "\n";
    }
}

int run(int argc, char** argv) {
    CLI::App app{"noise-level estimation from inter-channel texture correlation"};
    app.require_subcommand(1);

    std::optional<int> threads_flag;
    const auto add_threads_flag = [&threads_flag](CLI::App* cmd) {
        cmd->add_option("--threads", threads_flag,
                        "worker threads (default: CHROMA_NOISE_THREADS or 1); never changes "
                        "results");
    };

    // estimate
    auto* est = app.add_subcommand("estimate", "estimate noise level of an RGB image");
    EstimatorFlags est_flags;
    std::string est_input, est_format = "text", est_output;
    est->add_option("--input", est_input, "PNG or JPEG image")->required();
    add_estimator_flags(est, est_flags);
    est->add_option("--format", est_format, "stdout format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    est->add_option("--output", est_output, "write the full JSON report here");
    add_threads_flag(est);
    est->callback([&] {
        const int threads = resolve_threads(threads_flag);
        const EstimatorConfig config = est_flags.to_config();
        std::cerr << "config cmd=estimate input=" << est_input << " "
                  << config_echo(config, threads) << "\n";
        const RgbImage image = load_rgb(est_input);
        emit_report(estimate_noise(image, config, threads), est_format, est_output);
    });

    // estimate-raw
    auto* raw = app.add_subcommand("estimate-raw", "estimate noise level of a Bayer PGM frame");
    EstimatorFlags raw_flags;
    std::string raw_input, raw_format = "text", raw_output, raw_cfa;
    std::optional<int> raw_black;
    raw->add_option("--input", raw_input, "16-bit binary PGM mosaic")->required();
    raw->add_option("--cfa", raw_cfa, "CFA pattern (default: sidecar value or RGGB)")
        ->check(CLI::IsMember({"RGGB", "BGGR", "GRBG", "GBRG"}));
    raw->add_option("--black-level", raw_black, "sensor black level (default: sidecar value or 0)");
    add_estimator_flags(raw, raw_flags);
    raw->add_option("--format", raw_format, "stdout format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    raw->add_option("--output", raw_output, "write the full JSON report here");
    add_threads_flag(raw);
    raw->callback([&] {
        const int threads = resolve_threads(threads_flag);
        const EstimatorConfig config = raw_flags.to_config();
        const BayerSidecar sidecar = read_bayer_sidecar(raw_input);
        const CfaPattern pattern = !raw_cfa.empty() ? cfa_pattern_from_string(raw_cfa)
                                   : sidecar.pattern ? *sidecar.pattern
                                                     : CfaPattern::RGGB;
        const int black_level = raw_black ? *raw_black : sidecar.black_level.value_or(0);
        std::cerr << "config cmd=estimate-raw input=" << raw_input
                  << " cfa=" << to_string(pattern) << " black_level=" << black_level << " "
                  << config_echo(config, threads) << "\n";
        const BayerFrame frame = load_bayer(raw_input, pattern, black_level);
        emit_report(estimate_noise_raw(frame, config, threads), raw_format, raw_output);
    });

    // degrade
    auto* deg = app.add_subcommand("degrade", "add clipped Gaussian noise to an RGB image");
    std::string deg_input, deg_output;
    double deg_sigma = 0.0;
    std::uint64_t deg_seed = 1;
    deg->add_option("--input", deg_input, "PNG or JPEG image")->required();
    deg->add_option("--sigma", deg_sigma, "noise standard deviation on the [0,1] scale")
        ->required();
    deg->add_option("--seed", deg_seed, "noise RNG seed")->capture_default_str();
    deg->add_option("--output", deg_output, "output PNG (16-bit)")->required();
    deg->callback([&] {
        std::cerr << "config cmd=degrade input=" << deg_input << " sigma=" << format_double(deg_sigma)
                  << " seed=" << deg_seed << " output=" << deg_output << "\n";
        save_png16(degrade_gaussian(load_rgb(deg_input), deg_sigma, deg_seed), deg_output);
        std::cout << "wrote=" << deg_output << "\n";
    });

    // ground-truth
    auto* gt = app.add_subcommand("ground-truth", "noise level from a stack of static frames");
    std::vector<std::string> gt_stack;
    std::string gt_cfa = "RGGB";
    gt->add_option("--stack", gt_stack, "frame paths (PNG/JPEG, or PGM mosaics)")
        ->required()
        ->expected(-2);
    gt->add_option("--cfa", gt_cfa, "CFA pattern when the stack is PGM mosaics")
        ->check(CLI::IsMember({"RGGB", "BGGR", "GRBG", "GBRG"}))
        ->capture_default_str();
    gt->callback([&] {
        std::cerr << "config cmd=ground-truth frames=" << gt_stack.size() << "\n";
        const bool pgm = !gt_stack.empty() && gt_stack.front().ends_with(".pgm");
        double sigma_gt;
        if (pgm) {
            std::vector<BayerFrame> stack;
            for (const auto& p : gt_stack) {
                stack.push_back(load_bayer(p, cfa_pattern_from_string(gt_cfa)));
            }
            sigma_gt = ground_truth_from_stack(stack);
        } else {
            ImageStack stack;
            for (const auto& p : gt_stack) stack.push_back(load_rgb(p));
            sigma_gt = ground_truth_from_stack(stack);
        }
        std::cout << "sigma_gt=" << format_double(sigma_gt) << "\n";
    });

    // noise-corr
    auto* corr = app.add_subcommand("noise-corr", "inter-channel noise correlation coefficients");
    std::string corr_input, corr_reference;
    corr->add_option("--input", corr_input, "noisy image")->required();
    corr->add_option("--reference", corr_reference, "noise-free reference image")->required();
    corr->callback([&] {
        std::cerr << "config cmd=noise-corr input=" << corr_input
                  << " reference=" << corr_reference << "\n";
        const NoiseCorrelation r = noise_correlation(load_rgb(corr_input), load_rgb(corr_reference));
        std::cout << "r_rg=" << format_double(r.rg) << " r_gb=" << format_double(r.gb)
                  << " r_br=" << format_double(r.br) << "\n";
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "degrade/estimate/compare over a parameter grid");
    EstimatorFlags sweep_flags;
    std::string sweep_input, sweep_output;
    std::vector<double> sweep_sigmas;
    std::vector<double> sweep_gammas{2.0};
    std::vector<int> sweep_patch_sizes{5};
    int sweep_stack = 10;
    sweep->add_option("--input", sweep_input, "noise-free base scene (PNG or JPEG)")->required();
    sweep->add_option("--sigmas", sweep_sigmas, "comma list of injected noise levels")
        ->required()
        ->delimiter(',');
    sweep->add_option("--gammas", sweep_gammas, "comma list of gamma values")->delimiter(',');
    sweep->add_option("--patch-sizes", sweep_patch_sizes, "comma list of patch sizes")
        ->delimiter(',');
    sweep->add_option("--stack-size", sweep_stack, "frames per ground-truth stack")
        ->capture_default_str();
    add_estimator_flags(sweep, sweep_flags);
    sweep->add_option("--output", sweep_output, "output CSV path")->required();
    add_threads_flag(sweep);
    sweep->callback([&] {
        const int threads = resolve_threads(threads_flag);
        const EstimatorConfig config = sweep_flags.to_config();
        std::cerr << "config cmd=sweep input=" << sweep_input << " stack_size=" << sweep_stack
                  << " " << config_echo(config, threads) << "\n";
        const RgbImage scene = load_rgb(sweep_input);
        const SweepResult result =
            run_sweep(scene, sweep_sigmas, sweep_gammas, sweep_patch_sizes, config, sweep_stack,
                      threads);
        write_sweep_csv(result, sweep_output);
        std::cout << "rows=" << result.rows.size() << " wrote=" << sweep_output << "\n";
    });

    // make-scene
    auto* scene = app.add_subcommand("make-scene", "generate a synthetic test scene");
    int scene_w = 512, scene_h = 512;
    std::uint64_t scene_seed = 1;
    std::string scene_kind = "condition-c", scene_output, scene_cfa;
    double scene_violation = 0.08, scene_noise = 0.0;
    scene->add_option("--width", scene_w, "scene width")->capture_default_str();
    scene->add_option("--height", scene_h, "scene height")->capture_default_str();
    scene->add_option("--seed", scene_seed, "texture RNG seed")->capture_default_str();
    scene->add_option("--kind", scene_kind, "condition-c: channels differ by constants; textured: masked violations")
        ->check(CLI::IsMember({"condition-c", "textured"}))
        ->capture_default_str();
    scene->add_option("--violation", scene_violation, "violation amplitude for textured scenes")
        ->capture_default_str();
    scene->add_option("--cfa", scene_cfa, "mosaic the scene and write a PGM frame instead of PNG")
        ->check(CLI::IsMember({"RGGB", "BGGR", "GRBG", "GBRG"}));
    scene->add_option("--noise-sigma", scene_noise,
                      "add Gaussian noise before writing (photosite noise for PGM output)")
        ->capture_default_str();
    scene->add_option("--output", scene_output, "output path (.png, or .pgm with --cfa)")
        ->required();
    scene->callback([&] {
        std::cerr << "config cmd=make-scene width=" << scene_w << " height=" << scene_h
                  << " seed=" << scene_seed << " kind=" << scene_kind
                  << " violation=" << format_double(scene_violation)
                  << " cfa=" << (scene_cfa.empty() ? "none" : scene_cfa)
                  << " noise_sigma=" << format_double(scene_noise) << "\n";
        RgbImage image = scene_kind == "textured"
                             ? make_textured_scene(scene_w, scene_h, scene_seed, scene_violation)
                             : make_condition_c_scene(scene_w, scene_h, scene_seed);
        if (!scene_cfa.empty()) {
            BayerFrame frame = mosaic_scene(image, cfa_pattern_from_string(scene_cfa));
            if (scene_noise > 0.0) {
                frame = degrade_bayer_gaussian(frame, scene_noise, mix_seed(scene_seed, 1));
            }
            save_pgm16(frame, scene_output);
        } else {
            if (scene_noise > 0.0) {
                image = degrade_gaussian(image, scene_noise, mix_seed(scene_seed, 1));
            }
            save_png16(image, scene_output);
        }
        std::cout << "wrote=" << scene_output << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const chromanoise::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case chromanoise::ErrorKind::NoUsablePatches:
                return 2;
            case chromanoise::ErrorKind::Io:
                return 3;
            default:
                return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
