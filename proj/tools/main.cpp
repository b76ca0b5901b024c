#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "coolvol/body_spec.hpp"
#include "coolvol/estimator.hpp"
#include "coolvol/report_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitWalkAbort = 2;
constexpr int kExitValidation = 3;

struct CliConfig {
    std::string mode = "volume";
    std::string body_path;
    double eps = 0.25;
    std::optional<std::uint64_t> seed;
    std::string profile = "practical";
    std::optional<double> boost_p;
    int samples = 100;
    std::string out_path;        // report JSON (volume modes) or sample rows (sample mode)
    std::string trace_csv_path;
    int parallel_chains = 1;
    std::optional<double> mixing_constant;
    std::optional<double> delta_divisor;
    std::optional<std::uint64_t> samples_per_phase;
    bool no_lazy = false;
    std::optional<bool> speedy_map;
};

coolvol::EstimatorOptions make_options(const CliConfig& cli) {
    coolvol::EstimatorOptions options;
    options.eps = cli.eps;
    options.seed = *cli.seed;
    options.profile = cli.profile == "paper" ? coolvol::ConstantProfile::paper
                                             : coolvol::ConstantProfile::practical;
    options.mixing_constant = cli.mixing_constant;
    options.delta_divisor = cli.delta_divisor;
    options.samples_per_phase = cli.samples_per_phase;
    options.lazy = !cli.no_lazy;
    options.apply_speedy_map = cli.speedy_map;
    options.parallel_chains = cli.parallel_chains;
    return options;
}

int run_sample_mode(const coolvol::ConvexBody& body, const CliConfig& cli) {
    const auto points = coolvol::uniform_sample(body, cli.samples, make_options(cli));
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!cli.out_path.empty()) {
        file.open(cli.out_path);
        if (!file) {
            std::cerr << "error: cannot open output file " << cli.out_path << "\n";
            return kExitValidation;
        }
        out = &file;
    }
    *out << std::setprecision(17);
    for (const coolvol::Point& p : points) {
        for (std::size_t i = 0; i < p.size(); ++i) *out << (i ? " " : "") << p[i];
        *out << '\n';
    }
    return kExitOk;
}

int run_volume_mode(const coolvol::ConvexBody& body, const CliConfig& cli) {
    const auto mode = cli.mode == "gaussian-volume" ? coolvol::EstimateMode::gaussian_volume
                                                    : coolvol::EstimateMode::uniform_volume;
    const coolvol::EstimatorOptions options = make_options(cli);
    const auto start = std::chrono::steady_clock::now();
    const coolvol::VolumeReport report =
        cli.boost_p ? coolvol::boosted_median(mode, body, options, *cli.boost_p)
                    : (mode == coolvol::EstimateMode::uniform_volume
                           ? coolvol::uniform_volume(body, options)
                           : coolvol::gaussian_volume(body, options));
    const double wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const nlohmann::json doc =
        coolvol::report_to_json(report, wall_seconds, cli.body_path, cli.boost_p);
    if (cli.out_path.empty()) {
        std::cout << doc.dump(2) << '\n';
    } else {
        std::ofstream file(cli.out_path);
        if (!file) {
            std::cerr << "error: cannot open output file " << cli.out_path << "\n";
            return kExitValidation;
        }
        file << doc.dump(2) << '\n';
    }
    if (!cli.trace_csv_path.empty()) {
        std::ofstream csv(cli.trace_csv_path);
        if (!csv) {
            std::cerr << "error: cannot open trace file " << cli.trace_csv_path << "\n";
            return kExitValidation;
        }
        coolvol::write_trace_csv(csv, report);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volume, Gaussian volume, and uniform sampling of convex bodies given by "
                 "membership oracles, via Gaussian cooling and the Metropolis ball walk"};
    CliConfig cli;
    app.add_option("--mode", cli.mode, "One of: volume, gaussian-volume, sample")
        ->check(CLI::IsMember({"volume", "gaussian-volume", "sample"}))
        ->required();
    app.add_option("--body", cli.body_path, "Path to the body specification JSON")->required();
    app.add_option("--eps", cli.eps, "Target relative error (volume modes) or sampling accuracy");
    app.add_option("--seed", cli.seed, "RNG seed; generated and echoed when absent");
    app.add_option("--profile", cli.profile, "Constant profile: practical (default) or paper")
        ->check(CLI::IsMember({"practical", "paper"}));
    app.add_option("--boost-p", cli.boost_p,
                   "Failure probability for median boosting (runs ceil(log 1/p) estimates)");
    app.add_option("--samples", cli.samples, "Number of points in sample mode (default 100)");
    app.add_option("--out", cli.out_path, "Output path (report JSON, or sample rows); stdout if absent");
    app.add_option("--trace-csv", cli.trace_csv_path, "Per-phase trace CSV path");
    app.add_option("--parallel-chains", cli.parallel_chains,
                   "Split each phase's samples across N independent chains");
    app.add_option("--mixing-constant", cli.mixing_constant, "Override the profile mixing constant");
    app.add_option("--delta-divisor", cli.delta_divisor, "Override the profile step-size divisor");
    app.add_option("--k", cli.samples_per_phase, "Override the per-phase sample count");
    app.add_flag("--no-lazy", cli.no_lazy, "Disable the lazy half-step coin");
    app.add_flag("--speedy-map,!--no-speedy-map", cli.speedy_map,
                 "Force the proper-step-to-target rejection mapping on or off "
                 "(profile default when absent; sample mode always maps)");
    CLI11_PARSE(app, argc, argv);

    if (!cli.seed) {
        std::random_device rd;
        cli.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        std::cerr << "note: no --seed given; using generated seed " << *cli.seed << "\n";
    }

    try {
        const coolvol::ConvexBody body = coolvol::load_body_spec(cli.body_path);
        if (cli.mode == "sample") return run_sample_mode(body, cli);
        return run_volume_mode(body, cli);
    } catch (const coolvol::body_spec_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const coolvol::body_validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const coolvol::walk_stuck_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitWalkAbort;
    }
}
