// Command-line front end: run, sweep, verify, spectrum.
//
// Exit status: 0 when every check passes, 1 for numerical failures and
// missing or incomplete artifacts, 2 for config and geometry errors.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lowmach/error.hpp"
#include "lowmach/harness.hpp"

using namespace lowmach;

namespace {

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnsupportedDimension:
    case ErrorCode::GeometryTooCoarse:
    case ErrorCode::DisconnectedDomain:
    case ErrorCode::OutOfHorizon:
        return 2;
    default:
        return 1;
    }
}

std::vector<double> parse_eps_list(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", first + used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::ParseError, "--eps: cannot read '" + item + "'");
        }
    }
    if (out.empty()) throw Error(ErrorCode::ParseError, "--eps: empty list");
    return out;
}

void print_summary(const SweepResult& r) {
    std::printf("%-8s %7s %14s %14s %14s %14s %12s\n", "eps", "steps", "rho_dev/eps", "|u-U|_L2(K)", "channels",
                "D(eps)", "res/eps^2");
    for (const auto& s : r.rows) {
        std::printf("%-8s %7ld %14.6e %14.6e %14.6e %14.6e %12.4e\n", format_eps(s.eps).c_str(), s.steps,
                    s.density_deviation, s.velocity_error, s.channel_total, s.rage,
                    s.residual_measure / (s.eps * s.eps));
    }
}

int do_sweep(ExperimentConfig config, const std::string& out, bool quiet) {
    SweepOptions options;
    if (!quiet) options.progress = [](const std::string& m) { std::fprintf(stderr, "[lowmach] %s\n", m.c_str()); };
    const SweepResult result = run_sweep(config, out, options);
    print_summary(result);
    const VerifyReport report = verify_run(out);
    for (const auto& c : report.checks) {
        if (!c.pass) std::fprintf(stderr, "check failed: %s (%g > %g) %s\n", c.name.c_str(), c.value, c.tolerance,
                                  c.detail.c_str());
    }
    std::printf("run directory: %s\n", out.c_str());
    return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low Mach number limit experiments around a moving obstacle"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "runs/default", verify_dir, eps_text;
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Suppress progress messages");

    auto* run = app.add_subcommand("run", "Run the configured eps sweep and verify it");
    run->add_option("--config", config_path, "Experiment config (YAML)")->required();
    run->add_option("--out", out_dir, "Run directory");

    auto* sweep = app.add_subcommand("sweep", "Run with the eps list replaced");
    sweep->add_option("--config", config_path, "Experiment config (YAML)")->required();
    sweep->add_option("--eps", eps_text, "Comma separated eps values, decreasing")->required();
    sweep->add_option("--out", out_dir, "Run directory");

    auto* verify = app.add_subcommand("verify", "Re-check a finished run directory");
    verify->add_option("dir", verify_dir, "Run directory")->required();

    auto* spectrum = app.add_subcommand("spectrum", "Print the Neumann eigenvalue table");
    spectrum->add_option("--config", config_path, "Experiment config (YAML)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) return do_sweep(load_config(config_path), out_dir, quiet);
        if (*sweep) {
            ExperimentConfig config = load_config(config_path);
            config.eps = parse_eps_list(eps_text);
            if (auto problems = validate(config); !problems.empty()) {
                std::string msg;
                for (std::size_t k = 0; k < problems.size(); ++k) msg += (k ? "; " : "") + problems[k];
                throw Error(ErrorCode::ValidationError, msg);
            }
            return do_sweep(config, out_dir, quiet);
        }
        if (*verify) {
            const VerifyReport report = verify_run(verify_dir);
            std::cout << report.to_json() << "\n";
            return report.pass() ? 0 : 1;
        }
        if (*spectrum) {
            std::cout << spectrum_table(load_config(config_path));
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
