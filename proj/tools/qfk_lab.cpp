// Copyright 2026 The qfk-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qfk/errors.hpp"
#include "qfk/experiments.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    bool quick = false;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool threads_set = false;
};

void add_common(CLI::App *sub, CommonArgs &args) {
    sub->add_option("--config", args.config_path, "JSON config file");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_flag("--quick", args.quick, "reduced sizes for CI");
    sub->add_option("--threads", args.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "master seed");
}

int run_subcommand(const std::string &name, const CommonArgs &args,
                   const CLI::App *sub) {
    nlohmann::ordered_json input = nlohmann::ordered_json::object();
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in)
            throw qfk::ConfigError("cannot open config file: " +
                                   args.config_path);
        try {
            input = nlohmann::ordered_json::parse(in);
        } catch (const nlohmann::json::exception &e) {
            throw qfk::ConfigError(std::string("config parse error: ") +
                                   e.what());
        }
    }
    // CLI flags override config fields.
    if (args.quick)
        input["quick"] = true;
    if (!args.out_dir.empty())
        input["out_dir"] = args.out_dir;
    if (sub->count("--threads"))
        input["threads"] = args.threads;
    if (sub->count("--seed"))
        input["seed"] = args.seed;

    const qfk::exp::ExperimentConfig cfg =
        qfk::exp::normalize_config(input, name);
    const qfk::exp::ExperimentReport report = qfk::exp::run(cfg);
    qfk::exp::write_report(report, cfg);
    std::cout << name << ": " << report.rows.size() << " result rows in "
              << report.wall_seconds << " s -> " << cfg.out_dir() << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"qfk-lab: quantum-kernel scaling, expressivity and "
                 "classification experiments"};
    app.require_subcommand(1);

    const char *names[5] = {"variance", "fourier", "classify", "geodiff",
                            "moments"};
    const char *descr[5] = {
        "pooled off-diagonal kernel variance vs qubit count",
        "truncated Fourier coefficients of 1-D kernels",
        "SVM misclassification on sine-sign datasets",
        "geometric difference between Gram matrices",
        "Haar-moment and scaling-formula validation"};
    CommonArgs args[5];
    for (int i = 0; i < 5; ++i)
        add_common(app.add_subcommand(names[i], descr[i]), args[i]);

    CLI11_PARSE(app, argc, argv);

    try {
        for (int i = 0; i < 5; ++i) {
            const CLI::App *sub = app.get_subcommand(names[i]);
            if (sub->parsed())
                return run_subcommand(names[i], args[i], sub);
        }
    } catch (const qfk::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qfk::ResourceError &e) {
        std::cerr << "resource refusal: " << e.what() << "\n";
        return 3;
    } catch (const qfk::ConvergenceError &e) {
        std::cerr << "solver non-convergence: " << e.what() << "\n";
        return 4;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
