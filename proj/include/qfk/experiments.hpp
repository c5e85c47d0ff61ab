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

/// \file experiments.hpp
/// Declarative experiment runner behind the qfk-lab CLI: variance scaling,
/// Fourier expressivity, 1-D classification, geometric difference, and the
/// Haar-moment validation suite. Every randomized quantity draws from a seed
/// materialized into the normalized config, so a saved config replays
/// bit-identically.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qfk::exp {

using json = nlohmann::ordered_json;

struct ExperimentConfig {
    std::string subcommand;
    json normalized; // full config with defaults and seeds materialized

    // Accessors over the normalized document.
    std::uint64_t seed() const { return normalized.at("seed").get<std::uint64_t>(); }
    int threads() const { return normalized.at("threads").get<int>(); }
    std::string out_dir() const { return normalized.at("out_dir").get<std::string>(); }
    bool plots() const { return normalized.at("plots").get<bool>(); }
};

/// Merge `input` over the subcommand's defaults (applying the --quick
/// profile first when set), validate field types/ranges, and materialize
/// every derived seed. Throws ConfigError on unknown or invalid fields.
ExperimentConfig normalize_config(const json &input,
                                  const std::string &subcommand);

struct ExperimentReport {
    json config_echo;
    std::vector<json> rows;      // flat objects, one per result row
    json comparators;            // analytic formula values where applicable
    double wall_seconds = 0.0;

    /// Sorted-row CSV rendering (column order = first-seen key order).
    std::string rows_as_csv() const;
};

ExperimentReport run_variance(const ExperimentConfig &config);
ExperimentReport run_fourier(const ExperimentConfig &config);
ExperimentReport run_classify(const ExperimentConfig &config);
ExperimentReport run_geodiff(const ExperimentConfig &config);
ExperimentReport run_moments(const ExperimentConfig &config);

/// Dispatch on config.subcommand.
ExperimentReport run(const ExperimentConfig &config);

/// Write config.normalized.json, results.csv, report.json and (when enabled)
/// plot_*.svg under config.out_dir().
void write_report(const ExperimentReport &report,
                  const ExperimentConfig &config);

} // namespace qfk::exp
