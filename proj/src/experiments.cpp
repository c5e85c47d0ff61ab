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

#include "qfk/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include "qfk/analysis.hpp"
#include "qfk/circuits.hpp"
#include "qfk/errors.hpp"
#include "qfk/haar.hpp"
#include "qfk/kernels.hpp"
#include "qfk/ml.hpp"
#include "qfk/parallel.hpp"
#include "qfk/rng.hpp"
#include "qfk/statevec.hpp"

namespace qfk::exp {

namespace {

using circ::CircuitTemplate;
using circ::Family;
using kern::KernelKind;
using kern::KernelSpec;

// Seed-derivation tags; changing these invalidates saved configs.
enum SeedTag : std::uint64_t {
    kDataSet = 100,
    kParamSet = 200,
    kStructure = 300,
    kFourierTheta = 400,
    kDataset = 500,
    kClassifyTheta = 600,
    kGeoData = 700,
    kGeoTheta = 800,
    kMoments = 900,
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t a) {
    return derive_seed(seed, a);
}
std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(seed, a), b);
}
std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                  std::uint64_t c) {
    return derive_seed(mix(seed, a, b), c);
}

json base_defaults() {
    json j;
    j["seed"] = std::uint64_t{20260811};
    j["threads"] = 1;
    j["out_dir"] = "out";
    j["plots"] = true;
    j["quick"] = false;
    j["memory_budget_mb"] = 8192;
    j["max_qubits"] = 0; // 0 keeps the process ceiling (QFK_MAX_QUBITS / 24)
    return j;
}

json defaults_for(const std::string &sub) {
    json j = base_defaults();
    if (sub == "variance") {
        j["families"] = {"tensor_product", "iqp", "ala", "hea"};
        j["kernels"] = {"fidelity", "aldqfk_normalized"};
        j["n_values"] = {2, 4, 6, 8};
        j["depth"] = 3;
        j["block_width"] = 2;
        j["data_points"] = 100;
        j["data_sets"] = 5;
        j["param_sets"] = 5;
    } else if (sub == "fourier") {
        // HEA needs n >= 2; run it via a custom config when wanted.
        j["families"] = {"ala"};
        j["kernels"] = {"fidelity", "aldqfk_normalized"};
        j["n_values"] = {1, 2};
        j["L_values"] = {2, 3, 4};
        j["block_width"] = 2;
        j["grid_points"] = 100;
        j["cutoff"] = 12;
        j["theta_seeds"] = 10;
    } else if (sub == "classify") {
        j["family"] = "ala";
        j["kernels"] = {"fidelity", "aldqfk_normalized"};
        j["n"] = 1;
        j["L_values"] = {2, 3, 4};
        j["block_width"] = 2;
        j["w_values"] = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
        j["phase_b"] = 0.3;
        j["dataset_points"] = 100;
        j["folds"] = 5;
        j["theta_seeds"] = 10;
        j["grid_points"] = 100;
        j["cutoff"] = 12;
    } else if (sub == "geodiff") {
        j["family"] = "hea";
        j["depth"] = 3;
        j["block_width"] = 2;
        j["n_values"] = {2, 4, 6, 8};
        j["points"] = 60;
        j["theta_seeds"] = 10;
        j["eigen_floor_rel"] = 1e-10;
    } else if (sub == "moments") {
        j["dims"] = {2, 4};
        j["mc_samples"] = 20000;
        j["closure_samples"] = 10000;
        j["closure_n_fidelity"] = {2, 3, 4};
        j["closure_n_aldqfk"] = {2, 3};
        j["closure_n_ala"] = {4, 6, 8};
        j["batches"] = 100;
    } else {
        throw ConfigError("unknown subcommand: " + sub);
    }
    return j;
}

void apply_quick_profile(json &j, const std::string &sub) {
    if (sub == "variance") {
        j["data_points"] = 20;
        j["data_sets"] = 2;
        j["param_sets"] = 2;
    } else if (sub == "fourier") {
        j["theta_seeds"] = 3;
        j["grid_points"] = 50;
    } else if (sub == "classify") {
        j["theta_seeds"] = 3;
        j["dataset_points"] = 20;
        j["grid_points"] = 50;
        j["w_values"] = {2, 4, 6, 8, 10, 12};
    } else if (sub == "geodiff") {
        j["points"] = 20;
        j["theta_seeds"] = 3;
    } else if (sub == "moments") {
        j["mc_samples"] = 4000;
        j["closure_samples"] = 4000;
    }
}

int effective_block_width(Family family, int n, int block_width) {
    if (family != Family::Ala)
        return block_width;
    return n == 1 ? 1 : block_width;
}

void validate_family_n(Family family, int n, int block_width) {
    if (n < 1)
        throw ConfigError("qubit count must be >= 1");
    if ((family == Family::Iqp || family == Family::Hea) && n < 2)
        throw ConfigError(std::string(circ::family_name(family)) +
                          " needs at least 2 qubits");
    if (family == Family::Ala) {
        const int m = effective_block_width(family, n, block_width);
        if (m < 1 || n % m != 0)
            throw ConfigError("ala: n=" + std::to_string(n) +
                              " is not divisible by block_width=" +
                              std::to_string(m));
    }
}

std::shared_ptr<const CircuitTemplate>
make_template(Family family, int n, int block_width, int depth,
              std::uint64_t structure_seed) {
    switch (family) {
    case Family::TensorProduct:
        return std::make_shared<CircuitTemplate>(
            CircuitTemplate::tensor_product(n, depth));
    case Family::Iqp:
        return std::make_shared<CircuitTemplate>(CircuitTemplate::iqp(n, depth));
    case Family::Ala:
        return std::make_shared<CircuitTemplate>(CircuitTemplate::ala(
            n, effective_block_width(family, n, block_width), depth,
            structure_seed));
    case Family::Hea:
        return std::make_shared<CircuitTemplate>(
            CircuitTemplate::hea(n, depth, structure_seed));
    }
    throw ConfigError("unknown family");
}

std::vector<double> draw_angles(std::uint64_t seed, int count) {
    Rng rng(seed);
    std::vector<double> v(count);
    for (double &x : v)
        x = rng.angle();
    return v;
}

std::vector<double> broadcast_inputs(std::span<const double> xs, int n) {
    std::vector<double> data;
    data.reserve(xs.size() * n);
    for (double x : xs)
        for (int q = 0; q < n; ++q)
            data.push_back(x);
    return data;
}

std::vector<double> uniform_grid(int points) {
    std::vector<double> xs(points);
    for (int a = 0; a < points; ++a)
        xs[a] = -std::numbers::pi + 2.0 * std::numbers::pi * a / points;
    return xs;
}

/// Peak feature-storage estimate in MiB for one Gram computation.
double estimate_peak_mib(KernelKind kind, int points, int n, int depth) {
    const double dim_bytes = std::pow(2.0, n) * 16.0;
    double per_point = 1.0;
    if (kind == KernelKind::Aldqfk || kind == KernelKind::AldqfkNormalized)
        per_point = 2.0 * n * depth + 2.0;
    else if (kind == KernelKind::SldqfkParamShift)
        per_point = 4.0 * n * depth + 2.0;
    return points * per_point * dim_bytes / (1024.0 * 1024.0);
}

void guard_resources(const ExperimentConfig &cfg, KernelKind worst_kind,
                     int points, int max_n, int depth) {
    if (max_n > sv::max_qubits())
        throw ResourceError("requested " + std::to_string(max_n) +
                            " qubits, ceiling is " +
                            std::to_string(sv::max_qubits()));
    const double budget = cfg.normalized.at("memory_budget_mb").get<double>();
    const double peak = estimate_peak_mib(worst_kind, points, max_n, depth);
    if (peak > budget)
        throw ResourceError("estimated peak statevector memory " +
                            std::to_string(peak) + " MiB exceeds budget " +
                            std::to_string(budget) + " MiB");
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / v.size();
}

double std_of(std::span<const double> v) {
    if (v.size() < 2)
        return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / v.size());
}

/// Ordinary least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y) {
    const double mx = mean_of(x), my = mean_of(y);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return den > 0.0 ? num / den : 0.0;
}

// ---------------------------------------------------------------------------
// Minimal SVG line plots (no plotting dependency).

struct PlotSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

void svg_line_plot(const std::string &path, const std::string &title,
                   const std::string &xlabel, const std::string &ylabel,
                   const std::vector<PlotSeries> &series) {
    static const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b",
                                    "#17becf", "#7f7f7f"};
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto &s : series)
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin > xmax)
        return; // nothing to plot
    if (xmax - xmin < 1e-12)
        xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12)
        ymax = ymin + 1.0;
    const double W = 720, H = 480, ml = 70, mr = 170, mt = 40, mb = 50;
    auto px = [&](double x) {
        return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
    };
    auto py = [&](double y) {
        return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
    };
    std::ofstream out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
        << "' height='" << H << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << W / 2 << "' y='20' text-anchor='middle' "
        << "font-size='15'>" << title << "</text>\n";
    out << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr
        << "' y2='" << H - mb << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
        << H - mb << "' stroke='black'/>\n";
    out << "<text x='" << (ml + W - mr) / 2 << "' y='" << H - 12
        << "' text-anchor='middle' font-size='12'>" << xlabel << "</text>\n";
    out << "<text x='18' y='" << (mt + H - mb) / 2
        << "' font-size='12' transform='rotate(-90 18 " << (mt + H - mb) / 2
        << ")' text-anchor='middle'>" << ylabel << "</text>\n";
    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(4);
        os << v;
        return os.str();
    };
    out << "<text x='" << ml << "' y='" << H - mb + 16
        << "' font-size='10' text-anchor='middle'>" << fmt(xmin)
        << "</text>\n";
    out << "<text x='" << W - mr << "' y='" << H - mb + 16
        << "' font-size='10' text-anchor='middle'>" << fmt(xmax)
        << "</text>\n";
    out << "<text x='" << ml - 6 << "' y='" << H - mb
        << "' font-size='10' text-anchor='end'>" << fmt(ymin) << "</text>\n";
    out << "<text x='" << ml - 6 << "' y='" << mt + 4
        << "' font-size='10' text-anchor='end'>" << fmt(ymax) << "</text>\n";
    int ci = 0;
    for (const auto &s : series) {
        const char *color = palette[ci % 8];
        std::ostringstream pts;
        for (auto [x, y] : s.points)
            pts << px(x) << ',' << py(y) << ' ';
        out << "<polyline fill='none' stroke='" << color
            << "' stroke-width='1.5' points='" << pts.str() << "'/>\n";
        for (auto [x, y] : s.points)
            out << "<circle cx='" << px(x) << "' cy='" << py(y)
                << "' r='2.5' fill='" << color << "'/>\n";
        out << "<text x='" << W - mr + 10 << "' y='" << mt + 14 + 16 * ci
            << "' font-size='11' fill='" << color << "'>" << s.name
            << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

} // namespace

// ---------------------------------------------------------------------------

ExperimentConfig normalize_config(const json &input,
                                  const std::string &subcommand) {
    json cfg = defaults_for(subcommand);
    bool quick = cfg["quick"].get<bool>();
    if (input.contains("quick")) {
        if (!input["quick"].is_boolean())
            throw ConfigError("quick must be a boolean");
        quick = input["quick"].get<bool>();
    }
    if (quick) {
        cfg["quick"] = true;
        apply_quick_profile(cfg, subcommand);
    }
    for (auto it = input.begin(); it != input.end(); ++it) {
        if (it.key() == "subcommand") {
            if (it.value() != subcommand)
                throw ConfigError("config subcommand '" +
                                  it.value().dump() +
                                  "' does not match '" + subcommand + "'");
            continue;
        }
        if (it.key() == "derived_seeds")
            continue; // regenerated below
        if (!cfg.contains(it.key()))
            throw ConfigError("unknown config field: " + it.key());
        cfg[it.key()] = it.value();
    }

    if (cfg["threads"].get<int>() < 1)
        throw ConfigError("threads must be >= 1");
    if (cfg["max_qubits"].get<int>() < 0)
        throw ConfigError("max_qubits must be >= 0 (0 keeps the ceiling)");

    // Family/kernel/qubit validation.
    auto check_names = [&](const char *key, auto parser) {
        if (!cfg.contains(key))
            return;
        if (cfg[key].is_string()) {
            parser(cfg[key].template get<std::string>());
            return;
        }
        for (const auto &v : cfg[key])
            parser(v.template get<std::string>());
    };
    try {
        check_names("families", [](const std::string &s) { circ::family_from_name(s); });
        check_names("family", [](const std::string &s) { circ::family_from_name(s); });
        check_names("kernels", [](const std::string &s) { kern::kernel_from_name(s); });
    } catch (const ArgumentError &e) {
        throw ConfigError(e.what());
    }

    const int bw = cfg.value("block_width", 2);
    auto validate_n_list = [&](const json &ns, const json &fams) {
        for (const auto &nv : ns)
            for (const auto &fv : fams)
                validate_family_n(circ::family_from_name(fv.get<std::string>()),
                                  nv.get<int>(), bw);
    };
    if (subcommand == "variance" || subcommand == "fourier")
        validate_n_list(cfg["n_values"], cfg["families"]);
    if (subcommand == "classify")
        validate_n_list(json::array({cfg["n"]}),
                        json::array({cfg["family"]}));
    if (subcommand == "geodiff")
        validate_n_list(cfg["n_values"], json::array({cfg["family"]}));
    if (subcommand == "classify" && cfg["dataset_points"].get<int>() < 10)
        throw ConfigError("dataset_points must be >= 10");
    if (cfg.contains("cutoff") && cfg.contains("grid_points") &&
        cfg["grid_points"].get<int>() < 2 * cfg["cutoff"].get<int>() + 1)
        throw ConfigError("grid_points must be at least 2*cutoff+1");

    // Materialize the derived seeds so every randomized quantity is explicit
    // in the saved config.
    const auto seed = cfg["seed"].get<std::uint64_t>();
    json ds;
    auto seed_list = [&](std::uint64_t tag, int count) {
        json arr = json::array();
        for (int i = 0; i < count; ++i)
            arr.push_back(mix(seed, tag, i));
        return arr;
    };
    if (subcommand == "variance") {
        ds["data_set_seeds"] = seed_list(kDataSet, cfg["data_sets"].get<int>());
        ds["param_set_seeds"] = seed_list(kParamSet, cfg["param_sets"].get<int>());
        ds["structure_root"] = mix(seed, kStructure);
    } else if (subcommand == "fourier") {
        ds["theta_seeds"] = seed_list(kFourierTheta, cfg["theta_seeds"].get<int>());
        ds["structure_root"] = mix(seed, kStructure);
    } else if (subcommand == "classify") {
        json w_seeds = json::object();
        for (const auto &wv : cfg["w_values"])
            w_seeds[std::to_string(wv.get<int>())] =
                mix(seed, kDataset, wv.get<std::uint64_t>());
        ds["dataset_seeds"] = w_seeds;
        ds["theta_seeds"] = seed_list(kClassifyTheta, cfg["theta_seeds"].get<int>());
        ds["structure_root"] = mix(seed, kStructure);
    } else if (subcommand == "geodiff") {
        ds["data_seeds"] = seed_list(kGeoData, cfg["theta_seeds"].get<int>());
        ds["theta_seeds"] = seed_list(kGeoTheta, cfg["theta_seeds"].get<int>());
        ds["structure_root"] = mix(seed, kStructure);
    } else if (subcommand == "moments") {
        ds["battery_seed"] = mix(seed, kMoments, 0);
        ds["closure_seed"] = mix(seed, kMoments, 1);
    }
    cfg["derived_seeds"] = ds;

    ExperimentConfig out;
    out.subcommand = subcommand;
    json ordered;
    ordered["subcommand"] = subcommand;
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        ordered[it.key()] = it.value();
    out.normalized = std::move(ordered);
    return out;
}

// ---------------------------------------------------------------------------

ExperimentReport run_variance(const ExperimentConfig &config) {
    const auto t0 = std::chrono::steady_clock::now();
    const json &cfg = config.normalized;
    const auto seed = config.seed();
    const int depth = cfg.at("depth").get<int>();
    const int bw = cfg.at("block_width").get<int>();
    const int points = cfg.at("data_points").get<int>();
    const int data_sets = cfg.at("data_sets").get<int>();
    const int param_sets = cfg.at("param_sets").get<int>();
    const int threads = config.threads();

    int max_n = 0;
    for (const auto &nv : cfg.at("n_values"))
        max_n = std::max(max_n, nv.get<int>());
    guard_resources(config, KernelKind::Aldqfk, points, max_n, depth);

    ExperimentReport report;
    report.config_echo = cfg;
    json comparators = json::array();

    for (const auto &kv : cfg.at("kernels")) {
        const KernelKind kind = kern::kernel_from_name(kv.get<std::string>());
        for (const auto &fv : cfg.at("families")) {
            const Family family = circ::family_from_name(fv.get<std::string>());
            for (const auto &nv : cfg.at("n_values")) {
                const int n = nv.get<int>();
                std::vector<kern::GramMatrix> grams;
                grams.reserve(static_cast<std::size_t>(data_sets) * param_sets);
                std::string circuit0;
                for (int b = 0; b < param_sets; ++b) {
                    for (int a = 0; a < data_sets; ++a) {
                        // Circuit randomness (HEA axes) is resampled per
                        // combination; theta is shared across the data sets
                        // of one parameter set.
                        const auto tpl = make_template(
                            family, n, bw, depth,
                            mix(seed, kStructure,
                                static_cast<std::uint64_t>(n),
                                static_cast<std::uint64_t>(b * 1000 + a)));
                        const auto theta =
                            draw_angles(mix(seed, kParamSet, b, n),
                                        tpl->param_count());
                        const KernelSpec spec(kind, tpl, theta);
                        if (circuit0.empty())
                            circuit0 = tpl->descriptor();
                        const auto data = draw_angles(
                            mix(seed, kDataSet, a, n), points * n);
                        kern::GramMatrix g =
                            kern::gram_matrix(spec, data, points, threads);
                        g.data_seed = mix(seed, kDataSet, a, n);
                        g.theta_seed = mix(seed, kParamSet, b, n);
                        grams.push_back(std::move(g));
                    }
                }
                const analysis::PooledStats st =
                    analysis::pooled_offdiag_stats(grams);

                json row;
                row["row"] = std::string("variance/") +
                             kern::kernel_name(kind) + "/" +
                             circ::family_name(family) +
                             "/n=" + std::to_string(n);
                row["kernel"] = kern::kernel_name(kind);
                row["family"] = circ::family_name(family);
                row["n"] = n;
                row["depth"] = depth;
                row["points"] = points;
                row["combos"] = data_sets * param_sets;
                row["mean"] = st.mean;
                row["variance"] = st.variance;
                row["count"] = st.count;
                row["circuit0"] = circuit0;

                // Analytic comparators from the closed-form results.
                const bool fisher = kind != KernelKind::Fidelity;
                haar::ScalingFormula formula{};
                if (!fisher) {
                    if (family == Family::Ala)
                        formula = haar::analytic_fidelity_stats(
                            n, haar::CircuitCase::Ala,
                            effective_block_width(family, n, bw));
                    else if (family == Family::TensorProduct)
                        formula = haar::analytic_fidelity_stats(
                            n, haar::CircuitCase::Ala, 1);
                    else
                        formula = haar::analytic_fidelity_stats(
                            n, haar::CircuitCase::GlobalRandom);
                } else {
                    if (family == Family::Ala)
                        formula = haar::analytic_aldqfk_stats(
                            n, haar::CircuitCase::Ala,
                            effective_block_width(family, n, bw), 1);
                    else if (family == Family::TensorProduct)
                        formula = haar::analytic_aldqfk_stats(
                            n, haar::CircuitCase::Ala, 1, 1);
                    else
                        formula = haar::analytic_aldqfk_stats(
                            n, haar::CircuitCase::GlobalRandom);
                }
                row["analytic_mean"] = formula.mean;
                row["analytic_variance"] = formula.variance_value;
                row["analytic_comparator"] = formula.comparator();
                row["variance_kind"] =
                    formula.variance_kind == haar::VarianceKind::Exact
                        ? "exact"
                        : (formula.variance_kind == haar::VarianceKind::UpperBound
                               ? "upper_bound"
                               : "lower_bound");
                row["comparator_scope"] = fisher ? "per_term" : "kernel";
                report.rows.push_back(std::move(row));

                json cmp;
                cmp["kernel"] = kern::kernel_name(kind);
                cmp["family"] = circ::family_name(family);
                cmp["n"] = n;
                cmp["mean"] = formula.mean;
                cmp["variance"] = formula.variance_value;
                cmp["pre_subtraction"] = formula.pre_subtraction;
                comparators.push_back(std::move(cmp));
            }
        }
    }

    // Fitted log2-variance slope per (kernel, family).
    std::map<std::pair<std::string, std::string>,
             std::pair<std::vector<double>, std::vector<double>>>
        curves;
    for (const json &row : report.rows) {
        if (!row.contains("variance"))
            continue;
        auto &c = curves[{row["kernel"], row["family"]}];
        c.first.push_back(row["n"].get<double>());
        c.second.push_back(std::log2(
            std::max(row["variance"].get<double>(), 1e-300)));
    }
    for (const auto &[key, c] : curves) {
        json row;
        row["row"] = "variance_slope/" + key.first + "/" + key.second;
        row["kernel"] = key.first;
        row["family"] = key.second;
        row["log2_variance_slope"] = fit_slope(c.first, c.second);
        report.rows.push_back(std::move(row));
    }

    report.comparators = std::move(comparators);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_fourier(const ExperimentConfig &config) {
    const auto t0 = std::chrono::steady_clock::now();
    const json &cfg = config.normalized;
    const auto seed = config.seed();
    const int bw = cfg.at("block_width").get<int>();
    const int grid_points = cfg.at("grid_points").get<int>();
    const int cutoff = cfg.at("cutoff").get<int>();
    const int n_seeds = cfg.at("theta_seeds").get<int>();
    const int threads = config.threads();

    int max_n = 0;
    for (const auto &nv : cfg.at("n_values"))
        max_n = std::max(max_n, nv.get<int>());
    int max_L = 0;
    for (const auto &lv : cfg.at("L_values"))
        max_L = std::max(max_L, lv.get<int>());
    guard_resources(config, KernelKind::Aldqfk, grid_points, max_n, max_L);

    const std::vector<double> xs = uniform_grid(grid_points);
    const int nf = 2 * cutoff + 1;

    ExperimentReport report;
    report.config_echo = cfg;

    // Mean |c| tables per (kernel, family, n, L) for the support-overlap rows.
    std::map<std::string, Eigen::MatrixXd> mean_abs;
    auto setting_key = [](const std::string &kernel, const std::string &family,
                          int n, int L) {
        return kernel + "/" + family + "/n=" + std::to_string(n) +
               "/L=" + std::to_string(L);
    };

    std::filesystem::create_directories(config.out_dir());
    for (const auto &fv : cfg.at("families")) {
        const Family family = circ::family_from_name(fv.get<std::string>());
        for (const auto &nv : cfg.at("n_values")) {
            const int n = nv.get<int>();
            for (const auto &lv : cfg.at("L_values")) {
                const int L = lv.get<int>();
                for (const auto &kv : cfg.at("kernels")) {
                    const KernelKind kind =
                        kern::kernel_from_name(kv.get<std::string>());
                    std::vector<double> maes;
                    Eigen::MatrixXd abs_sum = Eigen::MatrixXd::Zero(nf, nf);
                    analysis::FourierTable first_table;
                    std::string circuit0;
                    for (int j = 0; j < n_seeds; ++j) {
                        const auto tpl = make_template(
                            family, n, bw, L,
                            mix(seed, kStructure, n * 100 + L, j));
                        const auto theta = draw_angles(
                            mix(seed, kFourierTheta, j, n * 100 + L),
                            tpl->param_count());
                        const KernelSpec spec(kind, tpl, theta);
                        const auto data = broadcast_inputs(xs, n);
                        const kern::GramMatrix g = kern::gram_matrix(
                            spec, data, grid_points, threads);
                        const analysis::FourierTable table =
                            analysis::fourier_fit(xs, analysis::to_eigen(g),
                                                  cutoff);
                        maes.push_back(table.fit_mae);
                        abs_sum += table.coeffs.cwiseAbs();
                        if (j == 0) {
                            first_table = table;
                            circuit0 = tpl->descriptor();
                        }
                    }
                    const Eigen::MatrixXd abs_mean = abs_sum / n_seeds;
                    const std::string key = setting_key(
                        kern::kernel_name(kind), circ::family_name(family), n,
                        L);
                    mean_abs[key] = abs_mean;

                    int support = 0;
                    for (int r = 0; r < nf; ++r)
                        for (int c = 0; c < nf; ++c)
                            if (abs_mean(r, c) > 1e-3)
                                ++support;

                    json row;
                    row["row"] = "fourier/" + key;
                    row["kernel"] = kern::kernel_name(kind);
                    row["family"] = circ::family_name(family);
                    row["n"] = n;
                    row["L"] = L;
                    row["fit_mae_mean"] = mean_of(maes);
                    row["fit_mae_std"] = std_of(maes);
                    row["support_above_1e3"] = support;
                    row["max_abs_coeff"] = abs_mean.maxCoeff();
                    row["circuit0"] = circuit0;
                    report.rows.push_back(std::move(row));

                    // Seed-0 coefficient table; sub-threshold amplitudes are
                    // kept but flagged.
                    std::ostringstream name;
                    name << "fourier_coeffs_" << kern::kernel_name(kind) << "_"
                         << circ::family_name(family) << "_n" << n << "_L" << L
                         << ".csv";
                    std::ofstream fcsv(
                        std::filesystem::path(config.out_dir()) / name.str());
                    fcsv << "omega,omega_prime,re,im,abs,sub_threshold\n";
                    fcsv.precision(17);
                    for (int w = -cutoff; w <= cutoff; ++w)
                        for (int wp = -cutoff; wp <= cutoff; ++wp) {
                            const auto c = first_table.at(w, wp);
                            fcsv << w << ',' << wp << ',' << c.real() << ','
                                 << c.imag() << ',' << std::abs(c) << ','
                                 << (std::abs(c) < 1e-3 ? 1 : 0) << '\n';
                        }
                }

                // Support overlap between the two kernels at this setting.
                const auto ks = cfg.at("kernels");
                if (ks.size() == 2) {
                    const auto &a = mean_abs.at(setting_key(
                        ks[0].get<std::string>(), circ::family_name(family), n, L));
                    const auto &b = mean_abs.at(setting_key(
                        ks[1].get<std::string>(), circ::family_name(family), n, L));
                    int joint = 0, exclusive = 0;
                    for (int r = 0; r < nf; ++r)
                        for (int c = 0; c < nf; ++c) {
                            const bool in_a = a(r, c) > 1e-2;
                            const bool in_b = b(r, c) > 1e-2;
                            if (in_a || in_b) {
                                ++joint;
                                if (in_a != in_b)
                                    ++exclusive;
                            }
                        }
                    json row;
                    row["row"] = std::string("fourier_overlap/") +
                                 circ::family_name(family) +
                                 "/n=" + std::to_string(n) +
                                 "/L=" + std::to_string(L);
                    row["family"] = circ::family_name(family);
                    row["n"] = n;
                    row["L"] = L;
                    row["joint_support"] = joint;
                    row["exclusive_support"] = exclusive;
                    row["exclusive_fraction"] =
                        joint > 0 ? static_cast<double>(exclusive) / joint : 0.0;
                    report.rows.push_back(std::move(row));
                }
            }
        }
    }

    // Amplitude spectrum of the first setting, one series per kernel, the
    // coefficients aligned on one axis by linear index.
    if (config.plots() && !cfg.at("kernels").empty()) {
        const auto &fam0 = cfg.at("families")[0];
        const int n0 = cfg.at("n_values")[0].get<int>();
        const int L0 = cfg.at("L_values")[0].get<int>();
        std::vector<PlotSeries> list;
        for (const auto &kv : cfg.at("kernels")) {
            const std::string key =
                setting_key(kv.get<std::string>(),
                            circ::family_name(circ::family_from_name(
                                fam0.get<std::string>())),
                            n0, L0);
            const auto it = mean_abs.find(key);
            if (it == mean_abs.end())
                continue;
            PlotSeries s;
            s.name = kv.get<std::string>();
            for (int r = 0; r < nf; ++r)
                for (int c = 0; c < nf; ++c)
                    s.points.emplace_back(r * nf + c, it->second(r, c));
            list.push_back(std::move(s));
        }
        svg_line_plot((std::filesystem::path(config.out_dir()) /
                       "plot_fourier.svg")
                          .string(),
                      "mean coefficient amplitudes, " +
                          fam0.get<std::string>() + " n=" +
                          std::to_string(n0) + " L=" + std::to_string(L0),
                      "coefficient index", "|c|", list);
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_classify(const ExperimentConfig &config) {
    const auto t0 = std::chrono::steady_clock::now();
    const json &cfg = config.normalized;
    const auto seed = config.seed();
    const Family family =
        circ::family_from_name(cfg.at("family").get<std::string>());
    const int n = cfg.at("n").get<int>();
    const int bw = cfg.at("block_width").get<int>();
    const double phase_b = cfg.at("phase_b").get<double>();
    const int dataset_points = cfg.at("dataset_points").get<int>();
    const int folds = cfg.at("folds").get<int>();
    const int n_seeds = cfg.at("theta_seeds").get<int>();
    const int grid_points = cfg.at("grid_points").get<int>();
    const int cutoff = cfg.at("cutoff").get<int>();
    const int threads = config.threads();

    std::vector<int> L_values, w_values;
    for (const auto &lv : cfg.at("L_values"))
        L_values.push_back(lv.get<int>());
    for (const auto &wv : cfg.at("w_values"))
        w_values.push_back(wv.get<int>());
    int max_L = *std::max_element(L_values.begin(), L_values.end());
    guard_resources(config, KernelKind::Aldqfk,
                    std::max(dataset_points, grid_points), n, max_L);
    for (int w : w_values)
        if (w > cutoff)
            throw ConfigError("w=" + std::to_string(w) +
                              " exceeds the Fourier cutoff " +
                              std::to_string(cutoff));

    const std::vector<double> xs = uniform_grid(grid_points);

    ExperimentReport report;
    report.config_echo = cfg;

    struct Cell {
        double misclass = 0.0;
        double c_abs = 0.0;
        double best_c = 0.0;
    };

    for (const auto &kv : cfg.at("kernels")) {
        const KernelKind kind = kern::kernel_from_name(kv.get<std::string>());
        // cells[L_index][j][w_index]
        std::vector<std::vector<std::vector<Cell>>> cells(
            L_values.size(),
            std::vector<std::vector<Cell>>(
                n_seeds, std::vector<Cell>(w_values.size())));

        const std::size_t tasks = L_values.size() * n_seeds;
        parallel_for(tasks, threads, [&](std::size_t task) {
            const int li = static_cast<int>(task / n_seeds);
            const int j = static_cast<int>(task % n_seeds);
            const int L = L_values[li];
            const auto tpl =
                make_template(family, n, bw, L,
                              mix(seed, kStructure, L, j));
            const auto theta = draw_angles(
                mix(seed, kClassifyTheta, j, L), tpl->param_count());
            const KernelSpec spec(kind, tpl, theta);

            // One Fourier fit per (L, theta); shared across frequencies.
            const auto grid_data = broadcast_inputs(xs, n);
            const kern::GramMatrix grid_gram =
                kern::gram_matrix(spec, grid_data, grid_points, 1);
            const analysis::FourierTable table = analysis::fourier_fit(
                xs, analysis::to_eigen(grid_gram), cutoff);

            for (std::size_t wi = 0; wi < w_values.size(); ++wi) {
                const int w = w_values[wi];
                const ml::LabeledDataset ds = ml::make_sine_dataset(
                    dataset_points, w, phase_b, mix(seed, kDataset, w));
                const auto data = broadcast_inputs(ds.inputs, n);
                const kern::GramMatrix gram =
                    kern::gram_matrix(spec, data, dataset_points, 1);
                const Eigen::MatrixXd K = analysis::to_eigen(gram);

                const auto &tr = ds.train_indices;
                const int tn = static_cast<int>(tr.size());
                Eigen::MatrixXd sub(tn, tn);
                std::vector<int> sub_labels(tn);
                for (int a2 = 0; a2 < tn; ++a2) {
                    sub_labels[a2] = ds.labels[tr[a2]];
                    for (int b2 = 0; b2 < tn; ++b2)
                        sub(a2, b2) = K(tr[a2], tr[b2]);
                }
                const ml::CvResult cv = ml::cross_validate_c(
                    sub, sub_labels, folds, mix(seed, kDataset, w, j));
                const ml::SvmModel model =
                    ml::svm_train(sub, sub_labels, cv.best_c);

                std::vector<int> pred, truth;
                std::vector<double> krow(tn);
                for (int tidx : ds.test_indices) {
                    for (int a2 = 0; a2 < tn; ++a2)
                        krow[a2] = K(tidx, tr[a2]);
                    pred.push_back(ml::svm_predict(model, krow));
                    truth.push_back(ds.labels[tidx]);
                }
                Cell &cell = cells[li][j][wi];
                cell.misclass = ml::misclassification_rate(pred, truth);
                cell.c_abs = std::abs(table.at(w, -w));
                cell.best_c = cv.best_c;
            }
        });

        // Aggregate per (L, w) and rank-correlate per seed.
        std::vector<double> curve_amp, curve_acc;
        for (std::size_t li = 0; li < L_values.size(); ++li) {
            const std::string circuit0 =
                make_template(family, n, bw, L_values[li],
                              mix(seed, kStructure, L_values[li], 0))
                    ->descriptor();
            for (std::size_t wi = 0; wi < w_values.size(); ++wi) {
                std::vector<double> mis, cabs;
                for (int j = 0; j < n_seeds; ++j) {
                    mis.push_back(cells[li][j][wi].misclass);
                    cabs.push_back(cells[li][j][wi].c_abs);
                }
                // Seed-averaged series; amplitudes below the dual-visibility
                // threshold 1e-3 are clamped to a tie for the ranking.
                const double amp = mean_of(cabs);
                curve_amp.push_back(amp < 1e-3 ? 0.0 : amp);
                curve_acc.push_back(1.0 - mean_of(mis));
                json row;
                row["row"] = std::string("classify/") + kern::kernel_name(kind) +
                             "/L=" + std::to_string(L_values[li]) +
                             "/w=" + std::to_string(w_values[wi]);
                row["kernel"] = kern::kernel_name(kind);
                row["family"] = circ::family_name(family);
                row["n"] = n;
                row["L"] = L_values[li];
                row["w"] = w_values[wi];
                row["misclass_mean"] = mean_of(mis);
                row["misclass_std"] = std_of(mis);
                row["c_abs_mean"] = mean_of(cabs);
                row["circuit0"] = circuit0;
                report.rows.push_back(std::move(row));
            }
        }
        std::vector<double> rhos;
        for (int j = 0; j < n_seeds; ++j) {
            std::vector<double> amp, acc;
            for (std::size_t li = 0; li < L_values.size(); ++li)
                for (std::size_t wi = 0; wi < w_values.size(); ++wi) {
                    amp.push_back(cells[li][j][wi].c_abs);
                    acc.push_back(1.0 - cells[li][j][wi].misclass);
                }
            rhos.push_back(analysis::spearman(amp, acc));
        }
        json row;
        row["row"] = std::string("classify_spearman/") + kern::kernel_name(kind);
        row["kernel"] = kern::kernel_name(kind);
        row["spearman_mean"] = mean_of(rhos);
        row["spearman_std"] = std_of(rhos);
        report.rows.push_back(std::move(row));

        // Rank correlation of the seed-averaged curves (what the figures
        // plot): amplitude vs accuracy over all (L, w) cells.
        json crow;
        crow["row"] =
            std::string("classify_spearman_curve/") + kern::kernel_name(kind);
        crow["kernel"] = kern::kernel_name(kind);
        crow["spearman_curve"] = analysis::spearman(curve_amp, curve_acc);
        report.rows.push_back(std::move(crow));
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run_geodiff(const ExperimentConfig &config) {
    const auto t0 = std::chrono::steady_clock::now();
    const json &cfg = config.normalized;
    const auto seed = config.seed();
    const Family family =
        circ::family_from_name(cfg.at("family").get<std::string>());
    const int depth = cfg.at("depth").get<int>();
    const int bw = cfg.at("block_width").get<int>();
    const int points = cfg.at("points").get<int>();
    const int trials = cfg.at("theta_seeds").get<int>();
    const double floor_rel = cfg.at("eigen_floor_rel").get<double>();
    const int threads = config.threads();

    int max_n = 0;
    for (const auto &nv : cfg.at("n_values"))
        max_n = std::max(max_n, nv.get<int>());
    guard_resources(config, KernelKind::Aldqfk, points, max_n, depth);

    ExperimentReport report;
    report.config_echo = cfg;
    report.comparators["data"] =
        "synthetic standardized gaussian inputs (no external dataset)";

    const char *comparisons[3] = {"aldqfk_vs_fidelity", "fidelity_vs_identity",
                                  "aldqfk_vs_identity"};

    for (const auto &nv : cfg.at("n_values")) {
        const int n = nv.get<int>();
        std::vector<std::array<analysis::GeoDiffResult, 3>> results(trials);
        std::string circuit0;
        for (int t = 0; t < trials; ++t) {
            // Standardized synthetic data: N(0,1) per dimension, then
            // re-centered/rescaled per column.
            Rng rng(mix(seed, kGeoData, t, n));
            std::vector<double> data(static_cast<std::size_t>(points) * n);
            for (double &v : data)
                v = rng.normal();
            for (int d = 0; d < n; ++d) {
                double m = 0.0, s2 = 0.0;
                for (int i = 0; i < points; ++i)
                    m += data[i * n + d];
                m /= points;
                for (int i = 0; i < points; ++i)
                    s2 += (data[i * n + d] - m) * (data[i * n + d] - m);
                const double sd = std::sqrt(s2 / points);
                for (int i = 0; i < points; ++i)
                    data[i * n + d] =
                        sd > 0.0 ? (data[i * n + d] - m) / sd : 0.0;
            }

            const auto tpl = make_template(family, n, bw, depth,
                                           mix(seed, kStructure, n, t));
            if (t == 0)
                circuit0 = tpl->descriptor();
            const auto theta =
                draw_angles(mix(seed, kGeoTheta, t, n), tpl->param_count());
            const KernelSpec fid_spec(KernelKind::Fidelity, tpl, theta);
            const KernelSpec ald_spec(KernelKind::AldqfkNormalized, tpl, theta);
            const Eigen::MatrixXd fid = analysis::to_eigen(
                kern::gram_matrix(fid_spec, data, points, threads));
            const Eigen::MatrixXd ald = analysis::to_eigen(
                kern::gram_matrix(ald_spec, data, points, threads));
            const Eigen::MatrixXd eye =
                Eigen::MatrixXd::Identity(points, points);

            results[t][0] = analysis::geometric_difference(fid, ald, floor_rel);
            results[t][1] = analysis::geometric_difference(eye, fid, floor_rel);
            results[t][2] = analysis::geometric_difference(eye, ald, floor_rel);
        }
        for (int c = 0; c < 3; ++c) {
            std::vector<double> g, gn;
            int discarded = 0;
            for (int t = 0; t < trials; ++t) {
                g.push_back(results[t][c].g);
                gn.push_back(results[t][c].g_normalized);
                discarded += results[t][c].discarded;
            }
            json row;
            row["row"] = std::string("geodiff/") + comparisons[c] +
                         "/n=" + std::to_string(n);
            row["comparison"] = comparisons[c];
            row["n"] = n;
            row["points"] = points;
            row["g_mean"] = mean_of(g);
            row["g_std"] = std_of(g);
            row["g_norm_mean"] = mean_of(gn);
            row["g_norm_std"] = std_of(gn);
            row["discarded_total"] = discarded;
            row["circuit0"] = circuit0;
            report.rows.push_back(std::move(row));
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

// ---------------------------------------------------------------------------

namespace {

haar::Matrix embed_on_first_qubit(const Eigen::Matrix2cd &p, int d) {
    // P (x) I on the most significant position of a d-dimensional space:
    // index = q * (d/2) + rest with q the first-qubit bit.
    haar::Matrix m = haar::Matrix::Zero(d, d);
    const int half = d / 2;
    for (int qa = 0; qa < 2; ++qa)
        for (int qb = 0; qb < 2; ++qb)
            for (int r = 0; r < half; ++r)
                m(qa * half + r, qb * half + r) = p(qa, qb);
    return m;
}

haar::Matrix random_matrix(int d, Rng &rng, bool hermitian) {
    haar::Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            m(i, j) = std::complex<double>(rng.normal(), rng.normal());
    if (hermitian)
        m = ((m + m.adjoint()) / 2.0).eval();
    return m;
}

haar::Matrix random_pure_projector(int d, Rng &rng) {
    Eigen::VectorXcd v(d);
    for (int i = 0; i < d; ++i)
        v(i) = std::complex<double>(rng.normal(), rng.normal());
    v.normalize();
    return v * v.adjoint();
}

} // namespace

ExperimentReport run_moments(const ExperimentConfig &config) {
    const auto t0 = std::chrono::steady_clock::now();
    const json &cfg = config.normalized;
    const auto seed = config.seed();
    const long samples = cfg.at("mc_samples").get<long>();
    const long closure_samples = cfg.at("closure_samples").get<long>();
    const int batches = cfg.at("batches").get<int>();

    ExperimentReport report;
    report.config_echo = cfg;

    Eigen::Matrix2cd sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << std::complex<double>(0, 0), std::complex<double>(0, -1),
        std::complex<double>(0, 1), std::complex<double>(0, 0);
    sz << 1, 0, 0, -1;

    const std::uint64_t battery_seed = mix(seed, kMoments, 0);
    int tuple_id = 0;
    auto add_moment_rows = [&](int d, const haar::Matrix &A,
                               const haar::Matrix &B, const haar::Matrix &C,
                               const haar::Matrix &D,
                               const std::string &label) {
        struct Entry {
            const char *moment;
            haar::MomentResult res;
        };
        const std::uint64_t s0 = mix(battery_seed, tuple_id, d);
        std::vector<Entry> entries;
        entries.push_back(
            {"first_moment", haar::mc_first_moment(A, B, samples, mix(s0, 1))});
        entries.push_back({"cyclic_second_moment", haar::mc_second_moment_cyclic(
                                         A, B, C, D, samples, mix(s0, 2))});
        entries.push_back({"product_second_moment", haar::mc_second_moment_product(
                                         A, B, C, D, samples, mix(s0, 3))});
        // The embedded moment acts on a 2*d space with W on the trailing
        // d-dimensional factor.
        Rng lrng(mix(s0, 4));
        const haar::Matrix FA = random_matrix(2 * d, lrng, true);
        const haar::Matrix FB = random_matrix(2 * d, lrng, true);
        entries.push_back({"embedded_first_moment", haar::mc_embedded_first_moment(
                                         FA, FB, d, samples, mix(s0, 5))});
        for (const Entry &e : entries) {
            json row;
            row["row"] = std::string("moments/") + e.moment + "/d=" +
                         std::to_string(d) + "/" + label;
            row["moment"] = e.moment;
            row["d"] = d;
            row["tuple"] = label;
            row["analytic_re"] = e.res.analytic.real();
            row["analytic_im"] = e.res.analytic.imag();
            row["mc_re"] = e.res.mc_estimate.real();
            row["mc_im"] = e.res.mc_estimate.imag();
            row["mc_stderr"] = e.res.mc_stderr;
            row["samples"] = e.res.sample_count;
            row["z"] = e.res.z_score();
            report.rows.push_back(std::move(row));
        }
        ++tuple_id;
    };

    for (const auto &dv : cfg.at("dims")) {
        const int d = dv.get<int>();
        if (d < 2 || d > 16 || (d & (d - 1)) != 0)
            throw ConfigError("moments: dims must be powers of two in [2, 16]");
        const haar::Matrix I = haar::Matrix::Identity(d, d);
        const haar::Matrix Z =
            d == 2 ? haar::Matrix(sz) : embed_on_first_qubit(sz, d);
        const haar::Matrix X =
            d == 2 ? haar::Matrix(sx) : embed_on_first_qubit(sx, d);
        const haar::Matrix Y =
            d == 2 ? haar::Matrix(sy) : embed_on_first_qubit(sy, d);
        Rng rng(mix(battery_seed, 77, d));
        const haar::Matrix P1 = random_pure_projector(d, rng);
        const haar::Matrix P2 = random_pure_projector(d, rng);

        tuple_id = 0;
        add_moment_rows(d, I, I, I, I, "identity");
        add_moment_rows(d, Z, Z, Z, Z, "pauli_z");
        add_moment_rows(d, X, Y, Z, X, "pauli_mixed");
        add_moment_rows(d, P1, P2, P1, P2, "pure_projectors");
        for (int t = 0; t < 4; ++t)
            add_moment_rows(d, random_matrix(d, rng, true),
                            random_matrix(d, rng, true),
                            random_matrix(d, rng, true),
                            random_matrix(d, rng, true),
                            "hermitian_" + std::to_string(t));
        for (int t = 0; t < 4; ++t)
            add_moment_rows(d, random_matrix(d, rng, false),
                            random_matrix(d, rng, false),
                            random_matrix(d, rng, false),
                            random_matrix(d, rng, false),
                            "generic_" + std::to_string(t));
    }

    // Hand-derived identity: the cyclic second moment of four sigma_z at
    // d=2 equals -2/3.
    {
        const haar::Matrix Z2 = sz;
        const auto analytic = haar::second_moment_cyclic(Z2, Z2, Z2, Z2, 2);
        json row;
        row["row"] = "moments_identity/cyclic_zzzz_d2";
        row["analytic_re"] = analytic.real();
        row["expected_re"] = -2.0 / 3.0;
        row["abs_error"] = std::abs(analytic - std::complex<double>(-2.0 / 3.0));
        report.rows.push_back(std::move(row));
    }

    // Closure rows: the closed-form scaling formulas against Monte-Carlo.
    const std::uint64_t closure_seed = mix(seed, kMoments, 1);
    for (const auto &nv : cfg.at("closure_n_fidelity")) {
        const int n = nv.get<int>();
        const auto st = haar::mc_fidelity_global(n, closure_samples,
                                                 mix(closure_seed, 10, n),
                                                 batches);
        const auto f =
            haar::analytic_fidelity_stats(n, haar::CircuitCase::GlobalRandom);
        json row;
        row["row"] = "moments_closure/fidelity_global/n=" + std::to_string(n);
        row["n"] = n;
        row["mean"] = st.mean;
        row["mean_stderr"] = st.mean_stderr;
        row["variance"] = st.variance;
        row["variance_stderr"] = st.variance_stderr;
        row["analytic_mean"] = f.mean;
        row["analytic_variance"] = f.variance_value;
        row["z_mean"] = std::abs(st.mean - f.mean) /
                        std::max(st.mean_stderr, 1e-300);
        row["z_variance"] = std::abs(st.variance - f.variance_value) /
                            std::max(st.variance_stderr, 1e-300);
        report.rows.push_back(std::move(row));
    }
    for (const auto &nv : cfg.at("closure_n_aldqfk")) {
        const int n = nv.get<int>();
        const auto st = haar::mc_aldqfk_term_global(n, closure_samples,
                                                    mix(closure_seed, 20, n),
                                                    batches);
        const auto f =
            haar::analytic_aldqfk_stats(n, haar::CircuitCase::GlobalRandom);
        json row;
        row["row"] = "moments_closure/aldqfk_global/n=" + std::to_string(n);
        row["n"] = n;
        row["mean"] = st.mean;
        row["mean_stderr"] = st.mean_stderr;
        row["variance"] = st.variance;
        row["variance_stderr"] = st.variance_stderr;
        row["analytic_mean"] = 0.0;
        row["analytic_variance"] = f.variance_value;
        row["z_mean"] = std::abs(st.mean) / std::max(st.mean_stderr, 1e-300);
        row["z_variance"] = std::abs(st.variance - f.variance_value) /
                            std::max(st.variance_stderr, 1e-300);
        report.rows.push_back(std::move(row));
    }
    for (const auto &nv : cfg.at("closure_n_ala")) {
        const int n = nv.get<int>();
        const auto st = haar::mc_aldqfk_term_ala(n, 2, closure_samples,
                                                 mix(closure_seed, 30, n),
                                                 batches);
        const auto f = haar::analytic_aldqfk_stats(n, haar::CircuitCase::Ala,
                                                   2, 1);
        json row;
        row["row"] = "moments_closure/aldqfk_ala/n=" + std::to_string(n);
        row["n"] = n;
        row["variance"] = st.variance;
        row["variance_stderr"] = st.variance_stderr;
        row["lower_bound"] = f.variance_value;
        row["bound_satisfied"] =
            st.variance >= f.variance_value - 3.0 * st.variance_stderr;
        report.rows.push_back(std::move(row));
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

// ---------------------------------------------------------------------------

ExperimentReport run(const ExperimentConfig &config) {
    const int ceiling = config.normalized.value("max_qubits", 0);
    if (ceiling > 0)
        sv::set_max_qubits(ceiling);

    ExperimentReport rep;
    if (config.subcommand == "variance")
        rep = run_variance(config);
    else if (config.subcommand == "fourier")
        rep = run_fourier(config);
    else if (config.subcommand == "classify")
        rep = run_classify(config);
    else if (config.subcommand == "geodiff")
        rep = run_geodiff(config);
    else if (config.subcommand == "moments")
        rep = run_moments(config);
    else
        throw ConfigError("unknown subcommand: " + config.subcommand);

    // Provenance stamp: every row names the master seed; derived seeds are
    // materialized in the normalized config written next to the rows.
    for (json &row : rep.rows)
        row["seed"] = config.seed();
    return rep;
}

std::string ExperimentReport::rows_as_csv() const {
    std::vector<std::string> columns;
    std::set<std::string> seen;
    for (const json &row : rows)
        for (auto it = row.begin(); it != row.end(); ++it)
            if (seen.insert(it.key()).second)
                columns.push_back(it.key());
    std::ostringstream out;
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 == columns.size() ? '\n' : ',');
    std::vector<const json *> sorted;
    for (const json &row : rows)
        sorted.push_back(&row);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const json *a, const json *b) {
                         return a->value("row", "") < b->value("row", "");
                     });
    for (const json *row : sorted) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (row->contains(columns[c])) {
                const json &v = (*row)[columns[c]];
                if (v.is_string())
                    out << v.get<std::string>();
                else
                    out << v.dump();
            }
            out << (c + 1 == columns.size() ? '\n' : ',');
        }
    }
    return out.str();
}

void write_report(const ExperimentReport &report,
                  const ExperimentConfig &config) {
    namespace fs = std::filesystem;
    const fs::path dir(config.out_dir());
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "config.normalized.json");
        out << report.config_echo.dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "results.csv");
        out << report.rows_as_csv();
    }
    {
        json j;
        j["config"] = report.config_echo;
        j["rows"] = report.rows;
        j["comparators"] = report.comparators;
        j["wall_seconds"] = report.wall_seconds;
        std::ofstream out(dir / "report.json");
        out << j.dump(2) << "\n";
    }
    if (!config.plots())
        return;

    if (config.subcommand == "variance") {
        std::map<std::string, PlotSeries> series;
        for (const json &row : report.rows) {
            if (!row.contains("variance"))
                continue;
            const std::string key = row["kernel"].get<std::string>() + "/" +
                                    row["family"].get<std::string>();
            series[key].name = key;
            series[key].points.emplace_back(
                row["n"].get<double>(),
                std::log2(std::max(row["variance"].get<double>(), 1e-300)));
            const double cmp = row["analytic_comparator"].get<double>();
            if (cmp > 0.0) {
                series[key + " (analytic)"].name = key + " (analytic)";
                series[key + " (analytic)"].points.emplace_back(
                    row["n"].get<double>(), std::log2(cmp));
            }
        }
        std::vector<PlotSeries> list;
        for (auto &[k, s] : series) {
            std::sort(s.points.begin(), s.points.end());
            list.push_back(std::move(s));
        }
        svg_line_plot((dir / "plot_variance.svg").string(),
                      "off-diagonal kernel variance", "qubits n",
                      "log2 variance", list);
    } else if (config.subcommand == "classify") {
        std::map<std::string, PlotSeries> series;
        for (const json &row : report.rows) {
            if (!row.contains("misclass_mean"))
                continue;
            const std::string key = row["kernel"].get<std::string>() + "/L=" +
                                    std::to_string(row["L"].get<int>());
            series[key].name = key;
            series[key].points.emplace_back(row["w"].get<double>(),
                                            row["misclass_mean"].get<double>());
        }
        std::vector<PlotSeries> list;
        for (auto &[k, s] : series) {
            std::sort(s.points.begin(), s.points.end());
            list.push_back(std::move(s));
        }
        svg_line_plot((dir / "plot_classify.svg").string(),
                      "misclassification vs dataset frequency", "w",
                      "misclassification rate", list);
    } else if (config.subcommand == "geodiff") {
        std::map<std::string, PlotSeries> series;
        for (const json &row : report.rows) {
            if (!row.contains("g_norm_mean"))
                continue;
            const std::string key = row["comparison"].get<std::string>();
            series[key].name = key;
            series[key].points.emplace_back(row["n"].get<double>(),
                                            row["g_norm_mean"].get<double>());
        }
        std::vector<PlotSeries> list;
        for (auto &[k, s] : series) {
            std::sort(s.points.begin(), s.points.end());
            list.push_back(std::move(s));
        }
        svg_line_plot((dir / "plot_geodiff.svg").string(),
                      "normalized geometric difference", "qubits n",
                      "g / sqrt(N)", list);
    }
}

} // namespace qfk::exp
