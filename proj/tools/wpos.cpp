// Copyright 2026 The wpos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wpos/config.hpp"
#include "wpos/harness.hpp"

namespace {

wpos::ExperimentConfig load_or_default(const std::string& config_path)
{
    if (config_path.empty()) {
        wpos::ExperimentConfig config;
        config.scene.sensors =
            wpos::default_sensor_positions(config.scene.d_x, config.scene.d_y, config.scene.d_z);
        config.validate();
        return config;
    }
    return wpos::load_config(config_path);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"UWB zone-positioning simulator: dataset generation, feature-size selection, "
                 "and classifier training"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "experiment config file (key = value lines)")
        ->expected(1);

    // generate
    auto* generate = app.add_subcommand("generate", "synthesize datasets for every scenario/SNR");
    std::string gen_out = "data";
    int gen_threads = 0;
    std::uint64_t gen_seed = 0;
    bool gen_csv = false;
    generate->add_option("--out", gen_out, "output directory");
    generate->add_option("--threads", gen_threads, "worker threads (default from config)");
    generate->add_option("--seed", gen_seed, "replace the scenario seed list with one seed");
    generate->add_flag("--export-csv", gen_csv, "also dump each raw dataset as CSV");

    // select-f
    auto* select = app.add_subcommand("select-f", "run feature-size selection on one dataset");
    std::string sel_data = "data", sel_out = "selection.csv";
    std::uint64_t sel_scenario = 0;
    double sel_snr = 1e9;
    select->add_option("--data", sel_data, "directory with generated datasets");
    select->add_option("--out", sel_out, "selection table CSV path");
    select->add_option("--scenario", sel_scenario, "scenario seed (default: first in config)");
    select->add_option("--snr", sel_snr, "SNR in dB (default: first in config)");

    // train
    auto* train = app.add_subcommand("train", "train and evaluate classifiers");
    std::string train_data = "data", train_out = "runs";
    std::vector<std::string> train_models;
    std::vector<int> train_f;
    int train_repeats = 0;
    bool train_deterministic = false;
    bool no_checkpoints = false;
    std::uint64_t train_seed = 0;
    train->add_option("--data", train_data, "directory with generated datasets");
    train->add_option("--out", train_out, "output directory for metrics and checkpoints");
    train->add_option("--model", train_models, "models to train (pnn, pdp-cnn, toa-rss)");
    train->add_option("--f", train_f, "feature counts for the two-branch classifier");
    train->add_option("--repeats", train_repeats, "training repeats per cell");
    train->add_option("--seed", train_seed, "override the training seed");
    train->add_flag("--deterministic", train_deterministic,
                    "zero wall-time columns for byte-stable outputs");
    train->add_flag("--no-checkpoints", no_checkpoints, "skip model checkpoint files");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a saved checkpoint");
    std::string eval_checkpoint, eval_data = "data", eval_split = "test";
    eval->add_option("--checkpoint", eval_checkpoint, "model checkpoint path")->required();
    eval->add_option("--data", eval_data, "directory with generated datasets");
    eval->add_option("--split", eval_split, "dataset split (train or test)");

    // table1
    auto* table = app.add_subcommand("table1", "print the built-in selection walkthrough");
    double table_eps = 0.5;
    table->add_option("--epsilon", table_eps, "criterion weight");

    // report
    auto* report = app.add_subcommand("report", "summarize a metrics CSV");
    std::string report_metrics = "runs/metrics.csv";
    report->add_option("--metrics", report_metrics, "metrics CSV produced by train");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            wpos::ExperimentConfig config = load_or_default(config_path);
            if (gen_threads > 0) config.threads = gen_threads;
            if (gen_seed != 0) config.scenario_seeds = {gen_seed};
            const auto result = wpos::harness::generate_datasets(config, gen_out, gen_csv);
            std::cout << "wrote " << result.files.size() << " dataset files under " << gen_out
                      << "\n";
            std::cout << "mean direct-path gain " << result.mean_los_gain << ", frame redraws "
                      << result.frame_redraws << "\n";
            std::cout << "manifest: " << result.manifest_path << "\n";
        } else if (select->parsed()) {
            const wpos::ExperimentConfig config = load_or_default(config_path);
            const std::uint64_t scenario =
                sel_scenario != 0 ? sel_scenario : config.scenario_seeds.front();
            const double snr = sel_snr < 1e8 ? sel_snr : config.snr_db_list.front();
            const auto report_out =
                wpos::harness::select_f(config, sel_data, scenario, snr, sel_out);
            std::cout << "selection table: " << report_out.csv_path << "\n";
            std::cout << "selected feature size: " << report_out.tables.f_star << " (weight "
                      << report_out.epsilon << ", grid [" << report_out.f_min << ", "
                      << report_out.f_max << "])\n";
            if (report_out.tables.clipped_lambdas > 0)
                std::cout << "warning: " << report_out.tables.clipped_lambdas
                          << " negative noncentrality estimates clipped to zero\n";
            if (report_out.tables.zero_distance_fixups > 0)
                std::cout << "warning: " << report_out.tables.zero_distance_fixups
                          << " zero neighbor distances perturbed\n";
        } else if (train->parsed()) {
            wpos::ExperimentConfig config = load_or_default(config_path);
            if (train_deterministic) config.deterministic = true;
            if (train_seed != 0) config.train_seed = train_seed;
            wpos::harness::TrainEvalOptions options;
            options.models = train_models.empty() ? config.models : train_models;
            options.f_values = train_f.empty() ? config.f_grid : train_f;
            options.repeats = train_repeats > 0 ? train_repeats : config.repeats;
            options.save_models = !no_checkpoints;
            const auto cells = wpos::harness::train_eval(config, train_data, train_out, options);
            std::cout << "trained " << cells.size() << " cells; outputs under " << train_out
                      << "\n";
            wpos::harness::print_report(train_out + "/metrics.csv", std::cout);
        } else if (eval->parsed()) {
            const wpos::ExperimentConfig config = load_or_default(config_path);
            const double rate =
                wpos::harness::evaluate_checkpoint(eval_checkpoint, eval_data, config, eval_split);
            std::cout << "zone classification rate: " << rate << "%\n";
        } else if (table->parsed()) {
            wpos::harness::print_reference_example(std::cout);
            if (table_eps != 0.5) {
                const auto result = wpos::harness::run_reference_example(table_eps);
                std::cout << "with weight " << table_eps
                          << ": selected feature size " << result.tables.f_star << "\n";
            }
        } else if (report->parsed()) {
            wpos::harness::print_report(report_metrics, std::cout);
        }
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}
