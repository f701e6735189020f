// Batch experiment runner: train/evaluate/report pipelines over seeded,
// reproducible configurations. See README.md for the config format.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "figar/config.hpp"
#include "figar/reporting.hpp"
#include "figar/runner.hpp"

namespace {

std::string output_root_or(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("FIGAR_OUTPUT_ROOT")) return env;
    return "runs";
}

void print_eval_summary(const figar::RunOutcome& r) {
    std::cout << "run dir:         " << r.paths.dir << "\n";
    std::cout << "mean return:     " << r.eval.mean_return << "\n";
    std::cout << "std return:      " << r.eval.std_return << "\n";
    std::cout << "mean repetition: " << r.eval.mean_repetition << "\n";
    std::cout << "goal rate:       " << r.eval.goal_rate << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"factored action-repetition RL experiment runner"};
    app.require_subcommand(1);

    std::string config_path, output_root, timestamp;

    auto* run_cmd = app.add_subcommand("run", "train, evaluate, and write run artifacts");
    run_cmd->add_option("config", config_path, "experiment config file")->required();
    run_cmd->add_option("--output-root", output_root,
                        "artifact root (default $FIGAR_OUTPUT_ROOT or ./runs)");
    run_cmd->add_option("--timestamp", timestamp, "fixed run-directory timestamp");

    std::string figar_dir, baseline_dir, out_csv = "comparison.csv";
    auto* compare_cmd = app.add_subcommand("compare", "percentage improvement between two runs");
    compare_cmd->add_option("figar_run_dir", figar_dir, "run directory of the factored policy")
        ->required();
    compare_cmd->add_option("baseline_run_dir", baseline_dir, "run directory of the baseline")
        ->required();
    compare_cmd->add_option("--out", out_csv, "output CSV path");

    std::vector<std::string> variants;
    auto* sweep_cmd = app.add_subcommand("sweep", "run repetition-set variants plus a baseline");
    sweep_cmd->add_option("config", config_path, "base experiment config file")->required();
    sweep_cmd->add_option("--variants", variants, "repetition-set names")->required();
    sweep_cmd->add_option("--output-root", output_root, "artifact root");
    sweep_cmd->add_option("--timestamp", timestamp, "fixed run-directory timestamp");

    std::string oracle_out = "oracle.csv";
    auto* oracle_cmd =
        app.add_subcommand("oracle", "dump the exact solution for a discrete environment");
    oracle_cmd->add_option("config", config_path, "experiment config file")->required();
    oracle_cmd->add_option("--out", oracle_out, "output CSV path");

    std::string run_dir;
    int episodes = 100;
    auto* report_cmd = app.add_subcommand(
        "report", "greedy/stochastic sweep and repetition ablation for a finished run");
    report_cmd->add_option("run_dir", run_dir, "finished run directory")->required();
    report_cmd->add_option("--episodes", episodes, "evaluation episodes per report point");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            figar::ExperimentConfig cfg = figar::load_experiment_config(config_path);
            figar::RunOutcome r =
                figar::run_experiment(cfg, output_root_or(output_root), timestamp);
            print_eval_summary(r);
        } else if (*compare_cmd) {
            figar::ComparisonRow row = figar::compare_runs(figar_dir, baseline_dir, out_csv);
            std::cout << "wrote " << out_csv << "\n";
            std::cout << "improvement: "
                      << (row.improvement_undefined ? std::string("undefined (zero baseline)")
                                                    : std::to_string(row.improvement_value))
                      << "\n";
        } else if (*sweep_cmd) {
            figar::ExperimentConfig cfg = figar::load_experiment_config(config_path);
            figar::VariantSweepResult sweep =
                figar::sweep_variants(cfg, variants, output_root_or(output_root), timestamp);
            std::cout << "wrote " << sweep.summary_csv << "\n";
            for (const auto& row : sweep.rows) {
                std::cout << row.variant << ": mean return " << row.mean_return
                          << ", mean repetition " << row.mean_repetition << "\n";
            }
        } else if (*oracle_cmd) {
            figar::ExperimentConfig cfg = figar::load_experiment_config(config_path);
            std::cout << "wrote " << figar::dump_oracle_csv(cfg, oracle_out) << "\n";
        } else if (*report_cmd) {
            // rebuild the policy from the run's manifest and saved parameters
            figar::ExperimentConfig cfg =
                figar::load_experiment_config(run_dir + "/manifest.txt");
            if (cfg.family() == "ddpg") {
                throw std::invalid_argument(
                    "report covers the factored stochastic policies (a3c/trpo runs)");
            }
            auto env = figar::detail::build_env(
                cfg, figar::derive_seed(cfg.master_seed, "report-env"));
            const auto& spec = env->spec();
            figar::RepetitionSet W = cfg.repetition_set();
            figar::FactoredPolicy policy =
                spec.action_space.kind == figar::ActionSpace::Kind::Discrete
                    ? figar::FactoredPolicy::discrete(spec.observation_dim, spec.action_space.n, W,
                                                      cfg.hidden, figar::Activation::Tanh,
                                                      cfg.shared_trunk)
                    : figar::FactoredPolicy::continuous(spec.observation_dim, spec.action_space, W,
                                                        cfg.hidden, figar::Activation::Tanh,
                                                        cfg.shared_trunk);
            std::vector<double> flat =
                figar::detail::read_params_file(run_dir + "/params.txt");
            flat.resize(policy.num_params());  // trainers append value/critic params after these
            policy.unflatten(flat);

            auto points = figar::greedy_stochastic_sweep(policy, *env, figar::default_sweep_grid(),
                                                         episodes,
                                                         figar::derive_seed(cfg.master_seed, "report"));
            figar::write_sweep_csv(run_dir + "/sweep.csv", points);
            figar::AblationResult ab = figar::ablate_repetition_head(
                policy, *env, episodes, figar::derive_seed(cfg.master_seed, "report"));
            figar::write_ablation_csv(run_dir + "/ablation.csv", ab);
            std::cout << "wrote " << run_dir << "/sweep.csv and " << run_dir << "/ablation.csv\n";
            std::cout << "full mean return:    " << ab.full.mean_return << "\n";
            std::cout << "ablated mean return: " << ab.ablated.mean_return << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
