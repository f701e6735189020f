#pragma once

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "figar/a3c.hpp"
#include "figar/config.hpp"
#include "figar/ddpg.hpp"
#include "figar/oracle.hpp"
#include "figar/reporting.hpp"
#include "figar/trpo.hpp"

namespace figar {

struct RunPaths {
    std::string dir;
    std::string manifest;
    std::string training_log;
    std::string eval_csv;
    std::string histogram_csv;
    std::string params_file;
};

struct RunOutcome {
    RunPaths paths;
    EvalStats eval;
    std::vector<int> repetition_values;
};

namespace detail {

inline std::string default_timestamp() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
#if defined(_WIN32)
    localtime_s(&tm, &t);
#else
    localtime_r(&t, &tm);
#endif
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

/// Exact double serialization: hexadecimal floating form round-trips bit
/// for bit through strtod.
inline void write_params_file(const std::string& path, const std::vector<double>& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    char buf[64];
    for (double v : params) {
        std::snprintf(buf, sizeof(buf), "%a\n", v);
        out << buf;
    }
}

inline std::vector<double> read_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open params file: " + path);
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(std::strtod(line.c_str(), nullptr));
    }
    return out;
}

inline std::unique_ptr<Env> build_env(const ExperimentConfig& c, std::uint64_t env_seed) {
    if (c.env_name == "corridor") {
        return std::make_unique<Corridor>(c.env_length, 0.0, env_seed, c.max_steps);
    }
    if (c.env_name == "chainswitch") {
        return std::make_unique<Corridor>(c.env_length, c.p_slip, env_seed, c.max_steps);
    }
    if (c.env_name == "pointmass") {
        return std::make_unique<PointMass>(env_seed, c.max_steps);
    }
    throw std::invalid_argument("unknown environment: " + c.env_name);
}

inline std::string csv(double v) { return fmt_double(v); }

}  // namespace detail

inline std::string run_dir_name(const ExperimentConfig& c, const std::string& timestamp) {
    std::string variant = c.is_baseline() ? "w1" : c.variant;
    return c.algorithm + "_" + c.env_name + "_" + variant + "_" + std::to_string(c.master_seed) +
           "_" + timestamp;
}

/// Trains per the config, evaluates 0.1-greedily, and writes every
/// artifact into <output_root>/<algorithm>_<env>_<variant>_<seed>_<timestamp>.
/// A fixed timestamp makes repeated runs land in distinct-but-predictable
/// directories for reproducibility checks.
inline RunOutcome run_experiment(const ExperimentConfig& c, const std::string& output_root,
                                 std::string timestamp = "") {
    if (timestamp.empty()) timestamp = detail::default_timestamp();
    RunOutcome out;
    RunPaths& p = out.paths;
    p.dir = (std::filesystem::path(output_root) / run_dir_name(c, timestamp)).string();
    std::filesystem::create_directories(p.dir);
    p.manifest = p.dir + "/manifest.txt";
    p.training_log = p.dir + "/training_log.csv";
    p.eval_csv = p.dir + "/eval.csv";
    p.histogram_csv = p.dir + "/histogram.csv";
    p.params_file = p.dir + "/params.txt";

    RepetitionSet W = c.repetition_set();
    out.repetition_values = W.values;
    std::string family = c.family();
    auto t0 = std::chrono::steady_clock::now();

    std::ofstream log(p.training_log, std::ios::binary);
    if (!log) throw std::runtime_error("cannot open for writing: " + p.training_log);

    std::unique_ptr<Env> eval_env = detail::build_env(c, derive_seed(c.master_seed, "eval-env"));
    const EnvSpec& spec = eval_env->spec();
    std::vector<double> flat_params;

    if (family == "a3c") {
        if (spec.action_space.kind != ActionSpace::Kind::Discrete) {
            throw std::invalid_argument("a3c runs discrete environments only");
        }
        auto policy = FactoredPolicy::discrete(spec.observation_dim, spec.action_space.n, W,
                                               c.hidden, Activation::Tanh, c.shared_trunk);
        policy.init(c.master_seed);
        Mlp value = make_value_net(spec.observation_dim, c.hidden, Activation::Tanh, c.master_seed);
        auto factory = [&c](int worker_id) {
            return detail::build_env(
                c, derive_seed(derive_seed(c.master_seed, "env"), static_cast<std::uint64_t>(worker_id)));
        };
        A3cConfig a3c = c.a3c;
        if (a3c.warmup_fraction > 0.0 && !W.contains(a3c.warmup_fixed_repetition)) {
            // sets without repetition 1 (e.g. primes) warm up on their smallest member
            a3c.warmup_fixed_repetition = W.values.front();
        }
        auto rows = train_figar_a3c(a3c, factory, policy, value, c.master_seed);
        log << "decision_step,mean_episode_return,mean_repetition,entropy_a,entropy_x\n";
        for (const auto& r : rows) {
            log << r.decision_step << ',' << detail::csv(r.mean_episode_return) << ','
                << detail::csv(r.mean_repetition) << ',' << detail::csv(r.entropy_a) << ','
                << detail::csv(r.entropy_x) << '\n';
        }
        out.eval = evaluate_policy(policy, *eval_env, c.eval_episodes, SamplingMode::eps_greedy(0.1),
                                   derive_seed(c.master_seed, "eval"), c.gamma);
        flat_params = policy.flatten();
        const auto& vp = value.params().values();
        flat_params.insert(flat_params.end(), vp.begin(), vp.end());
    } else if (family == "trpo") {
        FactoredPolicy policy =
            spec.action_space.kind == ActionSpace::Kind::Discrete
                ? FactoredPolicy::discrete(spec.observation_dim, spec.action_space.n, W, c.hidden,
                                           Activation::Tanh, c.shared_trunk)
                : FactoredPolicy::continuous(spec.observation_dim, spec.action_space, W, c.hidden,
                                             Activation::Tanh, c.shared_trunk);
        policy.init(c.master_seed);
        std::unique_ptr<Env> env = detail::build_env(c, derive_seed(c.master_seed, "env"));
        TrpoResult result = train_figar_trpo(c.trpo, *env, policy, c.master_seed);
        log << "step,mean_return,mean_repetition,batch_episodes,kl_after,surrogate_before,"
               "surrogate_after,accepted\n";
        for (const auto& r : result.log) {
            log << r.step << ',' << detail::csv(r.mean_return) << ','
                << detail::csv(r.mean_repetition) << ',' << r.batch_episodes << ','
                << detail::csv(r.kl_after) << ',' << detail::csv(r.surrogate_before) << ','
                << detail::csv(r.surrogate_after) << ',' << (r.accepted ? 1 : 0) << '\n';
        }
        policy.unflatten(result.best_params);  // evaluate the best snapshot
        out.eval = evaluate_policy(policy, *eval_env, c.eval_episodes, SamplingMode::eps_greedy(0.1),
                                   derive_seed(c.master_seed, "eval"), c.gamma);
        flat_params = policy.flatten();
    } else if (family == "ddpg") {
        if (spec.action_space.kind != ActionSpace::Kind::Continuous) {
            throw std::invalid_argument("ddpg runs continuous environments only");
        }
        DdpgActor actor(spec.observation_dim, spec.action_space, W, c.ddpg.hidden, Activation::Relu,
                        c.master_seed);
        int rep_dim = W.size() > 1 ? static_cast<int>(W.size()) : 0;
        CriticNet critic(spec.observation_dim, spec.action_space.dim, rep_dim, c.ddpg.hidden,
                         Activation::Relu);
        {
            Rng r(derive_seed(c.master_seed, "critic"));
            critic.init(r);
        }
        std::unique_ptr<Env> env = detail::build_env(c, derive_seed(c.master_seed, "env"));
        auto rows = train_figar_ddpg(c.ddpg, *env, actor, critic, c.master_seed);
        log << "decision_step,mean_episode_return,mean_repetition,epsilon,critic_loss\n";
        for (const auto& r : rows) {
            log << r.decision_step << ',' << detail::csv(r.mean_episode_return) << ','
                << detail::csv(r.mean_repetition) << ',' << detail::csv(r.epsilon) << ','
                << detail::csv(r.critic_loss) << '\n';
        }
        out.eval = ddpg_evaluate(actor, *eval_env, c.eval_episodes, c.gamma);
        flat_params = actor.action_net().params().values();
        if (actor.has_rep_net()) {
            const auto& rp = actor.rep_net().params().values();
            flat_params.insert(flat_params.end(), rp.begin(), rp.end());
        }
        const auto& cp = critic.params().values();
        flat_params.insert(flat_params.end(), cp.begin(), cp.end());
    } else {
        throw std::invalid_argument("unknown algorithm family: " + family);
    }
    log.close();

    double wallclock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // per-episode evaluation returns; the comparison tool re-reads these
    {
        std::ofstream ev(p.eval_csv, std::ios::binary);
        if (!ev) throw std::runtime_error("cannot open for writing: " + p.eval_csv);
        ev << "episode,return\n";
        for (std::size_t i = 0; i < out.eval.episode_returns.size(); ++i) {
            ev << i << ',' << detail::csv(out.eval.episode_returns[i]) << '\n';
        }
    }
    write_histogram_csv(p.histogram_csv, out.eval.histogram, std::max(30, W.values.back()));
    detail::write_params_file(p.params_file, flat_params);

    // the manifest is itself a loadable config (the [manifest] section is
    // output-only and skipped by the loader)
    {
        std::ofstream mf(p.manifest, std::ios::binary);
        if (!mf) throw std::runtime_error("cannot open for writing: " + p.manifest);
        mf << serialize_experiment_config(c);
        mf << "\n[manifest]\n";
        mf << "format_version = 1\n";
        mf << "run_dir = " << run_dir_name(c, timestamp) << "\n";
        mf << "artifacts = manifest.txt,training_log.csv,eval.csv,histogram.csv,params.txt\n";
        mf << "wallclock_seconds = " << detail::fmt_double(wallclock) << "\n";
        mf << "repetition_values = " << detail::join_ints(W.values) << "\n";
        mf << "mean_return = " << detail::fmt_double(out.eval.mean_return) << "\n";
        mf << "std_return = " << detail::fmt_double(out.eval.std_return) << "\n";
        mf << "mean_discounted_return = " << detail::fmt_double(out.eval.mean_disc_return) << "\n";
        mf << "mean_repetition = " << detail::fmt_double(out.eval.mean_repetition) << "\n";
        mf << "goal_rate = " << detail::fmt_double(out.eval.goal_rate) << "\n";
    }
    return out;
}

namespace detail {

inline std::vector<double> read_eval_returns(const std::string& run_dir) {
    std::ifstream in(run_dir + "/eval.csv");
    if (!in) throw std::runtime_error("cannot open eval results in " + run_dir);
    std::vector<double> out;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        out.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
    }
    if (out.empty()) throw std::runtime_error("no evaluation episodes recorded in " + run_dir);
    return out;
}

}  // namespace detail

/// Percentage-improvement comparison between two finished runs on the
/// same environment and evaluation protocol; writes comparison.csv next to
/// the given output path and returns the row.
inline ComparisonRow compare_runs(const std::string& run_dir_figar,
                                  const std::string& run_dir_baseline,
                                  const std::string& out_csv) {
    KeyValueConfig mf = KeyValueConfig::load(run_dir_figar + "/manifest.txt");
    KeyValueConfig mb = KeyValueConfig::load(run_dir_baseline + "/manifest.txt");
    auto field = [](const KeyValueConfig& kv, const std::string& key) {
        return kv.has("experiment", key) ? kv.get("experiment", key) : std::string();
    };
    if (field(mf, "env") != field(mb, "env")) {
        throw std::invalid_argument("compare_runs: runs use different environments");
    }
    if (field(mf, "eval_episodes") != field(mb, "eval_episodes")) {
        throw std::invalid_argument("compare_runs: runs use different evaluation protocols");
    }
    ComparisonRow row = compare_scores(field(mf, "env"), detail::read_eval_returns(run_dir_figar),
                                       detail::read_eval_returns(run_dir_baseline));
    write_comparison_csv(out_csv, {row});
    return row;
}

struct SweepSummaryRow {
    std::string variant;
    std::string run_dir;
    double mean_return = 0.0;
    double mean_repetition = 0.0;
    double improvement_vs_baseline = 0.0;
    bool improvement_undefined = false;
};

struct VariantSweepResult {
    std::vector<SweepSummaryRow> rows;  // baseline first, then the variants
    std::string summary_csv;
};

/// Runs the matching baseline once, then every named variant with the same
/// hyperparameters; writes a summary table shaped like the variant
/// comparison in the source experiments.
inline VariantSweepResult sweep_variants(const ExperimentConfig& base,
                                         const std::vector<std::string>& variants,
                                         const std::string& output_root,
                                         std::string timestamp = "") {
    if (timestamp.empty()) timestamp = detail::default_timestamp();
    for (const auto& v : variants) (void)make_repetition_set(v, base.master_seed);  // validate all first

    VariantSweepResult result;
    ExperimentConfig baseline = base;
    baseline.algorithm = "baseline-" + base.family();
    RunOutcome base_run = run_experiment(baseline, output_root, timestamp);
    result.rows.push_back({"baseline", base_run.paths.dir, base_run.eval.mean_return,
                           base_run.eval.mean_repetition, 0.0, false});

    for (const auto& v : variants) {
        ExperimentConfig vc = base;
        vc.algorithm = "figar-" + base.family();
        vc.variant = v;
        RunOutcome r = run_experiment(vc, output_root, timestamp);
        Improvement imp = improvement(r.eval.mean_return, base_run.eval.mean_return);
        result.rows.push_back(
            {v, r.paths.dir, r.eval.mean_return, r.eval.mean_repetition, imp.value, imp.undefined});
    }

    result.summary_csv = (std::filesystem::path(output_root) /
                          ("sweep_" + base.env_name + "_" + std::to_string(base.master_seed) + "_" +
                           timestamp + ".csv"))
                             .string();
    std::ofstream out(result.summary_csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + result.summary_csv);
    out << "variant,run_dir,mean_return,mean_repetition,improvement_vs_baseline,"
           "improvement_undefined\n";
    for (const auto& r : result.rows) {
        out << r.variant << ',' << r.run_dir << ',' << detail::fmt_double(r.mean_return) << ','
            << detail::fmt_double(r.mean_repetition) << ','
            << detail::fmt_double(r.improvement_vs_baseline) << ','
            << (r.improvement_undefined ? 1 : 0) << '\n';
    }
    return result;
}

/// Dumps an exact tabular solution (state, best action, best repetition,
/// optimal value) for a discrete environment config.
inline std::string dump_oracle_csv(const ExperimentConfig& c, const std::string& out_csv) {
    std::unique_ptr<Env> env = detail::build_env(c, derive_seed(c.master_seed, "oracle-env"));
    auto* model = dynamic_cast<DiscreteEnvModel*>(env.get());
    if (!model) throw std::invalid_argument("oracle dump needs a discrete environment");
    TabularSmdp smdp = expand_smdp(*model, c.repetition_set(), c.gamma);
    OracleSolution sol = smdp_value_iteration(smdp, 1e-10);
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_csv);
    out << "state,best_action,best_repetition,value\n";
    for (std::size_t s = 0; s < sol.v.size(); ++s) {
        out << s << ',' << sol.best_action[s] << ',' << sol.best_repetition[s] << ','
            << detail::fmt_double(sol.v[s]) << '\n';
    }
    return out_csv;
}

}  // namespace figar
