#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "figar/config.hpp"
#include "figar/runner.hpp"

namespace figar {
namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fresh_dir(const std::string& name) {
    auto dir = std::filesystem::path(::testing::TempDir()) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

ExperimentConfig tiny_a3c_config() {
    ExperimentConfig c;
    c.algorithm = "figar-a3c";
    c.env_name = "corridor";
    c.env_length = 4;
    c.max_steps = 60;
    c.variant = "figar-3";
    c.master_seed = 11;
    c.eval_episodes = 5;
    c.hidden = {8};
    c.a3c.total_decision_steps = 2000;
    c.a3c.log_every = 500;
    c.a3c.gamma = c.gamma;
    return c;
}

// ------------------------------------------------------------------- parsing

TEST(KeyValue, ParsesSectionsCommentsAndWhitespace) {
    auto kv = KeyValueConfig::parse_text(
        "# leading comment\n"
        "[experiment]\n"
        "  algorithm =  figar-trpo  \n"
        "; another comment\n"
        "gamma = 0.95\n"
        "\n"
        "[trpo]\n"
        "cg_iters = 7\n");
    EXPECT_EQ(kv.get("experiment", "algorithm"), "figar-trpo");
    EXPECT_EQ(kv.get("experiment", "gamma"), "0.95");
    EXPECT_EQ(kv.get("trpo", "cg_iters"), "7");
    EXPECT_FALSE(kv.has("trpo", "delta"));
}

TEST(KeyValue, RejectsMalformedLines) {
    EXPECT_THROW(KeyValueConfig::parse_text("[experiment\n"), std::invalid_argument);
    EXPECT_THROW(KeyValueConfig::parse_text("just some words\n"), std::invalid_argument);
    EXPECT_THROW(KeyValueConfig::parse_text("= value\n"), std::invalid_argument);
    EXPECT_THROW(KeyValueConfig::parse_text("[a]\nk = 1\nk = 2\n"), std::invalid_argument);
}

TEST(ExperimentParsing, EmptyTextYieldsDefaults) {
    ExperimentConfig c = experiment_from_config(KeyValueConfig::parse_text(""));
    EXPECT_EQ(c.algorithm, "figar-a3c");
    EXPECT_EQ(c.env_name, "corridor");
    EXPECT_EQ(c.eval_episodes, 100);
    EXPECT_DOUBLE_EQ(c.gamma, 0.99);
    EXPECT_EQ(c.repetition_set().values.size(), 10u);
}

TEST(ExperimentParsing, RejectsUnknownKeysSectionsAndValues) {
    EXPECT_THROW(experiment_from_config(KeyValueConfig::parse_text("[experiment]\ntypo_key = 1\n")),
                 std::invalid_argument);
    EXPECT_THROW(experiment_from_config(KeyValueConfig::parse_text("[mystery]\nk = 1\n")),
                 std::invalid_argument);
    EXPECT_THROW(
        experiment_from_config(KeyValueConfig::parse_text("[experiment]\nalgorithm = dqn\n")),
        std::invalid_argument);
    EXPECT_THROW(experiment_from_config(KeyValueConfig::parse_text("[experiment]\nenv = doom\n")),
                 std::invalid_argument);
    EXPECT_THROW(experiment_from_config(KeyValueConfig::parse_text("[experiment]\ngamma = fast\n")),
                 std::invalid_argument);
    EXPECT_THROW(
        experiment_from_config(KeyValueConfig::parse_text("[experiment]\nrepetition_set = wat\n")),
        std::invalid_argument);
}

TEST(ExperimentParsing, ErrorNamesTheField) {
    try {
        experiment_from_config(KeyValueConfig::parse_text("[a3c]\nentropy_beta = soup\n"));
        FAIL() << "expected an exception";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("a3c.entropy_beta"), std::string::npos);
    }
}

TEST(ExperimentParsing, GammaPropagatesToTrainers) {
    ExperimentConfig c =
        experiment_from_config(KeyValueConfig::parse_text("[experiment]\ngamma = 0.9\n"));
    EXPECT_DOUBLE_EQ(c.a3c.gamma, 0.9);
    EXPECT_DOUBLE_EQ(c.trpo.gamma, 0.9);
    EXPECT_DOUBLE_EQ(c.ddpg.gamma, 0.9);
}

TEST(ExperimentParsing, BaselineForcesSingletonRepetitionSet) {
    ExperimentConfig c = experiment_from_config(KeyValueConfig::parse_text(
        "[experiment]\nalgorithm = baseline-a3c\nrepetition_set = figar-20\n"));
    RepetitionSet w = c.repetition_set();
    ASSERT_EQ(w.values.size(), 1u);
    EXPECT_EQ(w.values[0], 1);
}

TEST(ExperimentParsing, SerializationRoundTripsByteForByte) {
    ExperimentConfig c = tiny_a3c_config();
    c.trpo.beta_kl = 0.16;
    c.ddpg.eps_steps = 12345;
    std::string text = serialize_experiment_config(c);
    ExperimentConfig back = experiment_from_config(KeyValueConfig::parse_text(text));
    EXPECT_EQ(serialize_experiment_config(back), text);
}

TEST(ExperimentParsing, ManifestSectionIsSkipped) {
    ExperimentConfig c = experiment_from_config(KeyValueConfig::parse_text(
        "[experiment]\nenv = chainswitch\n[manifest]\nwallclock_seconds = 9.5\nrun_dir = x\n"));
    EXPECT_EQ(c.env_name, "chainswitch");
}

TEST(ExperimentParsing, EnvironmentSeedOverrideWins) {
    ASSERT_EQ(setenv("FIGAR_SEED", "4242", 1), 0);
    ExperimentConfig c =
        experiment_from_config(KeyValueConfig::parse_text("[experiment]\nmaster_seed = 7\n"));
    unsetenv("FIGAR_SEED");
    EXPECT_EQ(c.master_seed, 4242u);
}

// -------------------------------------------------------------------- running

TEST(Runner, WritesAllArtifactsAndLoadableManifest) {
    std::string root = fresh_dir("runner_artifacts");
    ExperimentConfig c = tiny_a3c_config();
    RunOutcome r = run_experiment(c, root, "ts0");
    for (const std::string& f : {r.paths.manifest, r.paths.training_log, r.paths.eval_csv,
                                 r.paths.histogram_csv, r.paths.params_file}) {
        EXPECT_TRUE(std::filesystem::exists(f)) << f;
    }
    EXPECT_NE(r.paths.dir.find("figar-a3c_corridor_figar-3_11_ts0"), std::string::npos);
    ExperimentConfig back = load_experiment_config(r.paths.manifest);
    EXPECT_EQ(serialize_experiment_config(back), serialize_experiment_config(c));
    std::string log = slurp(r.paths.training_log);
    EXPECT_EQ(log.substr(0, 13), "decision_step");
    EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1 + 4);  // header + 2000/500 rows
    std::string ev = slurp(r.paths.eval_csv);
    EXPECT_EQ(std::count(ev.begin(), ev.end(), '\n'), 1 + c.eval_episodes);
}

TEST(Runner, BaselineManifestRecordsSingleton) {
    std::string root = fresh_dir("runner_baseline");
    ExperimentConfig c = tiny_a3c_config();
    c.algorithm = "baseline-a3c";
    RunOutcome r = run_experiment(c, root, "ts0");
    ASSERT_EQ(r.repetition_values.size(), 1u);
    EXPECT_EQ(r.repetition_values[0], 1);
    KeyValueConfig mf = KeyValueConfig::load(r.paths.manifest);
    EXPECT_EQ(mf.get("manifest", "repetition_values"), "1");
    EXPECT_NE(r.paths.dir.find("baseline-a3c_corridor_w1_"), std::string::npos);
}

TEST(Runner, RepeatedRunsAreBitwiseIdentical) {
    std::string root = fresh_dir("runner_repro");
    ExperimentConfig c = tiny_a3c_config();
    RunOutcome a = run_experiment(c, root, "t1");
    RunOutcome b = run_experiment(c, root, "t2");
    EXPECT_EQ(slurp(a.paths.training_log), slurp(b.paths.training_log));
    EXPECT_EQ(slurp(a.paths.eval_csv), slurp(b.paths.eval_csv));
    EXPECT_EQ(slurp(a.paths.params_file), slurp(b.paths.params_file));
    // re-running straight from the manifest reproduces the log too
    ExperimentConfig from_manifest = load_experiment_config(a.paths.manifest);
    RunOutcome m = run_experiment(from_manifest, root, "t3");
    EXPECT_EQ(slurp(a.paths.training_log), slurp(m.paths.training_log));
}

TEST(Runner, TrpoAndDdpgFamiliesProduceTheirLogs) {
    std::string root = fresh_dir("runner_families");
    ExperimentConfig t = tiny_a3c_config();
    t.algorithm = "figar-trpo";
    t.env_length = 3;
    t.max_steps = 40;
    t.trpo.improvement_steps = 3;
    t.trpo.k_min = 2;
    t.trpo.k_max = 4;
    RunOutcome tr = run_experiment(t, root, "ts0");
    EXPECT_EQ(slurp(tr.paths.training_log).substr(0, 5), "step,");

    ExperimentConfig d = tiny_a3c_config();
    d.algorithm = "figar-ddpg";
    d.env_name = "pointmass";
    d.variant = "figar-3";
    d.max_steps = 50;
    d.eval_episodes = 2;
    d.ddpg.total_train_steps = 300;
    d.ddpg.batch_size = 16;
    d.ddpg.replay_capacity = 128;
    d.ddpg.hidden = {8, 8};
    d.ddpg.log_every = 100;
    RunOutcome dr = run_experiment(d, root, "ts0");
    std::string dl = slurp(dr.paths.training_log);
    EXPECT_NE(dl.find("epsilon,critic_loss"), std::string::npos);
    EXPECT_EQ(std::count(dl.begin(), dl.end(), '\n'), 1 + 3);
}

TEST(Runner, FamilyEnvMismatchIsRejected) {
    std::string root = fresh_dir("runner_mismatch");
    ExperimentConfig c = tiny_a3c_config();
    c.env_name = "pointmass";
    EXPECT_THROW(run_experiment(c, root, "ts0"), std::invalid_argument);
    ExperimentConfig d = tiny_a3c_config();
    d.algorithm = "figar-ddpg";
    EXPECT_THROW(run_experiment(d, root, "ts0"), std::invalid_argument);
}

TEST(Runner, CompareRunsChecksProtocolAndComputesImprovement) {
    std::string root = fresh_dir("runner_compare");
    ExperimentConfig c = tiny_a3c_config();
    RunOutcome a = run_experiment(c, root, "t1");
    RunOutcome b = run_experiment(c, root, "t2");
    ComparisonRow row = compare_runs(a.paths.dir, b.paths.dir, root + "/comparison.csv");
    EXPECT_DOUBLE_EQ(row.improvement_value, 0.0);  // identical runs
    EXPECT_TRUE(std::filesystem::exists(root + "/comparison.csv"));

    ExperimentConfig other = tiny_a3c_config();
    other.env_name = "chainswitch";
    RunOutcome o = run_experiment(other, root, "t1");
    EXPECT_THROW(compare_runs(a.paths.dir, o.paths.dir, root + "/bad.csv"), std::invalid_argument);
}

TEST(Runner, SweepRunsBaselineFirstAndSingletonVariantMatchesIt) {
    std::string root = fresh_dir("runner_sweep");
    ExperimentConfig c = tiny_a3c_config();
    c.a3c.total_decision_steps = 1200;
    c.a3c.log_every = 400;
    VariantSweepResult sweep = sweep_variants(c, {"singleton(1)", "figar-2"}, root, "ts0");
    ASSERT_EQ(sweep.rows.size(), 3u);
    EXPECT_EQ(sweep.rows[0].variant, "baseline");
    EXPECT_EQ(sweep.rows[1].variant, "singleton(1)");
    // the singleton variant reduces exactly to the baseline run
    EXPECT_EQ(sweep.rows[1].mean_return, sweep.rows[0].mean_return);
    EXPECT_DOUBLE_EQ(sweep.rows[1].improvement_vs_baseline, 0.0);
    EXPECT_TRUE(std::filesystem::exists(sweep.summary_csv));
    std::string text = slurp(sweep.summary_csv);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
    EXPECT_THROW(sweep_variants(c, {"bogus-set"}, root, "ts1"), std::invalid_argument);
}

TEST(Runner, OracleDumpWritesExactSolution) {
    std::string root = fresh_dir("runner_oracle");
    ExperimentConfig c = tiny_a3c_config();
    c.variant = "figar-4";
    std::string path = dump_oracle_csv(c, root + "/oracle.csv");
    std::string text = slurp(path);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + c.env_length + 1);
    EXPECT_EQ(text.substr(0, 6), "state,");
    // terminal state has value exactly 0
    EXPECT_NE(text.find("\n4,"), std::string::npos);
}

TEST(Runner, ParamsFileRoundTripsBitwise) {
    std::string root = fresh_dir("runner_params");
    std::vector<double> values{0.0, -1.5, 3.141592653589793, 1e-300, -2.2250738585072014e-308};
    detail::write_params_file(root + "/p.txt", values);
    auto back = detail::read_params_file(root + "/p.txt");
    ASSERT_EQ(back.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) EXPECT_EQ(back[i], values[i]);
}

}  // namespace
}  // namespace figar
