#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "figar/env.hpp"
#include "figar/oracle.hpp"
#include "figar/policy.hpp"

namespace figar {

/// Relative improvement i = (f - b) / b. A zero baseline is reported as
/// signed infinity with the `undefined` flag set.
struct Improvement {
    double value = 0.0;
    bool undefined = false;
};

inline Improvement improvement(double f, double b) {
    Improvement out;
    if (b == 0.0) {
        out.undefined = true;
        out.value = f >= 0.0 ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
        return out;
    }
    out.value = (f - b) / b;
    return out;
}

/// 0.95 normal-approximation interval over per-episode scores:
/// mean +/- 1.96 * std / sqrt(n).
struct ConfidenceInterval {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

inline ConfidenceInterval confidence_interval(const std::vector<double>& scores) {
    if (scores.empty()) throw std::invalid_argument("confidence_interval: no scores");
    ConfidenceInterval ci;
    double sum = 0.0;
    for (double s : scores) sum += s;
    ci.mean = sum / static_cast<double>(scores.size());
    double ss = 0.0;
    for (double s : scores) ss += (s - ci.mean) * (s - ci.mean);
    double sd = std::sqrt(ss / static_cast<double>(scores.size()));
    double half = 1.96 * sd / std::sqrt(static_cast<double>(scores.size()));
    ci.lo = ci.mean - half;
    ci.hi = ci.mean + half;
    return ci;
}

struct ComparisonRow {
    std::string task;
    double figar_score = 0.0;
    double baseline_score = 0.0;
    double improvement_value = 0.0;
    bool improvement_undefined = false;
    ConfidenceInterval figar_ci;
    ConfidenceInterval baseline_ci;
};

inline ComparisonRow compare_scores(const std::string& task,
                                    const std::vector<double>& figar_episode_scores,
                                    const std::vector<double>& baseline_episode_scores) {
    ComparisonRow row;
    row.task = task;
    row.figar_ci = confidence_interval(figar_episode_scores);
    row.baseline_ci = confidence_interval(baseline_episode_scores);
    row.figar_score = row.figar_ci.mean;
    row.baseline_score = row.baseline_ci.mean;
    Improvement imp = improvement(row.figar_score, row.baseline_score);
    row.improvement_value = imp.value;
    row.improvement_undefined = imp.undefined;
    return row;
}

struct SweepPoint {
    double p = 0.0;  // probability of sampling from the head distributions
    double mean_return = 0.0;
    double mean_repetition = 0.0;
};

/// For each p: both heads sample with probability p and take the argmax
/// otherwise (independent coins). p = 0 is fully greedy, p = 1 fully
/// stochastic. Every point replays the same evaluation seed.
inline std::vector<SweepPoint> greedy_stochastic_sweep(const FactoredPolicy& policy, Env& env,
                                                       const std::vector<double>& p_values,
                                                       int episodes, std::uint64_t seed,
                                                       double gamma = 1.0) {
    std::vector<SweepPoint> points;
    points.reserve(p_values.size());
    for (double p : p_values) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("greedy_stochastic_sweep: p out of [0,1]");
        env.restart_episode_stream();  // every point replays the same episodes
        EvalStats stats = evaluate_policy(policy, env, episodes, SamplingMode::eps_greedy(p), seed,
                                          gamma);
        points.push_back({p, stats.mean_return, stats.mean_repetition});
    }
    return points;
}

inline std::vector<double> default_sweep_grid() { return {0.0, 0.1, 0.25, 0.5, 0.75, 1.0}; }

/// Repetition-head ablation: the full policy versus the same policy with
/// every decision forced to repetition 1. Both runs use 0.1-greedy
/// selection and the same seed.
struct AblationResult {
    EvalStats full;
    EvalStats ablated;
};

inline AblationResult ablate_repetition_head(const FactoredPolicy& policy, Env& env, int episodes,
                                             std::uint64_t seed, double gamma = 1.0) {
    AblationResult out;
    env.restart_episode_stream();  // both arms face the same episode draws
    out.full = evaluate_policy(policy, env, episodes, SamplingMode::eps_greedy(0.1), seed, gamma);
    env.restart_episode_stream();
    out.ablated = evaluate_policy(policy, env, episodes, SamplingMode::eps_greedy(0.1), seed, gamma,
                                  /*force_repetition_one=*/true);
    return out;
}

// ------------------------------------------------------------------ CSV output

namespace detail {

/// Shortest round-trip decimal form so identical doubles always print
/// identically (reports must be byte-reproducible).
inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no platform newline mangling
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

}  // namespace detail

inline void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows) {
    auto out = detail::open_csv(path);
    out << "task,figar_score,baseline_score,improvement,improvement_undefined,"
           "figar_ci_lo,figar_ci_hi,baseline_ci_lo,baseline_ci_hi\n";
    for (const auto& r : rows) {
        out << r.task << ',' << detail::fmt(r.figar_score) << ',' << detail::fmt(r.baseline_score)
            << ',' << detail::fmt(r.improvement_value) << ',' << (r.improvement_undefined ? 1 : 0)
            << ',' << detail::fmt(r.figar_ci.lo) << ',' << detail::fmt(r.figar_ci.hi) << ','
            << detail::fmt(r.baseline_ci.lo) << ',' << detail::fmt(r.baseline_ci.hi) << '\n';
    }
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepPoint>& points) {
    auto out = detail::open_csv(path);
    out << "p,mean_return,mean_repetition\n";
    for (const auto& s : points) {
        out << detail::fmt(s.p) << ',' << detail::fmt(s.mean_return) << ','
            << detail::fmt(s.mean_repetition) << '\n';
    }
}

/// Histogram rows mirror repetition_histogram's uniform bins:
/// [1-bin_width], [bin_width+1 - 2*bin_width], ... up to w_max.
inline void write_histogram_csv(const std::string& path, const std::vector<double>& histogram,
                                int w_max, int bin_width = 3) {
    if (bin_width < 1 || w_max < 1) throw std::invalid_argument("write_histogram_csv: bad bins");
    std::size_t bins = static_cast<std::size_t>((w_max + bin_width - 1) / bin_width);
    if (bins != histogram.size()) {
        throw std::invalid_argument("write_histogram_csv: histogram size does not match w_max");
    }
    auto out = detail::open_csv(path);
    out << "bin,fraction\n";
    for (std::size_t idx = 0; idx < bins; ++idx) {
        int lo = static_cast<int>(idx) * bin_width + 1;
        int hi = std::min(lo + bin_width - 1, w_max);
        out << lo << '-' << hi << ',' << detail::fmt(histogram[idx]) << '\n';
    }
}

inline void write_ablation_csv(const std::string& path, const AblationResult& r) {
    auto out = detail::open_csv(path);
    out << "variant,mean_return,std_return,mean_repetition,goal_rate\n";
    out << "full," << detail::fmt(r.full.mean_return) << ',' << detail::fmt(r.full.std_return)
        << ',' << detail::fmt(r.full.mean_repetition) << ',' << detail::fmt(r.full.goal_rate)
        << '\n';
    out << "ablated," << detail::fmt(r.ablated.mean_return) << ','
        << detail::fmt(r.ablated.std_return) << ',' << detail::fmt(r.ablated.mean_repetition)
        << ',' << detail::fmt(r.ablated.goal_rate) << '\n';
}

}  // namespace figar
