#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "figar/env.hpp"
#include "figar/policy.hpp"
#include "figar/repetition.hpp"

namespace figar {

/// One aggregated outcome of executing (a, x) from s: probability of
/// landing in next_state after `elapsed` primitive steps, with the
/// probability-conditional mean within-macro discounted reward.
struct SmdpOutcome {
    int next_state = 0;
    int elapsed = 0;
    double prob = 0.0;
    double mean_reward = 0.0;
};

/// Exact tabular SMDP over the product decision space A x W.
struct TabularSmdp {
    int num_states = 0;
    int num_actions = 0;
    RepetitionSet W;
    double gamma = 1.0;
    int start_state = 0;
    std::vector<bool> terminal;
    // outcomes[s][a][xi]
    std::vector<std::vector<std::vector<std::vector<SmdpOutcome>>>> outcomes;
};

/// Solution of the SMDP: optimal values and the greedy (a*, x*) table.
struct OracleSolution {
    std::vector<double> v;                       // V*(s)
    std::vector<std::vector<std::vector<double>>> q;  // Q*(s, a, xi)
    std::vector<int> best_action;
    std::vector<int> best_repetition;            // value in W, not index
    int iterations = 0;
    double residual = 0.0;
};

/// Exhaustively expands all primitive trajectories of length <= x per
/// (s, a, x), aggregating probability, discounted reward and elapsed steps.
inline TabularSmdp expand_smdp(const DiscreteEnvModel& env, const RepetitionSet& W, double gamma,
                               int state_cap = 10000) {
    int S = env.num_states();
    if (S > state_cap) throw std::runtime_error("expand_smdp: state space exceeds cap");
    if (!W.values.empty() && W.values.back() > 50) {
        throw std::runtime_error("expand_smdp: max repetition exceeds expansion cap of 50");
    }
    TabularSmdp model;
    model.num_states = S;
    model.num_actions = env.num_actions();
    model.W = W;
    model.gamma = gamma;
    model.start_state = env.start_state();
    model.terminal.resize(S);
    for (int s = 0; s < S; ++s) model.terminal[s] = env.is_terminal_state(s);
    model.outcomes.assign(S, {});

    struct Partial {
        double prob;
        double reward;  // discounted within-macro so far
    };

    for (int s = 0; s < S; ++s) {
        model.outcomes[s].assign(model.num_actions, {});
        if (model.terminal[s]) continue;
        for (int a = 0; a < model.num_actions; ++a) {
            model.outcomes[s][a].assign(W.size(), {});
            for (std::size_t xi = 0; xi < W.size(); ++xi) {
                int x = W.values[xi];
                // step-synchronous expansion: alive mass per state, with
                // probability-weighted accumulated reward
                std::map<int, Partial> alive{{s, {1.0, 0.0}}};
                // emitted outcomes keyed by (next_state, elapsed)
                std::map<std::pair<int, int>, Partial> done;
                double disc = 1.0;
                for (int step = 0; step < x && !alive.empty(); ++step) {
                    std::map<int, Partial> next;
                    for (const auto& [cur, part] : alive) {
                        for (const DiscreteOutcome& o : env.transitions(cur, a)) {
                            double p = part.prob * o.prob;
                            double r = part.reward * o.prob + p * disc * o.reward;
                            // r aggregates prob-weighted reward mass
                            if (o.terminal || step + 1 == x) {
                                auto& slot = done[{o.next_state, step + 1}];
                                slot.prob += p;
                                slot.reward += r;
                            } else {
                                auto& slot = next[o.next_state];
                                slot.prob += p;
                                slot.reward += r;
                            }
                        }
                    }
                    alive = std::move(next);
                    disc *= gamma;
                }
                auto& out = model.outcomes[s][a][xi];
                for (const auto& [key, part] : done) {
                    SmdpOutcome o;
                    o.next_state = key.first;
                    o.elapsed = key.second;
                    o.prob = part.prob;
                    o.mean_reward = part.reward / part.prob;
                    out.push_back(o);
                }
            }
        }
    }
    return model;
}

/// Synchronous (Jacobi) SMDP value iteration with holding-time discounting:
/// Q(s,a,x) <- sum_o p * (r + gamma^elapsed * V(s')).
inline OracleSolution smdp_value_iteration(const TabularSmdp& model, double tol = 1e-10,
                                           int max_iters = 100000) {
    if (tol <= 0.0) throw std::invalid_argument("smdp_value_iteration: tol must be positive");
    constexpr double kTieTol = 1e-9;
    int S = model.num_states;
    OracleSolution sol;
    sol.v.assign(S, 0.0);
    sol.q.assign(S, {});
    sol.best_action.assign(S, 0);
    sol.best_repetition.assign(S, model.W.values.front());
    for (int s = 0; s < S; ++s) {
        sol.q[s].assign(model.num_actions, std::vector<double>(model.W.size(), 0.0));
    }

    for (int iter = 0; iter < max_iters; ++iter) {
        double residual = 0.0;
        std::vector<double> v_new(S, 0.0);
        for (int s = 0; s < S; ++s) {
            if (model.terminal[s]) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < model.num_actions; ++a) {
                for (std::size_t xi = 0; xi < model.W.size(); ++xi) {
                    double q = 0.0;
                    for (const SmdpOutcome& o : model.outcomes[s][a][xi]) {
                        double cont = model.terminal[o.next_state]
                                          ? 0.0
                                          : std::pow(model.gamma, o.elapsed) * sol.v[o.next_state];
                        q += o.prob * (o.mean_reward + cont);
                    }
                    sol.q[s][a][xi] = q;
                    // near-ties resolve toward the larger repetition so the
                    // greedy table is deterministic under roundoff
                    bool better = q > best + kTieTol;
                    bool tied_coarser =
                        q > best - kTieTol && model.W.values[xi] > sol.best_repetition[s];
                    if (better || tied_coarser) {
                        best = std::max(best, q);
                        sol.best_action[s] = a;
                        sol.best_repetition[s] = model.W.values[xi];
                    }
                }
            }
            v_new[s] = best;
            residual = std::max(residual, std::fabs(v_new[s] - sol.v[s]));
        }
        sol.v = v_new;
        sol.iterations = iter + 1;
        sol.residual = residual;
        if (residual < tol) return sol;
    }
    throw std::runtime_error("smdp_value_iteration: no convergence within iteration cap");
}

/// Monte Carlo evaluation statistics of a policy at decision granularity.
struct EvalStats {
    double mean_return = 0.0;        // undiscounted episodic return
    double std_return = 0.0;
    double mean_disc_return = 0.0;   // gamma^(primitive step) discounted
    double mean_repetition = 0.0;    // per-decision mean
    double goal_rate = 0.0;          // fraction of episodes ending terminal
    std::vector<double> episode_returns;
    std::vector<int> repetitions;
    std::vector<double> histogram;   // bins of width 3 up to max(W)
};

/// Rolls out `episodes` episodes of `policy` on `env` in the given mode.
/// force_repetition_one implements the ablation that discards the
/// repetition head and executes every action at repetition 1.
inline EvalStats evaluate_policy(const FactoredPolicy& policy, Env& env, int episodes,
                                 SamplingMode mode, std::uint64_t seed, double gamma = 1.0,
                                 bool force_repetition_one = false) {
    if (episodes < 1) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
    EvalStats stats;
    Rng rng(derive_seed(seed, "eval"));
    double sum = 0.0, sumsq = 0.0, disc_sum = 0.0;
    long rep_sum = 0;
    int goal = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        auto obs = env.reset();
        double ret = 0.0, disc_ret = 0.0;
        double disc = 1.0;
        while (!env.terminal()) {
            Decision d = policy.decide(obs, mode, rng);
            int x = force_repetition_one ? 1 : d.repetition;
            MacroTransition t = execute_macro(env, d.action, x, gamma);
            ret += t.raw_reward;
            disc_ret += disc * t.macro_reward;
            disc *= std::pow(gamma, t.elapsed);
            stats.repetitions.push_back(x);
            rep_sum += x;
            obs = t.next_state;
        }
        stats.episode_returns.push_back(ret);
        sum += ret;
        sumsq += ret * ret;
        disc_sum += disc_ret;
        if (env.succeeded()) ++goal;
    }
    int n = episodes;
    stats.mean_return = sum / n;
    stats.std_return = std::sqrt(std::max(0.0, sumsq / n - stats.mean_return * stats.mean_return));
    stats.mean_disc_return = disc_sum / n;
    stats.mean_repetition = static_cast<double>(rep_sum) / static_cast<double>(stats.repetitions.size());
    stats.goal_rate = static_cast<double>(goal) / n;
    int w_max = std::max(30, policy.repetition_set().values.back());
    stats.histogram = repetition_histogram(stats.repetitions, w_max);
    return stats;
}

}  // namespace figar
