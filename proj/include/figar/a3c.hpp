#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "figar/env.hpp"
#include "figar/gaussian.hpp"
#include "figar/mlp.hpp"
#include "figar/optim.hpp"
#include "figar/policy.hpp"
#include "figar/rng.hpp"

namespace figar {

/// Up to n decision steps of experience plus the bootstrap value of the
/// state after the last transition (0 when that transition is terminal).
struct RolloutSegment {
    std::vector<MacroTransition> transitions;
    double bootstrap_value = 0.0;
};

struct A3cConfig {
    int n = 20;                      // decision-step horizon
    double entropy_beta = 0.02;      // applied to both heads
    double lr = 1e-3;                // linearly annealed to 0 over the budget
    std::uint64_t total_decision_steps = 0;
    double warmup_fraction = 0.2;    // stage 1 share of the budget
    int warmup_fixed_repetition = 1;
    int num_workers = 1;
    double gamma = 0.99;
    // exponents from the published recurrence (global x indexing) instead
    // of exact per-window elapsed sums; comparison only
    bool literal_recurrence = false;
    std::uint64_t log_every = 1000;  // decisions between training log rows
};

struct A3cLogRow {
    std::uint64_t decision_step = 0;
    double mean_episode_return = 0.0;
    double mean_repetition = 0.0;
    double entropy_a = 0.0;
    double entropy_x = 0.0;
};

/// n-decision-step value targets with holding-time discounting. The exact
/// variant discounts by cumulative elapsed primitive steps within the
/// window, so targets equal brute-force primitive-step discounted returns.
inline std::vector<double> smdp_return_targets(const RolloutSegment& seg, double gamma,
                                               bool literal_recurrence = false) {
    const auto& tr = seg.transitions;
    if (tr.empty()) throw std::invalid_argument("smdp_return_targets: empty segment");
    if (tr.back().terminal && seg.bootstrap_value != 0.0) {
        throw std::invalid_argument("smdp_return_targets: terminal segment must bootstrap 0");
    }
    std::size_t T = tr.size();
    std::vector<double> targets(T);
    if (!literal_recurrence) {
        double next = seg.bootstrap_value;
        for (std::size_t j = T; j-- > 0;) {
            targets[j] = tr[j].macro_reward + std::pow(gamma, tr[j].elapsed) * next;
            next = targets[j];
        }
        return targets;
    }
    // y_c = x_1 + ... + x_c with x indexed from the segment start, which
    // drops the durations of the first j macros from every window at j > 0
    for (std::size_t j = 0; j < T; ++j) {
        double y = 0.0;
        double v = 0.0;
        for (std::size_t k = j; k < T; ++k) {
            v += std::pow(gamma, y) * tr[k].macro_reward;
            y += tr[k - j].repetition;
        }
        targets[j] = v + std::pow(gamma, y) * seg.bootstrap_value;
    }
    return targets;
}

/// Joint policy-gradient loss over a segment:
/// -sum_j (log pi_a + log pi_x) * A_j - beta * (H_a + H_x), with the
/// advantage treated as a constant. include_repetition=false implements
/// the warmup stage that discards repetition-head gradients.
inline double joint_actor_loss(const FactoredPolicy& policy, const RolloutSegment& seg,
                               const std::vector<double>& targets,
                               const std::vector<double>& values, double entropy_beta,
                               PolicyGrad& grad, bool include_repetition = true) {
    const auto& tr = seg.transitions;
    if (targets.size() != tr.size() || values.size() != tr.size()) {
        throw std::invalid_argument("joint_actor_loss: size mismatch");
    }
    double loss = 0.0;
    for (std::size_t j = 0; j < tr.size(); ++j) {
        PolicyEval ev = policy.evaluate(tr[j].state);
        double adv = targets[j] - values[j];
        int xi = policy.repetition_set().index_of(tr[j].repetition);

        double lpa, lpx, ha, hx;
        if (policy.is_discrete()) {
            lpa = std::log(ev.action_probs.at(tr[j].action.discrete));
            ha = categorical_entropy(ev.action_probs);
        } else {
            lpa = ev.dist.logprob(tr[j].action.continuous);
            ha = ev.dist.entropy();
        }
        lpx = policy.repetition_set().size() == 1 ? 0.0 : std::log(ev.rep_probs[xi]);
        hx = categorical_entropy(ev.rep_probs);

        policy.accumulate_logprob_a_grad(ev, tr[j].action, -adv, grad);
        if (include_repetition) {
            policy.accumulate_logprob_x_grad(ev, xi, -adv, grad);
            loss += -(lpa + lpx) * adv - entropy_beta * (ha + hx);
            policy.accumulate_entropy_grad(ev, -entropy_beta, -entropy_beta, grad);
        } else {
            loss += -lpa * adv - entropy_beta * ha;
            policy.accumulate_entropy_grad(ev, -entropy_beta, 0.0, grad);
        }
    }
    return loss;
}

/// Mean squared error of the value net against the segment targets.
inline double critic_loss(const Mlp& value_fn, const RolloutSegment& seg,
                          const std::vector<double>& targets, ParamVector& grad) {
    const auto& tr = seg.transitions;
    if (targets.size() != tr.size()) throw std::invalid_argument("critic_loss: size mismatch");
    double loss = 0.0;
    double inv = 1.0 / static_cast<double>(tr.size());
    for (std::size_t j = 0; j < tr.size(); ++j) {
        MlpCache cache;
        double v = value_fn.forward(tr[j].state, cache)[0];
        double err = v - targets[j];
        loss += err * err * inv;
        std::vector<double> up{2.0 * err * inv};
        value_fn.backward(cache, up, grad);
    }
    return loss;
}

/// Value network: observation to scalar, linear output.
inline Mlp make_value_net(int obs_dim, const std::vector<int>& hidden, Activation act,
                          std::uint64_t master_seed) {
    std::vector<int> sizes{obs_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    Mlp v(sizes, act, OutputTransform::Linear);
    Rng r(derive_seed(master_seed, "value"));
    v.init(r);
    return v;
}

/// Action-only softmax network with the same shape and initialization as
/// the factored policy's action head.
inline Mlp make_plain_actor(int obs_dim, int num_actions, const std::vector<int>& hidden,
                            Activation act, std::uint64_t master_seed) {
    std::vector<int> sizes{obs_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(num_actions);
    Mlp a(sizes, act, OutputTransform::Softmax);
    Rng r(derive_seed(master_seed, "action"));
    a.init(r, 0.01);
    return a;
}

using EnvFactory = std::function<std::unique_ptr<Env>(int worker_id)>;

namespace detail {

// Window aggregation behind the training log: one row per log_every
// decisions, covering everything accumulated since the previous row.
struct LogAccumulator {
    std::uint64_t log_every = 1000;
    std::uint64_t next_boundary = 0;
    double ep_return_sum = 0.0;
    std::uint64_t ep_count = 0;
    double rep_sum = 0.0;
    double ent_a_sum = 0.0;
    double ent_x_sum = 0.0;
    std::uint64_t decisions = 0;
    double last_mean_return = 0.0;
    std::vector<A3cLogRow> rows;

    void decision(double rep, double ha, double hx) {
        rep_sum += rep;
        ent_a_sum += ha;
        ent_x_sum += hx;
        ++decisions;
    }

    void episode(double ret) {
        ep_return_sum += ret;
        ++ep_count;
    }

    void maybe_emit(std::uint64_t decision_count) {
        if (next_boundary == 0) next_boundary = log_every;
        while (decision_count >= next_boundary) {
            A3cLogRow row;
            row.decision_step = next_boundary;
            if (ep_count > 0) last_mean_return = ep_return_sum / static_cast<double>(ep_count);
            row.mean_episode_return = last_mean_return;
            row.mean_repetition = decisions > 0 ? rep_sum / static_cast<double>(decisions) : 0.0;
            row.entropy_a = decisions > 0 ? ent_a_sum / static_cast<double>(decisions) : 0.0;
            row.entropy_x = decisions > 0 ? ent_x_sum / static_cast<double>(decisions) : 0.0;
            rows.push_back(row);
            ep_return_sum = 0.0;
            ep_count = 0;
            rep_sum = ent_a_sum = ent_x_sum = 0.0;
            decisions = 0;
            next_boundary += log_every;
        }
    }
};

}  // namespace detail

/// Two-stage actor-critic training of the factored policy. Stage 1 fixes
/// the repetition to warmup_fixed_repetition and discards repetition-head
/// gradients; stage 2 trains both heads jointly. Workers snapshot shared
/// parameters per segment and push deltas through one shared-statistics
/// RMSProp instance. Budget counts decision steps, one per macro.
inline std::vector<A3cLogRow> train_figar_a3c(const A3cConfig& cfg, const EnvFactory& env_factory,
                                              FactoredPolicy& policy, Mlp& value_fn,
                                              std::uint64_t seed) {
    if (cfg.total_decision_steps == 0) throw std::invalid_argument("train_figar_a3c: empty budget");
    if (cfg.n < 1) throw std::invalid_argument("train_figar_a3c: n must be >= 1");
    if (cfg.warmup_fraction < 0.0 || cfg.warmup_fraction >= 1.0) {
        throw std::invalid_argument("train_figar_a3c: warmup_fraction out of [0, 1)");
    }
    if (cfg.num_workers < 1) throw std::invalid_argument("train_figar_a3c: need a worker");
    const RepetitionSet& W = policy.repetition_set();
    if (cfg.warmup_fraction > 0.0 && !W.contains(cfg.warmup_fixed_repetition)) {
        throw std::invalid_argument("train_figar_a3c: warmup repetition not in W");
    }

    OptimizerConfig oc;
    oc.kind = OptKind::RmspropShared;
    oc.learning_rate = cfg.lr;
    oc.anneal = true;
    oc.anneal_budget = cfg.total_decision_steps;
    Optimizer optimizer(oc);

    const std::uint64_t warmup_steps =
        static_cast<std::uint64_t>(cfg.warmup_fraction * static_cast<double>(cfg.total_decision_steps));

    std::atomic<std::uint64_t> counter{0};
    std::mutex shared_mu;
    detail::LogAccumulator log;
    log.log_every = cfg.log_every;

    auto worker = [&](int wid) {
        auto env = env_factory(wid);
        Rng rng(derive_seed(seed, "a3c-worker-" + std::to_string(wid)));
        auto obs = env->reset();
        double episode_return = 0.0;

        while (true) {
            std::uint64_t start;
            FactoredPolicy snapshot;
            Mlp value_snapshot;
            {
                std::lock_guard<std::mutex> lk(shared_mu);
                start = counter.load(std::memory_order_relaxed);
                if (start >= cfg.total_decision_steps) return;
                snapshot = policy;
                value_snapshot = value_fn;
            }
            const bool stage1 = start < warmup_steps;

            RolloutSegment seg;
            std::vector<double> seg_reps, seg_ha, seg_hx;
            std::vector<double> finished_episodes;
            for (int t = 0; t < cfg.n; ++t) {
                PolicyEval ev = snapshot.evaluate(obs);
                Action action;
                if (snapshot.is_discrete()) {
                    action = Action::of(static_cast<int>(rng.categorical(ev.action_probs)));
                } else {
                    action = Action::of(ev.dist.sample(rng));
                }
                int xi;
                if (stage1) {
                    xi = W.index_of(cfg.warmup_fixed_repetition);
                } else if (W.size() == 1) {
                    xi = 0;
                } else {
                    xi = static_cast<int>(rng.categorical(ev.rep_probs));
                }
                counter.fetch_add(1, std::memory_order_relaxed);

                MacroTransition tr = execute_macro(*env, action, W.values[xi], cfg.gamma);
                episode_return += tr.raw_reward;
                seg_reps.push_back(tr.repetition);
                seg_ha.push_back(snapshot.is_discrete() ? categorical_entropy(ev.action_probs)
                                                        : ev.dist.entropy());
                seg_hx.push_back(categorical_entropy(ev.rep_probs));
                seg.transitions.push_back(tr);
                obs = tr.next_state;
                if (tr.terminal) {
                    finished_episodes.push_back(episode_return);
                    episode_return = 0.0;
                    obs = env->reset();
                    break;
                }
            }
            seg.bootstrap_value =
                seg.transitions.back().terminal ? 0.0 : value_snapshot.forward(obs)[0];

            auto targets = smdp_return_targets(seg, cfg.gamma, cfg.literal_recurrence);
            std::vector<double> values(seg.transitions.size());
            for (std::size_t j = 0; j < values.size(); ++j) {
                values[j] = value_snapshot.forward(seg.transitions[j].state)[0];
            }
            PolicyGrad pg = snapshot.zero_grad();
            joint_actor_loss(snapshot, seg, targets, values, cfg.entropy_beta, pg, !stage1);
            ParamVector vg = ParamVector::zeros_like(value_snapshot.params());
            critic_loss(value_snapshot, seg, targets, vg);

            std::vector<double> grad = snapshot.flatten_grad(pg);
            grad.insert(grad.end(), vg.values().begin(), vg.values().end());

            {
                std::lock_guard<std::mutex> lk(shared_mu);
                std::vector<double> flat = policy.flatten();
                flat.insert(flat.end(), value_fn.params().values().begin(),
                            value_fn.params().values().end());
                optimizer.apply(flat, grad, start);
                std::size_t np = policy.num_params();
                policy.unflatten(std::span<const double>(flat.data(), np));
                std::copy(flat.begin() + static_cast<std::ptrdiff_t>(np), flat.end(),
                          value_fn.params().values().begin());

                for (std::size_t j = 0; j < seg.transitions.size(); ++j) {
                    log.decision(seg_reps[j], seg_ha[j], seg_hx[j]);
                }
                for (double r : finished_episodes) log.episode(r);
                log.maybe_emit(counter.load(std::memory_order_relaxed));
            }
        }
    };

    if (cfg.num_workers == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(cfg.num_workers);
        for (int w = 0; w < cfg.num_workers; ++w) threads.emplace_back(worker, w);
        for (auto& t : threads) t.join();
    }
    return log.rows;
}

/// Reference actor-critic without a repetition head: every decision is one
/// primitive step. Mirrors train_figar_a3c segment for segment so that the
/// factored trainer at W = {1} reproduces it exactly.
inline std::vector<A3cLogRow> train_plain_a3c(const A3cConfig& cfg, const EnvFactory& env_factory,
                                              Mlp& actor, Mlp& value_fn, std::uint64_t seed) {
    if (cfg.total_decision_steps == 0) throw std::invalid_argument("train_plain_a3c: empty budget");
    if (cfg.n < 1) throw std::invalid_argument("train_plain_a3c: n must be >= 1");
    if (cfg.num_workers < 1) throw std::invalid_argument("train_plain_a3c: need a worker");

    OptimizerConfig oc;
    oc.kind = OptKind::RmspropShared;
    oc.learning_rate = cfg.lr;
    oc.anneal = true;
    oc.anneal_budget = cfg.total_decision_steps;
    Optimizer optimizer(oc);

    std::atomic<std::uint64_t> counter{0};
    std::mutex shared_mu;
    detail::LogAccumulator log;
    log.log_every = cfg.log_every;

    auto worker = [&](int wid) {
        auto env = env_factory(wid);
        Rng rng(derive_seed(seed, "a3c-worker-" + std::to_string(wid)));
        auto obs = env->reset();
        double episode_return = 0.0;

        while (true) {
            std::uint64_t start;
            Mlp actor_snapshot, value_snapshot;
            {
                std::lock_guard<std::mutex> lk(shared_mu);
                start = counter.load(std::memory_order_relaxed);
                if (start >= cfg.total_decision_steps) return;
                actor_snapshot = actor;
                value_snapshot = value_fn;
            }

            RolloutSegment seg;
            std::vector<double> seg_ha;
            std::vector<double> finished_episodes;
            for (int t = 0; t < cfg.n; ++t) {
                auto probs = actor_snapshot.forward(obs);
                int a = static_cast<int>(rng.categorical(probs));
                counter.fetch_add(1, std::memory_order_relaxed);

                MacroTransition tr = execute_macro(*env, Action::of(a), 1, cfg.gamma);
                episode_return += tr.raw_reward;
                seg_ha.push_back(categorical_entropy(probs));
                seg.transitions.push_back(tr);
                obs = tr.next_state;
                if (tr.terminal) {
                    finished_episodes.push_back(episode_return);
                    episode_return = 0.0;
                    obs = env->reset();
                    break;
                }
            }
            seg.bootstrap_value =
                seg.transitions.back().terminal ? 0.0 : value_snapshot.forward(obs)[0];

            auto targets = smdp_return_targets(seg, cfg.gamma);
            ParamVector ag = ParamVector::zeros_like(actor_snapshot.params());
            ParamVector vg = ParamVector::zeros_like(value_snapshot.params());
            for (std::size_t j = 0; j < seg.transitions.size(); ++j) {
                const auto& tr = seg.transitions[j];
                MlpCache pcache;
                auto probs = actor_snapshot.forward(tr.state, pcache);
                double v = value_snapshot.forward(tr.state)[0];
                double adv = targets[j] - v;
                // two accumulation passes, same order as the factored
                // trainer, so the W = {1} reduction is exact
                std::vector<double> up(probs.size(), 0.0);
                up[tr.action.discrete] = -adv / probs[tr.action.discrete];
                actor_snapshot.backward(pcache, up, ag);
                std::vector<double> upe(probs.size());
                for (std::size_t i = 0; i < probs.size(); ++i) {
                    upe[i] = -cfg.entropy_beta * (-(std::log(probs[i]) + 1.0));
                }
                actor_snapshot.backward(pcache, upe, ag);
            }
            critic_loss(value_snapshot, seg, targets, vg);

            std::vector<double> grad = ag.values();
            grad.insert(grad.end(), vg.values().begin(), vg.values().end());

            {
                std::lock_guard<std::mutex> lk(shared_mu);
                std::vector<double> flat = actor.params().values();
                flat.insert(flat.end(), value_fn.params().values().begin(),
                            value_fn.params().values().end());
                optimizer.apply(flat, grad, start);
                std::size_t np = actor.params().size();
                std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(np),
                          actor.params().values().begin());
                std::copy(flat.begin() + static_cast<std::ptrdiff_t>(np), flat.end(),
                          value_fn.params().values().begin());

                for (std::size_t j = 0; j < seg.transitions.size(); ++j) {
                    log.decision(1.0, seg_ha[j], 0.0);
                }
                for (double r : finished_episodes) log.episode(r);
                log.maybe_emit(counter.load(std::memory_order_relaxed));
            }
        }
    };

    if (cfg.num_workers == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(cfg.num_workers);
        for (int w = 0; w < cfg.num_workers; ++w) threads.emplace_back(worker, w);
        for (auto& t : threads) t.join();
    }
    return log.rows;
}

}  // namespace figar
