#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "figar/env.hpp"
#include "figar/mlp.hpp"
#include "figar/optim.hpp"
#include "figar/oracle.hpp"
#include "figar/param.hpp"
#include "figar/repetition.hpp"
#include "figar/rng.hpp"

namespace figar {

struct OuParams {
    double theta = 0.15;
    double sigma = 0.2;
    double mu = 0.0;
};

struct DdpgConfig {
    std::size_t replay_capacity = 10000;
    double tau = 0.001;
    int batch_size = 64;
    double gamma = 0.99;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    OuParams ou;
    double eps_start = 0.2;
    double eps_end = 0.0;
    std::uint64_t eps_steps = 50000;   // anneal horizon, outlives the run on purpose
    std::uint64_t total_train_steps = 40000;
    std::vector<int> hidden{64, 64};
    std::uint64_t log_every = 1000;
};

/// Linear, non-increasing, exactly eps_end from eps_steps onward.
inline double epsilon_schedule(const DdpgConfig& cfg, std::uint64_t step) {
    if (step >= cfg.eps_steps) return cfg.eps_end;
    double frac = static_cast<double>(step) / static_cast<double>(cfg.eps_steps);
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
}

struct ReplayEntry {
    std::vector<double> s;
    std::vector<double> a;
    int rep_index = 0;  // one-hot position over W
    double macro_reward = 0.0;
    int elapsed = 1;
    std::vector<double> s_next;
    bool terminal = false;
};

/// FIFO ring buffer of replay entries.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
    }

    void push(ReplayEntry e) {
        if (entries_.size() < capacity_) {
            entries_.push_back(std::move(e));
        } else {
            entries_[head_] = std::move(e);
            head_ = (head_ + 1) % capacity_;
        }
    }

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// Entries indexed oldest first.
    const ReplayEntry& oldest_first(std::size_t i) const {
        if (i >= entries_.size()) throw std::out_of_range("ReplayBuffer: index out of range");
        return entries_[(head_ + i) % entries_.size()];
    }

    const ReplayEntry& at(std::size_t i) const { return entries_.at(i); }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // eviction cursor once full
    std::vector<ReplayEntry> entries_;
};

/// Deterministic actor: bounded action network plus, for non-singleton W,
/// a softmax repetition network. A singleton repetition set builds no
/// repetition machinery at all.
class DdpgActor {
public:
    DdpgActor() = default;

    DdpgActor(int obs_dim, const ActionSpace& space, RepetitionSet w,
              const std::vector<int>& hidden, Activation act, std::uint64_t master_seed)
        : space_(space), W_(std::move(w)) {
        if (space.kind != ActionSpace::Kind::Continuous) {
            throw std::invalid_argument("DdpgActor: needs a continuous action space");
        }
        std::vector<int> a_sizes{obs_dim};
        a_sizes.insert(a_sizes.end(), hidden.begin(), hidden.end());
        a_sizes.push_back(space.dim);
        action_net_ = Mlp(a_sizes, act, OutputTransform::BoundedTanh);
        action_net_.set_bounds(space.lo, space.hi);
        {
            Rng r(derive_seed(master_seed, "action"));
            action_net_.init(r, 0.01);
        }
        if (W_.size() > 1) {
            std::vector<int> x_sizes{obs_dim};
            x_sizes.insert(x_sizes.end(), hidden.begin(), hidden.end());
            x_sizes.push_back(static_cast<int>(W_.size()));
            rep_net_.emplace(x_sizes, act, OutputTransform::Softmax);
            Rng r(derive_seed(master_seed, "repetition"));
            rep_net_->init(r, 0.01);
        }
    }

    const RepetitionSet& repetition_set() const { return W_; }
    const ActionSpace& action_space() const { return space_; }
    bool has_rep_net() const { return rep_net_.has_value(); }
    Mlp& action_net() { return action_net_; }
    const Mlp& action_net() const { return action_net_; }
    Mlp& rep_net() { return *rep_net_; }
    const Mlp& rep_net() const { return *rep_net_; }

    std::vector<double> action(std::span<const double> obs, MlpCache* cache = nullptr) const {
        MlpCache local;
        return action_net_.forward(obs, cache ? *cache : local);
    }

    std::vector<double> rep_probs(std::span<const double> obs, MlpCache* cache = nullptr) const {
        if (!rep_net_) return {1.0};
        MlpCache local;
        return rep_net_->forward(obs, cache ? *cache : local);
    }

private:
    ActionSpace space_;
    RepetitionSet W_;
    Mlp action_net_;
    std::optional<Mlp> rep_net_;
};

/// Critic f(s, a, x): the state feeds the first hidden layer; the action
/// vector and (for non-singleton W) the repetition vector join at the
/// second hidden layer. rep_dim 0 omits repetition inputs entirely.
class CriticNet {
public:
    CriticNet() = default;

    CriticNet(int obs_dim, int action_dim, int rep_dim, const std::vector<int>& hidden,
              Activation act)
        : obs_dim_(obs_dim), action_dim_(action_dim), rep_dim_(rep_dim), act_(act) {
        if (hidden.size() != 2) throw std::invalid_argument("CriticNet: needs two hidden sizes");
        h1_ = hidden[0];
        h2_ = hidden[1];
        params_.add_segment("W1", {static_cast<std::size_t>(h1_), static_cast<std::size_t>(obs_dim)});
        params_.add_segment("b1", {static_cast<std::size_t>(h1_)});
        std::size_t z = static_cast<std::size_t>(h1_ + action_dim + rep_dim);
        params_.add_segment("W2", {static_cast<std::size_t>(h2_), z});
        params_.add_segment("b2", {static_cast<std::size_t>(h2_)});
        params_.add_segment("W3", {1, static_cast<std::size_t>(h2_)});
        params_.add_segment("b3", {1});
    }

    void init(Rng& rng, double final_scale = 0.01) {
        auto fill = [&](const char* w, const char* b, int fan_in, double scale) {
            double bound = scale / std::sqrt(static_cast<double>(fan_in));
            for (double& v : params_.segment(w)) v = rng.uniform(-bound, bound);
            for (double& v : params_.segment(b)) v = 0.0;
        };
        fill("W1", "b1", obs_dim_, 1.0);
        fill("W2", "b2", h1_ + action_dim_ + rep_dim_, 1.0);
        fill("W3", "b3", h2_, final_scale);
    }

    ParamVector& params() { return params_; }
    const ParamVector& params() const { return params_; }
    int rep_dim() const { return rep_dim_; }

    struct Cache {
        std::vector<double> s, z;
        std::vector<double> h1, h2;
    };

    double forward(std::span<const double> s, std::span<const double> a,
                   std::span<const double> x, Cache& cache) const {
        if (static_cast<int>(s.size()) != obs_dim_ || static_cast<int>(a.size()) != action_dim_ ||
            static_cast<int>(x.size()) != rep_dim_) {
            throw std::invalid_argument("CriticNet::forward: input size mismatch");
        }
        cache.s.assign(s.begin(), s.end());
        cache.h1 = affine("W1", "b1", s);
        activate(cache.h1);
        cache.z = cache.h1;
        cache.z.insert(cache.z.end(), a.begin(), a.end());
        cache.z.insert(cache.z.end(), x.begin(), x.end());
        cache.h2 = affine("W2", "b2", cache.z);
        activate(cache.h2);
        auto w3 = params_.segment("W3");
        double q = params_.segment("b3")[0];
        for (int i = 0; i < h2_; ++i) q += w3[i] * cache.h2[i];
        return q;
    }

    double forward(std::span<const double> s, std::span<const double> a,
                   std::span<const double> x) const {
        Cache cache;
        return forward(s, a, x, cache);
    }

    /// Accumulates upstream * dq/dparams into grad; optionally also the
    /// input gradients with respect to the action and repetition inputs.
    void backward(const Cache& cache, double upstream, ParamVector& grad,
                  std::vector<double>* d_action = nullptr,
                  std::vector<double>* d_rep = nullptr) const {
        if (!grad.same_layout(params_)) throw std::invalid_argument("CriticNet::backward: layout");
        auto w3 = params_.segment("W3");
        auto gw3 = grad.segment("W3");
        for (int i = 0; i < h2_; ++i) gw3[i] += upstream * cache.h2[i];
        grad.segment("b3")[0] += upstream;

        std::vector<double> dh2(h2_);
        for (int i = 0; i < h2_; ++i) dh2[i] = upstream * w3[i] * act_deriv(cache.h2[i]);

        auto w2 = params_.segment("W2");
        auto gw2 = grad.segment("W2");
        auto gb2 = grad.segment("b2");
        std::size_t zn = cache.z.size();
        std::vector<double> dz(zn, 0.0);
        for (int i = 0; i < h2_; ++i) {
            gb2[i] += dh2[i];
            for (std::size_t j = 0; j < zn; ++j) {
                gw2[i * zn + j] += dh2[i] * cache.z[j];
                dz[j] += dh2[i] * w2[i * zn + j];
            }
        }
        if (d_action) d_action->assign(dz.begin() + h1_, dz.begin() + h1_ + action_dim_);
        if (d_rep) d_rep->assign(dz.begin() + h1_ + action_dim_, dz.end());

        std::vector<double> dh1(h1_);
        for (int i = 0; i < h1_; ++i) dh1[i] = dz[i] * act_deriv(cache.h1[i]);
        auto w1 = params_.segment("W1");
        auto gw1 = grad.segment("W1");
        auto gb1 = grad.segment("b1");
        for (int i = 0; i < h1_; ++i) {
            gb1[i] += dh1[i];
            for (int j = 0; j < obs_dim_; ++j) {
                gw1[i * obs_dim_ + j] += dh1[i] * cache.s[j];
            }
        }
        (void)w1;
    }

private:
    std::vector<double> affine(const char* wname, const char* bname,
                               std::span<const double> in) const {
        auto w = params_.segment(wname);
        auto b = params_.segment(bname);
        std::size_t rows = b.size();
        std::vector<double> out(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            double v = b[i];
            for (std::size_t j = 0; j < in.size(); ++j) v += w[i * in.size() + j] * in[j];
            out[i] = v;
        }
        return out;
    }

    void activate(std::vector<double>& v) const {
        for (double& x : v) x = act_ == Activation::Tanh ? std::tanh(x) : std::max(0.0, x);
    }

    double act_deriv(double post) const {
        return act_ == Activation::Tanh ? 1.0 - post * post : (post > 0.0 ? 1.0 : 0.0);
    }

    int obs_dim_ = 0, action_dim_ = 0, rep_dim_ = 0, h1_ = 0, h2_ = 0;
    Activation act_ = Activation::Tanh;
    ParamVector params_;
};

/// theta_target <- tau * theta_live + (1 - tau) * theta_target.
inline void soft_update(ParamVector& target, const ParamVector& live, double tau) {
    if (!target.same_layout(live)) throw std::invalid_argument("soft_update: layout mismatch");
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("soft_update: tau out of [0,1]");
    for (std::size_t i = 0; i < target.size(); ++i) {
        target[i] = tau * live[i] + (1.0 - tau) * target[i];
    }
}

struct TargetNets {
    DdpgActor actor;
    CriticNet critic;
};

struct OuState {
    std::vector<double> n;
    explicit OuState(int dim = 0) : n(static_cast<std::size_t>(dim), 0.0) {}
};

struct ExploreDecision {
    std::vector<double> action;
    int rep_index = 0;
};

/// Exploration: OU-perturbed deterministic action, clipped to bounds, and
/// the epsilon-greedy repetition (greedy with probability eps, sampled
/// with 1 - eps). A singleton W consumes no repetition randomness.
inline ExploreDecision act_explore(const DdpgActor& actor, std::span<const double> obs, double eps,
                                   const OuParams& ou, OuState& state, Rng& rng) {
    if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("act_explore: eps out of [0,1]");
    ExploreDecision d;
    d.action = actor.action(obs);
    const auto& space = actor.action_space();
    for (std::size_t i = 0; i < d.action.size(); ++i) {
        state.n[i] += ou.theta * (ou.mu - state.n[i]) + ou.sigma * rng.normal();
        d.action[i] = std::clamp(d.action[i] + state.n[i], space.lo[i], space.hi[i]);
    }
    if (actor.has_rep_net()) {
        auto probs = actor.rep_probs(obs);
        if (rng.uniform() < eps) {
            d.rep_index = static_cast<int>(
                std::max_element(probs.begin(), probs.end()) - probs.begin());
        } else {
            d.rep_index = static_cast<int>(rng.categorical(probs));
        }
    }
    return d;
}

/// One TD step on the critic over a uniform minibatch:
/// y = r + (1 - terminal) * gamma^elapsed * Q_target(s', mu_target(s'), f_x_target(s')).
/// Returns the mean squared error; gradients land in `grad`.
inline double critic_update(const CriticNet& critic, const TargetNets& targets,
                            const std::vector<const ReplayEntry*>& batch, double gamma,
                            ParamVector& grad) {
    if (batch.empty()) throw std::invalid_argument("critic_update: empty batch");
    double loss = 0.0;
    double inv = 1.0 / static_cast<double>(batch.size());
    for (const ReplayEntry* e : batch) {
        double y = e->macro_reward;
        if (!e->terminal) {
            auto a_next = targets.actor.action(e->s_next);
            std::vector<double> x_next;
            if (critic.rep_dim() > 0) x_next = targets.actor.rep_probs(e->s_next);
            y += std::pow(gamma, e->elapsed) * targets.critic.forward(e->s_next, a_next, x_next);
        }
        std::vector<double> onehot;
        if (critic.rep_dim() > 0) {
            onehot.assign(static_cast<std::size_t>(critic.rep_dim()), 0.0);
            onehot[static_cast<std::size_t>(e->rep_index)] = 1.0;
        }
        CriticNet::Cache cache;
        double q = critic.forward(e->s, e->a, onehot, cache);
        double err = q - y;
        loss += err * err * inv;
        critic.backward(cache, 2.0 * err * inv, grad);
    }
    return loss;
}

struct ActorGrads {
    ParamVector action;
    ParamVector rep;  // empty layout for singleton W
};

/// Ascent on E_s[Q(s, mu(s), f_x(s))]: critic input gradients chained
/// through both heads; returns the (negated for descent) mean Q.
inline double actor_update(const DdpgActor& actor, const CriticNet& critic,
                           const std::vector<const ReplayEntry*>& batch, ActorGrads& grad) {
    if (batch.empty()) throw std::invalid_argument("actor_update: empty batch");
    double mean_q = 0.0;
    double inv = 1.0 / static_cast<double>(batch.size());
    ParamVector scratch = ParamVector::zeros_like(critic.params());
    for (const ReplayEntry* e : batch) {
        MlpCache a_cache, x_cache;
        auto a = actor.action_net().forward(e->s, a_cache);
        std::vector<double> x;
        if (actor.has_rep_net()) x = actor.rep_net().forward(e->s, x_cache);
        CriticNet::Cache c_cache;
        mean_q += critic.forward(e->s, a, x, c_cache) * inv;
        std::vector<double> da, dx;
        critic.backward(c_cache, -inv, scratch, &da, &dx);  // descend on -Q
        actor.action_net().backward(a_cache, da, grad.action);
        if (actor.has_rep_net()) actor.rep_net().backward(x_cache, dx, grad.rep);
    }
    return -mean_q;
}

struct DdpgLogRow {
    std::uint64_t decision_step = 0;
    double mean_episode_return = 0.0;
    double mean_repetition = 0.0;
    double epsilon = 0.0;
    double critic_loss = 0.0;
};

/// Single-threaded training loop: one decision per training step, TD and
/// actor updates once the buffer can fill a batch, soft target updates
/// every step. Decision counting and the epsilon schedule share the step
/// index.
inline std::vector<DdpgLogRow> train_figar_ddpg(const DdpgConfig& cfg, Env& env, DdpgActor& actor,
                                                CriticNet& critic, std::uint64_t seed) {
    if (cfg.total_train_steps == 0) throw std::invalid_argument("train_figar_ddpg: empty budget");
    if (cfg.tau <= 0.0 || cfg.tau >= 1.0) throw std::invalid_argument("train_figar_ddpg: tau out of (0,1)");
    if (cfg.replay_capacity < static_cast<std::size_t>(cfg.batch_size)) {
        throw std::invalid_argument("train_figar_ddpg: capacity below batch size");
    }
    const RepetitionSet& W = actor.repetition_set();
    ReplayBuffer buffer(cfg.replay_capacity);
    TargetNets targets{actor, critic};

    OptimizerConfig aoc, coc;
    aoc.kind = OptKind::Adam;
    aoc.learning_rate = cfg.actor_lr;
    coc.kind = OptKind::Adam;
    coc.learning_rate = cfg.critic_lr;
    Optimizer actor_opt(aoc), critic_opt(coc);

    Rng rng(derive_seed(seed, "ddpg"));
    auto obs = env.reset();
    OuState ou_state(actor.action_space().dim);
    double episode_return = 0.0;

    std::vector<DdpgLogRow> rows;
    double win_return_sum = 0.0, win_loss_sum = 0.0, last_mean_return = 0.0;
    std::uint64_t win_episodes = 0, win_updates = 0;
    double win_rep_sum = 0.0;
    std::uint64_t win_decisions = 0;

    for (std::uint64_t step = 0; step < cfg.total_train_steps; ++step) {
        double eps = epsilon_schedule(cfg, step);
        ExploreDecision d = act_explore(actor, obs, eps, cfg.ou, ou_state, rng);
        MacroTransition t = execute_macro(env, Action::of(d.action), W.values[d.rep_index],
                                          cfg.gamma);
        episode_return += t.raw_reward;
        win_rep_sum += t.repetition;
        ++win_decisions;

        ReplayEntry e;
        e.s = t.state;
        e.a = d.action;
        e.rep_index = d.rep_index;
        e.macro_reward = t.macro_reward;
        e.elapsed = t.elapsed;
        e.s_next = t.next_state;
        e.terminal = t.terminal;
        buffer.push(std::move(e));

        obs = t.next_state;
        if (t.terminal) {
            win_return_sum += episode_return;
            ++win_episodes;
            episode_return = 0.0;
            obs = env.reset();
            ou_state = OuState(actor.action_space().dim);
        }

        if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
            std::vector<const ReplayEntry*> batch;
            batch.reserve(cfg.batch_size);
            for (int b = 0; b < cfg.batch_size; ++b) {
                batch.push_back(&buffer.at(rng.index(buffer.size())));
            }
            ParamVector cg = ParamVector::zeros_like(critic.params());
            win_loss_sum += critic_update(critic, targets, batch, cfg.gamma, cg);
            ++win_updates;
            critic_opt.apply(critic.params().values(), cg.values(), 0);

            ActorGrads ag;
            ag.action = ParamVector::zeros_like(actor.action_net().params());
            if (actor.has_rep_net()) ag.rep = ParamVector::zeros_like(actor.rep_net().params());
            actor_update(actor, critic, batch, ag);
            std::vector<double> flat = actor.action_net().params().values();
            std::vector<double> gflat = ag.action.values();
            if (actor.has_rep_net()) {
                const auto& rp = actor.rep_net().params().values();
                flat.insert(flat.end(), rp.begin(), rp.end());
                gflat.insert(gflat.end(), ag.rep.values().begin(), ag.rep.values().end());
            }
            actor_opt.apply(flat, gflat, 0);
            std::size_t na = actor.action_net().params().size();
            std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(na),
                      actor.action_net().params().values().begin());
            if (actor.has_rep_net()) {
                std::copy(flat.begin() + static_cast<std::ptrdiff_t>(na), flat.end(),
                          actor.rep_net().params().values().begin());
            }

            soft_update(targets.critic.params(), critic.params(), cfg.tau);
            soft_update(targets.actor.action_net().params(), actor.action_net().params(), cfg.tau);
            if (actor.has_rep_net()) {
                soft_update(targets.actor.rep_net().params(), actor.rep_net().params(), cfg.tau);
            }
        }

        if ((step + 1) % cfg.log_every == 0) {
            DdpgLogRow row;
            row.decision_step = step + 1;
            if (win_episodes > 0) last_mean_return = win_return_sum / static_cast<double>(win_episodes);
            row.mean_episode_return = last_mean_return;
            row.mean_repetition = win_decisions > 0 ? win_rep_sum / static_cast<double>(win_decisions) : 0.0;
            row.epsilon = eps;
            row.critic_loss = win_updates > 0 ? win_loss_sum / static_cast<double>(win_updates) : 0.0;
            rows.push_back(row);
            win_return_sum = win_loss_sum = win_rep_sum = 0.0;
            win_episodes = win_updates = win_decisions = 0;
        }
    }
    return rows;
}

/// Greedy evaluation of the deterministic actor: mean action, argmax
/// repetition; statistics mirror evaluate_policy.
inline EvalStats ddpg_evaluate(const DdpgActor& actor, Env& env, int episodes, double gamma) {
    if (episodes < 1) throw std::invalid_argument("ddpg_evaluate: episodes must be >= 1");
    const RepetitionSet& W = actor.repetition_set();
    EvalStats stats;
    double sum = 0.0, sumsq = 0.0, disc_sum = 0.0;
    long rep_sum = 0;
    int goal = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        auto obs = env.reset();
        double ret = 0.0, disc_ret = 0.0, disc = 1.0;
        while (!env.terminal()) {
            auto a = actor.action(obs);
            auto probs = actor.rep_probs(obs);
            int xi = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
            MacroTransition t = execute_macro(env, Action::of(a), W.values[xi], gamma);
            ret += t.raw_reward;
            disc_ret += disc * t.macro_reward;
            disc *= std::pow(gamma, t.elapsed);
            stats.repetitions.push_back(t.repetition);
            rep_sum += t.repetition;
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
    stats.std_return = std::sqrt(std::max(0.0, sumsq / n - (sum / n) * (sum / n)));
    stats.mean_disc_return = disc_sum / n;
    stats.mean_repetition = static_cast<double>(rep_sum) / static_cast<double>(stats.repetitions.size());
    stats.goal_rate = static_cast<double>(goal) / n;
    int w_max = std::max(30, W.values.back());
    stats.histogram = repetition_histogram(stats.repetitions, w_max);
    return stats;
}

/// Reference single-head trainer without any repetition machinery,
/// mirroring train_figar_ddpg so the W = {1} reduction is exact.
inline std::vector<DdpgLogRow> train_plain_ddpg(const DdpgConfig& cfg, Env& env, Mlp& actor,
                                                CriticNet& critic, std::uint64_t seed,
                                                const ActionSpace& space) {
    if (cfg.total_train_steps == 0) throw std::invalid_argument("train_plain_ddpg: empty budget");
    ReplayBuffer buffer(cfg.replay_capacity);
    Mlp target_actor = actor;
    CriticNet target_critic = critic;

    OptimizerConfig aoc, coc;
    aoc.kind = OptKind::Adam;
    aoc.learning_rate = cfg.actor_lr;
    coc.kind = OptKind::Adam;
    coc.learning_rate = cfg.critic_lr;
    Optimizer actor_opt(aoc), critic_opt(coc);

    Rng rng(derive_seed(seed, "ddpg"));
    auto obs = env.reset();
    OuState ou_state(space.dim);
    double episode_return = 0.0;

    std::vector<DdpgLogRow> rows;
    double win_return_sum = 0.0, win_loss_sum = 0.0, last_mean_return = 0.0;
    std::uint64_t win_episodes = 0, win_updates = 0, win_decisions = 0;

    for (std::uint64_t step = 0; step < cfg.total_train_steps; ++step) {
        auto a = actor.forward(obs);
        for (std::size_t i = 0; i < a.size(); ++i) {
            ou_state.n[i] += cfg.ou.theta * (cfg.ou.mu - ou_state.n[i]) + cfg.ou.sigma * rng.normal();
            a[i] = std::clamp(a[i] + ou_state.n[i], space.lo[i], space.hi[i]);
        }
        MacroTransition t = execute_macro(env, Action::of(a), 1, cfg.gamma);
        episode_return += t.raw_reward;
        ++win_decisions;

        ReplayEntry e;
        e.s = t.state;
        e.a = a;
        e.macro_reward = t.macro_reward;
        e.elapsed = t.elapsed;
        e.s_next = t.next_state;
        e.terminal = t.terminal;
        buffer.push(std::move(e));

        obs = t.next_state;
        if (t.terminal) {
            win_return_sum += episode_return;
            ++win_episodes;
            episode_return = 0.0;
            obs = env.reset();
            ou_state = OuState(space.dim);
        }

        if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
            std::vector<const ReplayEntry*> batch;
            batch.reserve(cfg.batch_size);
            for (int b = 0; b < cfg.batch_size; ++b) {
                batch.push_back(&buffer.at(rng.index(buffer.size())));
            }
            // critic TD step, target y = r + (1 - term) gamma Q_target
            ParamVector cg = ParamVector::zeros_like(critic.params());
            double loss = 0.0;
            double inv = 1.0 / static_cast<double>(batch.size());
            for (const ReplayEntry* en : batch) {
                double y = en->macro_reward;
                if (!en->terminal) {
                    auto an = target_actor.forward(en->s_next);
                    y += std::pow(cfg.gamma, en->elapsed) * target_critic.forward(en->s_next, an, {});
                }
                CriticNet::Cache cache;
                double q = critic.forward(en->s, en->a, {}, cache);
                double err = q - y;
                loss += err * err * inv;
                critic.backward(cache, 2.0 * err * inv, cg);
            }
            win_loss_sum += loss;
            ++win_updates;
            critic_opt.apply(critic.params().values(), cg.values(), 0);

            ParamVector ag = ParamVector::zeros_like(actor.params());
            ParamVector scratch = ParamVector::zeros_like(critic.params());
            for (const ReplayEntry* en : batch) {
                MlpCache a_cache;
                auto av = actor.forward(en->s, a_cache);
                CriticNet::Cache c_cache;
                critic.forward(en->s, av, {}, c_cache);
                std::vector<double> da;
                critic.backward(c_cache, -inv, scratch, &da);
                actor.backward(a_cache, da, ag);
            }
            actor_opt.apply(actor.params().values(), ag.values(), 0);

            soft_update(target_critic.params(), critic.params(), cfg.tau);
            soft_update(target_actor.params(), actor.params(), cfg.tau);
        }

        if ((step + 1) % cfg.log_every == 0) {
            DdpgLogRow row;
            row.decision_step = step + 1;
            if (win_episodes > 0) last_mean_return = win_return_sum / static_cast<double>(win_episodes);
            row.mean_episode_return = last_mean_return;
            row.mean_repetition = 1.0;
            row.epsilon = epsilon_schedule(cfg, step);
            row.critic_loss = win_updates > 0 ? win_loss_sum / static_cast<double>(win_updates) : 0.0;
            rows.push_back(row);
            win_return_sum = win_loss_sum = 0.0;
            win_episodes = win_updates = win_decisions = 0;
        }
    }
    return rows;
}

}  // namespace figar
