#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "figar/env.hpp"
#include "figar/gaussian.hpp"
#include "figar/mlp.hpp"
#include "figar/policy.hpp"
#include "figar/rng.hpp"

namespace figar {

struct TrpoConfig {
    double beta_ar = 1.28;       // repetition-factor coupling in the surrogate
    double beta_kl = 0.64;       // repetition weight in the combined KL (0.16 shared trunk)
    double delta = 0.01;         // KL radius
    int cg_iters = 10;
    double cg_damping = 0.1;
    double backtrack_ratio = 0.5;
    int max_backtracks = 10;
    int improvement_steps = 500;
    int k_min = 5;               // episodes per batch at the highest observed return
    int k_max = 50;              // episodes per batch at the lowest observed return
    double gamma = 0.99;
    double fvp_eps = 1e-5;       // finite-difference step for Fisher-vector products
};

/// Frozen single-path batch: decisions under the behavioral policy with
/// empirical SMDP-discounted returns-to-go as Q estimates.
struct SurrogateBatch {
    std::vector<std::vector<double>> states;
    std::vector<Action> actions;
    std::vector<int> repetition_indices;
    std::vector<double> q_hat;
    std::vector<double> old_logprob_a;
    std::vector<double> old_logprob_x;
    std::vector<std::vector<double>> old_action_probs;  // discrete heads
    std::vector<DiagGaussian> old_dists;                // continuous heads
    std::vector<std::vector<double>> old_rep_probs;
    double mean_return = 0.0;    // raw episodic return, for the K schedule
    double mean_repetition = 0.0;
    int episodes = 0;

    std::size_t size() const { return states.size(); }
};

struct TrustRegionStep {
    std::vector<double> search_direction;
    double full_step_size = 0.0;
    double accepted_fraction = 0.0;  // 0 on rejection
    double kl_after = 0.0;
    double max_kl_after = 0.0;       // monitoring only
    double surrogate_before = 0.0;
    double surrogate_after = 0.0;
    bool accepted = false;
    bool used_additive = false;
};

/// Linear K schedule over the observed return range: the better the
/// previous batch, the fewer episodes the next one samples.
inline int k_schedule(double prev_return, double lo, double hi, int k_min, int k_max) {
    if (k_min < 1 || k_max < k_min) throw std::invalid_argument("k_schedule: bad K bounds");
    if (!(hi > lo)) return k_max;
    double t = std::clamp((prev_return - lo) / (hi - lo), 0.0, 1.0);
    return static_cast<int>(std::lround(k_max - t * (k_max - k_min)));
}

/// Rolls out `episodes` episodes under the current policy and freezes the
/// head distributions plus empirical Q values.
inline SurrogateBatch gather_batch(const FactoredPolicy& policy, Env& env, int episodes,
                                   double gamma, Rng& rng) {
    if (episodes < 1) throw std::invalid_argument("gather_batch: episodes must be >= 1");
    const RepetitionSet& W = policy.repetition_set();
    SurrogateBatch batch;
    double return_sum = 0.0;
    long rep_sum = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        auto obs = env.reset();
        std::vector<std::size_t> indices;
        std::vector<double> rewards;
        std::vector<int> elapsed;
        double raw = 0.0;
        while (!env.terminal()) {
            PolicyEval ev = policy.evaluate(obs);
            Action action;
            double lpa;
            if (policy.is_discrete()) {
                int a = static_cast<int>(rng.categorical(ev.action_probs));
                action = Action::of(a);
                lpa = std::log(ev.action_probs[a]);
                batch.old_action_probs.push_back(ev.action_probs);
            } else {
                auto a = ev.dist.sample(rng);
                lpa = ev.dist.logprob(a);
                action = Action::of(std::move(a));
                batch.old_dists.push_back(ev.dist);
            }
            int xi = W.size() == 1 ? 0 : static_cast<int>(rng.categorical(ev.rep_probs));

            MacroTransition t = execute_macro(env, action, W.values[xi], gamma);
            indices.push_back(batch.states.size());
            batch.states.push_back(t.state);
            batch.actions.push_back(action);
            batch.repetition_indices.push_back(xi);
            batch.old_logprob_a.push_back(lpa);
            batch.old_logprob_x.push_back(W.size() == 1 ? 0.0 : std::log(ev.rep_probs[xi]));
            batch.old_rep_probs.push_back(ev.rep_probs);
            rewards.push_back(t.macro_reward);
            elapsed.push_back(t.elapsed);
            raw += t.raw_reward;
            rep_sum += t.repetition;
            obs = t.next_state;
        }
        // SMDP return-to-go: q_j = r_j + gamma^elapsed_j * q_{j+1}
        double q = 0.0;
        batch.q_hat.resize(batch.states.size());
        for (std::size_t j = indices.size(); j-- > 0;) {
            q = rewards[j] + std::pow(gamma, elapsed[j]) * q;
            batch.q_hat[indices[j]] = q;
        }
        return_sum += raw;
    }
    batch.episodes = episodes;
    batch.mean_return = return_sum / episodes;
    batch.mean_repetition = static_cast<double>(rep_sum) / static_cast<double>(batch.size());
    return batch;
}

/// Product surrogate L_a * L_x^beta_ar where each factor is the
/// importance-ratio-weighted mean Q of one head. Falls back to the
/// additive form L_a + beta_ar * L_x when a factor is non-positive, and a
/// singleton repetition set drops the constant L_x factor entirely so the
/// update reduces to single-factor trust-region optimization.
inline double factored_surrogate(const FactoredPolicy& policy, const SurrogateBatch& batch,
                                 double beta_ar, PolicyGrad* grad = nullptr,
                                 bool* used_additive = nullptr) {
    if (beta_ar <= 0.0) throw std::invalid_argument("factored_surrogate: beta_ar must be positive");
    if (batch.size() == 0) throw std::invalid_argument("factored_surrogate: empty batch");
    const std::size_t N = batch.size();
    const bool singleton = policy.repetition_set().size() == 1;
    const double inv = 1.0 / static_cast<double>(N);

    std::vector<PolicyEval> evals;
    std::vector<double> ratio_a(N), ratio_x(N);
    double la = 0.0, lx = 0.0;
    evals.reserve(grad ? N : 0);
    for (std::size_t j = 0; j < N; ++j) {
        PolicyEval ev = policy.evaluate(batch.states[j]);
        double lpa = policy.is_discrete()
                         ? std::log(ev.action_probs[batch.actions[j].discrete])
                         : ev.dist.logprob(batch.actions[j].continuous);
        ratio_a[j] = std::exp(lpa - batch.old_logprob_a[j]);
        la += ratio_a[j] * batch.q_hat[j] * inv;
        if (!singleton) {
            double lpx = std::log(ev.rep_probs[batch.repetition_indices[j]]);
            ratio_x[j] = std::exp(lpx - batch.old_logprob_x[j]);
            lx += ratio_x[j] * batch.q_hat[j] * inv;
        }
        if (grad) evals.push_back(std::move(ev));
    }

    if (singleton) {
        if (used_additive) *used_additive = true;
        if (grad) {
            for (std::size_t j = 0; j < N; ++j) {
                policy.accumulate_logprob_a_grad(evals[j], batch.actions[j],
                                                 ratio_a[j] * batch.q_hat[j] * inv, *grad);
            }
        }
        return la;
    }

    const bool product_ok = la > 0.0 && lx > 0.0;
    if (used_additive) *used_additive = !product_ok;
    double ca, cx, value;
    if (product_ok) {
        value = la * std::pow(lx, beta_ar);
        ca = std::pow(lx, beta_ar);
        cx = beta_ar * la * std::pow(lx, beta_ar - 1.0);
    } else {
        value = la + beta_ar * lx;
        ca = 1.0;
        cx = beta_ar;
    }
    if (grad) {
        for (std::size_t j = 0; j < N; ++j) {
            policy.accumulate_logprob_a_grad(evals[j], batch.actions[j],
                                             ca * ratio_a[j] * batch.q_hat[j] * inv, *grad);
            policy.accumulate_logprob_x_grad(evals[j], batch.repetition_indices[j],
                                             cx * ratio_x[j] * batch.q_hat[j] * inv, *grad);
        }
    }
    return value;
}

/// Mean over batch states of KL(old_a || new_a) + beta_kl * KL(old_x || new_x).
/// max_out, when given, receives the maximum per-state combined KL.
inline double combined_kl(const FactoredPolicy& policy, const SurrogateBatch& batch,
                          double beta_kl, double* max_out = nullptr) {
    if (batch.size() == 0) throw std::invalid_argument("combined_kl: empty batch");
    double sum = 0.0, worst = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        PolicyEval ev = policy.evaluate(batch.states[j]);
        double ka = policy.is_discrete() ? categorical_kl(batch.old_action_probs[j], ev.action_probs)
                                         : DiagGaussian::kl(batch.old_dists[j], ev.dist);
        double kx = categorical_kl(batch.old_rep_probs[j], ev.rep_probs);
        double k = ka + beta_kl * kx;
        sum += k;
        worst = std::max(worst, k);
    }
    if (max_out) *max_out = worst;
    return sum / static_cast<double>(batch.size());
}

/// Analytic gradient of combined_kl with respect to the policy parameters,
/// as a flat vector in the policy's flatten() order.
inline std::vector<double> combined_kl_grad(const FactoredPolicy& policy,
                                            const SurrogateBatch& batch, double beta_kl) {
    if (batch.size() == 0) throw std::invalid_argument("combined_kl_grad: empty batch");
    PolicyGrad grad = policy.zero_grad();
    double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
        PolicyEval ev = policy.evaluate(batch.states[j]);
        std::vector<double> up_a, up_ls;
        if (policy.is_discrete()) {
            // d KL(p_old || p) / d p_i = -p_old_i / p_i
            up_a.resize(ev.action_probs.size());
            for (std::size_t i = 0; i < up_a.size(); ++i) {
                up_a[i] = -inv * batch.old_action_probs[j][i] / ev.action_probs[i];
            }
        } else {
            std::vector<double> dm, dls;
            DiagGaussian::kl_grad(batch.old_dists[j], ev.dist, dm, dls);
            up_a = std::move(dm);
            for (double& v : up_a) v *= inv;
            up_ls = std::move(dls);
            for (double& v : up_ls) v *= inv;
        }
        std::vector<double> up_x(ev.rep_probs.size());
        for (std::size_t i = 0; i < up_x.size(); ++i) {
            up_x[i] = -inv * beta_kl * batch.old_rep_probs[j][i] / ev.rep_probs[i];
        }
        policy.backprop(ev, up_a, up_x, up_ls, grad);
    }
    return policy.flatten_grad(grad);
}

/// Conjugate gradient solve of A x = b for a positive-definite operator.
inline std::vector<double> conjugate_gradient(
    const std::function<std::vector<double>(const std::vector<double>&)>& A,
    const std::vector<double>& b, int iters, double residual_tol = 1e-10) {
    std::vector<double> x(b.size(), 0.0);
    std::vector<double> r = b;
    std::vector<double> p = b;
    double rr = 0.0;
    for (double v : r) rr += v * v;
    for (int it = 0; it < iters; ++it) {
        if (rr < residual_tol) break;
        std::vector<double> Ap = A(p);
        double pAp = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) pAp += p[i] * Ap[i];
        if (pAp <= 0.0) break;
        double alpha = rr / pAp;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        double rr_new = 0.0;
        for (double v : r) rr_new += v * v;
        double beta = rr_new / rr;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        rr = rr_new;
    }
    return x;
}

/// Fisher-vector product via central finite differences of the analytic
/// combined-KL gradient, plus damping.
inline std::vector<double> fisher_vector_product(FactoredPolicy& policy,
                                                 const std::vector<double>& theta,
                                                 const SurrogateBatch& batch, double beta_kl,
                                                 double damping, double eps,
                                                 const std::vector<double>& v) {
    std::vector<double> plus = theta, minus = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        plus[i] += eps * v[i];
        minus[i] -= eps * v[i];
    }
    policy.unflatten(plus);
    std::vector<double> gp = combined_kl_grad(policy, batch, beta_kl);
    policy.unflatten(minus);
    std::vector<double> gm = combined_kl_grad(policy, batch, beta_kl);
    policy.unflatten(theta);
    std::vector<double> out(theta.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (gp[i] - gm[i]) / (2.0 * eps) + damping * v[i];
    }
    return out;
}

/// One constrained policy improvement: natural-gradient direction by CG,
/// step scaled to the delta boundary, backtracking until the combined KL
/// fits and the surrogate does not decrease. Rejection leaves the policy
/// unchanged.
inline TrustRegionStep trust_region_update(FactoredPolicy& policy, const SurrogateBatch& batch,
                                           const TrpoConfig& cfg) {
    TrustRegionStep step;
    PolicyGrad pg = policy.zero_grad();
    step.surrogate_before = factored_surrogate(policy, batch, cfg.beta_ar, &pg, &step.used_additive);
    std::vector<double> g = policy.flatten_grad(pg);
    double gnorm2 = 0.0;
    for (double v : g) {
        if (!std::isfinite(v)) throw std::runtime_error("trust_region_update: non-finite gradient");
        gnorm2 += v * v;
    }
    step.surrogate_after = step.surrogate_before;
    step.search_direction.assign(g.size(), 0.0);
    if (gnorm2 == 0.0) {
        step.accepted = true;  // nothing to do, trivially inside the region
        return step;
    }

    std::vector<double> theta = policy.flatten();
    auto fvp = [&](const std::vector<double>& v) {
        return fisher_vector_product(policy, theta, batch, cfg.beta_kl, cfg.cg_damping,
                                     cfg.fvp_eps, v);
    };
    std::vector<double> d = conjugate_gradient(fvp, g, cfg.cg_iters);
    std::vector<double> Hd = fvp(d);
    double dHd = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) dHd += d[i] * Hd[i];
    if (dHd <= 0.0) return step;  // degenerate curvature, reject

    step.search_direction = d;
    step.full_step_size = std::sqrt(2.0 * cfg.delta / dHd);

    double frac = 1.0;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt, frac *= cfg.backtrack_ratio) {
        std::vector<double> cand = theta;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            cand[i] += frac * step.full_step_size * d[i];
        }
        policy.unflatten(cand);
        double kl = combined_kl(policy, batch, cfg.beta_kl, &step.max_kl_after);
        double surr = factored_surrogate(policy, batch, cfg.beta_ar);
        if (kl <= cfg.delta && surr >= step.surrogate_before) {
            step.accepted = true;
            step.accepted_fraction = frac;
            step.kl_after = kl;
            step.surrogate_after = surr;
            return step;
        }
    }
    policy.unflatten(theta);  // reject: zero step
    step.kl_after = 0.0;
    step.max_kl_after = 0.0;
    return step;
}

/// Index of the best average return seen during training.
inline std::size_t track_best_policy(const std::vector<double>& avg_returns) {
    if (avg_returns.empty()) throw std::invalid_argument("track_best_policy: empty history");
    return static_cast<std::size_t>(
        std::max_element(avg_returns.begin(), avg_returns.end()) - avg_returns.begin());
}

struct TrpoLogRow {
    int step = 0;
    double mean_return = 0.0;
    double mean_repetition = 0.0;
    int batch_episodes = 0;
    double kl_after = 0.0;
    double surrogate_before = 0.0;
    double surrogate_after = 0.0;
    bool accepted = false;
};

struct TrpoResult {
    std::vector<TrpoLogRow> log;
    std::vector<double> best_params;  // flat snapshot at the best mean return
    double best_return = -std::numeric_limits<double>::infinity();
    int rejected_steps = 0;
};

/// Batch-and-improve loop with the return-linear K schedule; keeps the
/// parameter snapshot with the best training-phase mean return.
inline TrpoResult train_figar_trpo(const TrpoConfig& cfg, Env& env, FactoredPolicy& policy,
                                   std::uint64_t seed) {
    if (cfg.improvement_steps < 1) throw std::invalid_argument("train_figar_trpo: no steps");
    Rng rng(derive_seed(seed, "trpo-batch"));
    TrpoResult result;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    int k = cfg.k_max;
    for (int step = 0; step < cfg.improvement_steps; ++step) {
        SurrogateBatch batch = gather_batch(policy, env, k, cfg.gamma, rng);
        lo = std::min(lo, batch.mean_return);
        hi = std::max(hi, batch.mean_return);
        k = k_schedule(batch.mean_return, lo, hi, cfg.k_min, cfg.k_max);

        if (batch.mean_return > result.best_return) {
            result.best_return = batch.mean_return;
            result.best_params = policy.flatten();
        }

        TrustRegionStep tr = trust_region_update(policy, batch, cfg);
        if (!tr.accepted) ++result.rejected_steps;

        TrpoLogRow row;
        row.step = step;
        row.mean_return = batch.mean_return;
        row.mean_repetition = batch.mean_repetition;
        row.batch_episodes = batch.episodes;
        row.kl_after = tr.kl_after;
        row.surrogate_before = tr.surrogate_before;
        row.surrogate_after = tr.surrogate_after;
        row.accepted = tr.accepted;
        result.log.push_back(row);
    }
    return result;
}

// Reference single-factor trust-region trainer over an action-only softmax
// network, mirroring the factored trainer operation for operation so the
// W = {1} reduction is exact.
namespace plain_trpo {

struct Batch {
    std::vector<std::vector<double>> states;
    std::vector<int> actions;
    std::vector<double> q_hat;
    std::vector<double> old_logprob;
    std::vector<std::vector<double>> old_probs;
    double mean_return = 0.0;
    int episodes = 0;
    std::size_t size() const { return states.size(); }
};

inline Batch gather(const Mlp& actor, Env& env, int episodes, double gamma, Rng& rng) {
    Batch batch;
    double return_sum = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        auto obs = env.reset();
        std::vector<std::size_t> indices;
        std::vector<double> rewards;
        std::vector<int> elapsed;
        double raw = 0.0;
        while (!env.terminal()) {
            auto probs = actor.forward(obs);
            int a = static_cast<int>(rng.categorical(probs));
            MacroTransition t = execute_macro(env, Action::of(a), 1, gamma);
            indices.push_back(batch.states.size());
            batch.states.push_back(t.state);
            batch.actions.push_back(a);
            batch.old_logprob.push_back(std::log(probs[a]));
            batch.old_probs.push_back(probs);
            rewards.push_back(t.macro_reward);
            elapsed.push_back(t.elapsed);
            raw += t.raw_reward;
            obs = t.next_state;
        }
        double q = 0.0;
        batch.q_hat.resize(batch.states.size());
        for (std::size_t j = indices.size(); j-- > 0;) {
            q = rewards[j] + std::pow(gamma, elapsed[j]) * q;
            batch.q_hat[indices[j]] = q;
        }
        return_sum += raw;
    }
    batch.episodes = episodes;
    batch.mean_return = return_sum / episodes;
    return batch;
}

inline double surrogate(const Mlp& actor, const Batch& batch, ParamVector* grad = nullptr) {
    double inv = 1.0 / static_cast<double>(batch.size());
    double value = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        MlpCache cache;
        auto probs = actor.forward(batch.states[j], cache);
        double ratio = std::exp(std::log(probs[batch.actions[j]]) - batch.old_logprob[j]);
        value += ratio * batch.q_hat[j] * inv;
        if (grad) {
            std::vector<double> up(probs.size(), 0.0);
            up[batch.actions[j]] = ratio * batch.q_hat[j] * inv / probs[batch.actions[j]];
            actor.backward(cache, up, *grad);
        }
    }
    return value;
}

inline double kl(const Mlp& actor, const Batch& batch) {
    double sum = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        sum += categorical_kl(batch.old_probs[j], actor.forward(batch.states[j]));
    }
    return sum / static_cast<double>(batch.size());
}

inline std::vector<double> kl_grad(const Mlp& actor, const Batch& batch) {
    ParamVector grad = ParamVector::zeros_like(actor.params());
    double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
        MlpCache cache;
        auto probs = actor.forward(batch.states[j], cache);
        std::vector<double> up(probs.size());
        for (std::size_t i = 0; i < up.size(); ++i) {
            up[i] = -inv * batch.old_probs[j][i] / probs[i];
        }
        actor.backward(cache, up, grad);
    }
    return grad.values();
}

inline bool update(Mlp& actor, const Batch& batch, const TrpoConfig& cfg) {
    ParamVector pg = ParamVector::zeros_like(actor.params());
    double before = surrogate(actor, batch, &pg);
    std::vector<double> g = pg.values();
    double gnorm2 = 0.0;
    for (double v : g) {
        if (!std::isfinite(v)) throw std::runtime_error("plain_trpo::update: non-finite gradient");
        gnorm2 += v * v;
    }
    if (gnorm2 == 0.0) return true;

    std::vector<double> theta = actor.params().values();
    auto fvp = [&](const std::vector<double>& v) {
        std::vector<double> plus = theta, minus = theta;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            plus[i] += cfg.fvp_eps * v[i];
            minus[i] -= cfg.fvp_eps * v[i];
        }
        actor.params().values() = plus;
        auto gp = kl_grad(actor, batch);
        actor.params().values() = minus;
        auto gm = kl_grad(actor, batch);
        actor.params().values() = theta;
        std::vector<double> out(theta.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = (gp[i] - gm[i]) / (2.0 * cfg.fvp_eps) + cfg.cg_damping * v[i];
        }
        return out;
    };
    std::vector<double> d = conjugate_gradient(fvp, g, cfg.cg_iters);
    std::vector<double> Hd = fvp(d);
    double dHd = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) dHd += d[i] * Hd[i];
    if (dHd <= 0.0) return false;
    double full = std::sqrt(2.0 * cfg.delta / dHd);

    double frac = 1.0;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt, frac *= cfg.backtrack_ratio) {
        std::vector<double> cand = theta;
        for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += frac * full * d[i];
        actor.params().values() = cand;
        if (kl(actor, batch) <= cfg.delta && surrogate(actor, batch) >= before) return true;
    }
    actor.params().values() = theta;
    return false;
}

}  // namespace plain_trpo

inline TrpoResult train_plain_trpo(const TrpoConfig& cfg, Env& env, Mlp& actor,
                                   std::uint64_t seed) {
    if (cfg.improvement_steps < 1) throw std::invalid_argument("train_plain_trpo: no steps");
    Rng rng(derive_seed(seed, "trpo-batch"));
    TrpoResult result;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    int k = cfg.k_max;
    for (int step = 0; step < cfg.improvement_steps; ++step) {
        auto batch = plain_trpo::gather(actor, env, k, cfg.gamma, rng);
        lo = std::min(lo, batch.mean_return);
        hi = std::max(hi, batch.mean_return);
        k = k_schedule(batch.mean_return, lo, hi, cfg.k_min, cfg.k_max);

        if (batch.mean_return > result.best_return) {
            result.best_return = batch.mean_return;
            result.best_params = actor.params().values();
        }
        bool accepted = plain_trpo::update(actor, batch, cfg);
        if (!accepted) ++result.rejected_steps;

        TrpoLogRow row;
        row.step = step;
        row.mean_return = batch.mean_return;
        row.mean_repetition = 1.0;
        row.batch_episodes = batch.episodes;
        row.accepted = accepted;
        result.log.push_back(row);
    }
    return result;
}

}  // namespace figar
