#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "figar/env.hpp"
#include "figar/gaussian.hpp"
#include "figar/mlp.hpp"
#include "figar/param.hpp"
#include "figar/repetition.hpp"
#include "figar/rng.hpp"

namespace figar {

struct SamplingMode {
    enum class Kind { Stochastic, EpsGreedy, Greedy };
    Kind kind = Kind::Stochastic;
    double eps = 0.0;

    static SamplingMode stochastic() { return {Kind::Stochastic, 0.0}; }
    static SamplingMode greedy() { return {Kind::Greedy, 0.0}; }
    static SamplingMode eps_greedy(double eps) {
        if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("SamplingMode: eps out of [0,1]");
        return {Kind::EpsGreedy, eps};
    }
};

/// One (action, repetition) selection with exact log-probabilities under
/// the unmodified heads.
struct Decision {
    Action action;
    int repetition = 1;
    int repetition_index = 0;
    double logprob_a = 0.0;
    double logprob_x = 0.0;
    std::vector<double> action_probs;      // discrete snapshot
    DiagGaussian action_dist;              // continuous snapshot
    std::vector<double> repetition_probs;  // snapshot over W
};

/// Gradient holder matching a FactoredPolicy's parameter blocks.
struct PolicyGrad {
    ParamVector trunk;
    ParamVector action;
    ParamVector rep;
    ParamVector log_std;

    void fill(double v) {
        trunk.fill(v);
        action.fill(v);
        rep.fill(v);
        log_std.fill(v);
    }
};

/// Forward-pass snapshot of both heads for one observation.
struct PolicyEval {
    MlpCache trunk_cache;
    MlpCache action_cache;
    MlpCache rep_cache;
    std::vector<double> features;
    std::vector<double> action_probs;   // discrete
    DiagGaussian dist;                  // continuous
    std::vector<double> rep_probs;
};

/// FiGAR factored policy: an action head and a repetition head over W,
/// optionally fed by a shared trunk. Heads are independent distributions;
/// the joint log-probability is the sum of the head log-probabilities.
class FactoredPolicy {
public:
    FactoredPolicy() = default;

    static FactoredPolicy discrete(int obs_dim, int num_actions, RepetitionSet w,
                                   const std::vector<int>& hidden, Activation act,
                                   bool shared_trunk) {
        FactoredPolicy p;
        p.space_ = ActionSpace::discrete(num_actions);
        p.W_ = std::move(w);
        p.build(obs_dim, num_actions, hidden, act, shared_trunk, OutputTransform::Softmax);
        return p;
    }

    static FactoredPolicy continuous(int obs_dim, const ActionSpace& space, RepetitionSet w,
                                     const std::vector<int>& hidden, Activation act,
                                     bool shared_trunk, double init_log_std = -1.0) {
        if (space.kind != ActionSpace::Kind::Continuous) {
            throw std::invalid_argument("FactoredPolicy::continuous: need a continuous space");
        }
        FactoredPolicy p;
        p.space_ = space;
        p.W_ = std::move(w);
        p.build(obs_dim, space.dim, hidden, act, shared_trunk, OutputTransform::BoundedTanh);
        p.action_head_.set_bounds(space.lo, space.hi);
        auto seg = p.log_std_.add_segment("log_std", {static_cast<std::size_t>(space.dim)});
        for (double& v : seg) v = init_log_std;
        return p;
    }

    /// Seeds each component from its own derived stream so that a policy
    /// without one component initializes the others identically.
    void init(std::uint64_t master_seed) {
        if (trunk_) {
            Rng r(derive_seed(master_seed, "trunk"));
            trunk_->init(r);
        }
        {
            Rng r(derive_seed(master_seed, "action"));
            action_head_.init(r, 0.01);
        }
        {
            Rng r(derive_seed(master_seed, "repetition"));
            rep_head_.init(r, 0.01);
        }
    }

    bool is_discrete() const { return space_.kind == ActionSpace::Kind::Discrete; }
    const ActionSpace& action_space() const { return space_; }
    const RepetitionSet& repetition_set() const { return W_; }
    bool has_trunk() const { return trunk_.has_value(); }

    Mlp& action_head() { return action_head_; }
    Mlp& repetition_head() { return rep_head_; }
    Mlp& trunk() { return *trunk_; }
    const Mlp& action_head() const { return action_head_; }
    const Mlp& repetition_head() const { return rep_head_; }
    const Mlp& trunk() const { return *trunk_; }
    ParamVector& log_std_params() { return log_std_; }
    const ParamVector& log_std_params() const { return log_std_; }

    PolicyEval evaluate(std::span<const double> obs) const {
        PolicyEval ev;
        if (trunk_) {
            ev.features = trunk_->forward(obs, ev.trunk_cache);
        } else {
            ev.features.assign(obs.begin(), obs.end());
        }
        if (is_discrete()) {
            ev.action_probs = action_head_.forward(ev.features, ev.action_cache);
        } else {
            ev.dist.mean = action_head_.forward(ev.features, ev.action_cache);
            auto ls = log_std_.segment("log_std");
            ev.dist.log_std.assign(ls.begin(), ls.end());
        }
        ev.rep_probs = rep_head_.forward(ev.features, ev.rep_cache);
        return ev;
    }

    Decision decide(std::span<const double> obs, SamplingMode mode, Rng& rng) const {
        PolicyEval ev = evaluate(obs);
        for (double p : ev.rep_probs) {
            if (!std::isfinite(p)) throw std::runtime_error("FactoredPolicy: non-finite head output");
        }
        Decision d;
        // action
        if (is_discrete()) {
            std::size_t a = 0;
            switch (mode.kind) {
                case SamplingMode::Kind::Stochastic:
                    a = rng.categorical(ev.action_probs);
                    break;
                case SamplingMode::Kind::Greedy:
                    a = argmax(ev.action_probs);
                    break;
                case SamplingMode::Kind::EpsGreedy:
                    a = (rng.uniform() < mode.eps) ? rng.categorical(ev.action_probs)
                                                   : argmax(ev.action_probs);
                    break;
            }
            d.action = Action::of(static_cast<int>(a));
            d.logprob_a = std::log(ev.action_probs[a]);
            d.action_probs = ev.action_probs;
        } else {
            std::vector<double> a;
            switch (mode.kind) {
                case SamplingMode::Kind::Stochastic:
                    a = ev.dist.sample(rng);
                    break;
                case SamplingMode::Kind::Greedy:
                    a = ev.dist.mean;
                    break;
                case SamplingMode::Kind::EpsGreedy:
                    a = (rng.uniform() < mode.eps) ? ev.dist.sample(rng) : ev.dist.mean;
                    break;
            }
            d.logprob_a = ev.dist.logprob(a);
            d.action = Action::of(std::move(a));
            d.action_dist = ev.dist;
        }
        // repetition: a singleton W is deterministic and consumes no randomness
        if (W_.size() == 1) {
            d.repetition_index = 0;
        } else {
            switch (mode.kind) {
                case SamplingMode::Kind::Stochastic:
                    d.repetition_index = static_cast<int>(rng.categorical(ev.rep_probs));
                    break;
                case SamplingMode::Kind::Greedy:
                    d.repetition_index = static_cast<int>(argmax(ev.rep_probs));
                    break;
                case SamplingMode::Kind::EpsGreedy:
                    d.repetition_index = (rng.uniform() < mode.eps)
                                             ? static_cast<int>(rng.categorical(ev.rep_probs))
                                             : static_cast<int>(argmax(ev.rep_probs));
                    break;
            }
        }
        d.repetition = W_.values[d.repetition_index];
        d.logprob_x = (W_.size() == 1) ? 0.0 : std::log(ev.rep_probs[d.repetition_index]);
        d.repetition_probs = ev.rep_probs;
        return d;
    }

    /// Exact factored log-probabilities of (a, x) at obs.
    std::pair<double, double> joint_logprob(std::span<const double> obs, const Action& a,
                                            int x) const {
        PolicyEval ev = evaluate(obs);
        double la;
        if (is_discrete()) {
            la = std::log(ev.action_probs.at(a.discrete));
        } else {
            la = ev.dist.logprob(a.continuous);
        }
        int idx = W_.index_of(x);
        double lx = (W_.size() == 1) ? 0.0 : std::log(ev.rep_probs[idx]);
        return {la, lx};
    }

    /// (H_a, H_x) at obs.
    std::pair<double, double> entropy(std::span<const double> obs) const {
        PolicyEval ev = evaluate(obs);
        double ha = is_discrete() ? categorical_entropy(ev.action_probs) : ev.dist.entropy();
        double hx = categorical_entropy(ev.rep_probs);
        return {ha, hx};
    }

    PolicyGrad zero_grad() const {
        PolicyGrad g;
        if (trunk_) g.trunk = ParamVector::zeros_like(trunk_->params());
        g.action = ParamVector::zeros_like(action_head_.params());
        g.rep = ParamVector::zeros_like(rep_head_.params());
        if (!is_discrete()) g.log_std = ParamVector::zeros_like(log_std_);
        return g;
    }

    /// Chain upstream gradients on the head outputs (and log_std) back
    /// through heads and the shared trunk into `grad`.
    /// upstream_action is dL/d(action head output): probabilities for a
    /// discrete head, the bounded mean for a continuous one. upstream_rep
    /// is dL/d(repetition probabilities). Either may be empty to skip.
    void backprop(const PolicyEval& ev, std::span<const double> upstream_action,
                  std::span<const double> upstream_rep,
                  std::span<const double> upstream_log_std, PolicyGrad& grad) const {
        std::vector<double> feat_grad(ev.features.size(), 0.0);
        if (!upstream_action.empty()) {
            auto g = action_head_.backward(ev.action_cache, upstream_action, grad.action);
            for (std::size_t i = 0; i < feat_grad.size(); ++i) feat_grad[i] += g[i];
        }
        if (!upstream_rep.empty()) {
            auto g = rep_head_.backward(ev.rep_cache, upstream_rep, grad.rep);
            for (std::size_t i = 0; i < feat_grad.size(); ++i) feat_grad[i] += g[i];
        }
        if (!upstream_log_std.empty()) {
            auto seg = grad.log_std.segment("log_std");
            for (std::size_t i = 0; i < seg.size(); ++i) seg[i] += upstream_log_std[i];
        }
        if (trunk_ && (!upstream_action.empty() || !upstream_rep.empty())) {
            trunk_->backward(ev.trunk_cache, feat_grad, grad.trunk);
        }
    }

    /// Accumulates coeff * d(log pi_a(a|s))/dtheta into grad.
    void accumulate_logprob_a_grad(const PolicyEval& ev, const Action& a, double coeff,
                                   PolicyGrad& grad) const {
        if (is_discrete()) {
            std::vector<double> up(ev.action_probs.size(), 0.0);
            up[a.discrete] = coeff / ev.action_probs[a.discrete];
            backprop(ev, up, {}, {}, grad);
        } else {
            auto gm = ev.dist.logprob_grad_mean(a.continuous);
            auto gs = ev.dist.logprob_grad_log_std(a.continuous);
            for (double& v : gm) v *= coeff;
            for (double& v : gs) v *= coeff;
            backprop(ev, gm, {}, gs, grad);
        }
    }

    /// Accumulates coeff * d(log pi_x(x|s))/dtheta into grad.
    /// Exactly zero for a singleton W.
    void accumulate_logprob_x_grad(const PolicyEval& ev, int rep_index, double coeff,
                                   PolicyGrad& grad) const {
        std::vector<double> up(ev.rep_probs.size(), 0.0);
        up[rep_index] = coeff / ev.rep_probs[rep_index];
        backprop(ev, {}, up, {}, grad);
    }

    /// Accumulates coeff * d(H_a + H_x)/dtheta into grad.
    void accumulate_entropy_grad(const PolicyEval& ev, double coeff_a, double coeff_x,
                                 PolicyGrad& grad) const {
        std::vector<double> up_a, up_x, up_ls;
        if (coeff_a != 0.0) {
            if (is_discrete()) {
                up_a.resize(ev.action_probs.size());
                for (std::size_t i = 0; i < up_a.size(); ++i) {
                    up_a[i] = coeff_a * (-(std::log(ev.action_probs[i]) + 1.0));
                }
            } else {
                // Gaussian entropy depends only on log_std; dH/dlog_std_i = 1
                up_ls.assign(ev.dist.dim(), coeff_a);
            }
        }
        if (coeff_x != 0.0) {
            up_x.resize(ev.rep_probs.size());
            for (std::size_t i = 0; i < up_x.size(); ++i) {
                up_x[i] = coeff_x * (-(std::log(ev.rep_probs[i]) + 1.0));
            }
        }
        backprop(ev, up_a, up_x, up_ls, grad);
    }

    /// Applies a gradient-descent style delta: params -= scale * grad.
    void apply_delta(const PolicyGrad& grad, double scale) {
        if (trunk_) trunk_->params().axpy(-scale, grad.trunk);
        action_head_.params().axpy(-scale, grad.action);
        rep_head_.params().axpy(-scale, grad.rep);
        if (!is_discrete()) log_std_.axpy(-scale, grad.log_std);
    }

    std::size_t num_params() const {
        std::size_t n = action_head_.params().size() + rep_head_.params().size() + log_std_.size();
        if (trunk_) n += trunk_->params().size();
        return n;
    }

    /// Flat parameter vector in the order: trunk, action, log_std, rep.
    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(num_params());
        if (trunk_) append(out, trunk_->params().values());
        append(out, action_head_.params().values());
        append(out, log_std_.values());
        append(out, rep_head_.params().values());
        return out;
    }

    void unflatten(std::span<const double> flat) {
        if (flat.size() != num_params()) throw std::invalid_argument("FactoredPolicy::unflatten: size mismatch");
        std::size_t pos = 0;
        if (trunk_) pos = copy_into(flat, pos, trunk_->params().values());
        pos = copy_into(flat, pos, action_head_.params().values());
        pos = copy_into(flat, pos, log_std_.values());
        copy_into(flat, pos, rep_head_.params().values());
    }

    std::vector<double> flatten_grad(const PolicyGrad& g) const {
        std::vector<double> out;
        out.reserve(num_params());
        if (trunk_) append(out, g.trunk.values());
        append(out, g.action.values());
        append(out, g.log_std.values());
        append(out, g.rep.values());
        return out;
    }

private:
    static std::size_t argmax(std::span<const double> v) {
        return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    }

    static void append(std::vector<double>& out, const std::vector<double>& v) {
        out.insert(out.end(), v.begin(), v.end());
    }

    static std::size_t copy_into(std::span<const double> flat, std::size_t pos,
                                 std::vector<double>& dst) {
        std::copy(flat.begin() + pos, flat.begin() + pos + dst.size(), dst.begin());
        return pos + dst.size();
    }

    void build(int obs_dim, int action_out, const std::vector<int>& hidden, Activation act,
               bool shared_trunk, OutputTransform action_transform) {
        if (W_.values.empty()) throw std::invalid_argument("FactoredPolicy: empty repetition set");
        if (shared_trunk) {
            std::vector<int> trunk_sizes = {obs_dim};
            trunk_sizes.insert(trunk_sizes.end(), hidden.begin(), hidden.end());
            trunk_.emplace(trunk_sizes, act, OutputTransform::Activated);
            int feat = hidden.back();
            action_head_ = Mlp({feat, action_out}, act, action_transform);
            rep_head_ = Mlp({feat, static_cast<int>(W_.size())}, act, OutputTransform::Softmax);
        } else {
            std::vector<int> a_sizes = {obs_dim};
            a_sizes.insert(a_sizes.end(), hidden.begin(), hidden.end());
            a_sizes.push_back(action_out);
            action_head_ = Mlp(a_sizes, act, action_transform);
            std::vector<int> x_sizes = {obs_dim};
            x_sizes.insert(x_sizes.end(), hidden.begin(), hidden.end());
            x_sizes.push_back(static_cast<int>(W_.size()));
            rep_head_ = Mlp(x_sizes, act, OutputTransform::Softmax);
        }
    }

    ActionSpace space_;
    RepetitionSet W_;
    std::optional<Mlp> trunk_;
    Mlp action_head_;
    Mlp rep_head_;
    ParamVector log_std_;  // continuous only, state-independent
};

/// Fractions of decisions falling into repetition bins [1-3], [4-6], ...
inline std::vector<double> repetition_histogram(const std::vector<int>& repetitions, int w_max,
                                                int bin_width = 3) {
    if (repetitions.empty()) throw std::invalid_argument("repetition_histogram: no decisions");
    if (bin_width < 1 || w_max < 1) throw std::invalid_argument("repetition_histogram: bad bins");
    int bins = (w_max + bin_width - 1) / bin_width;
    std::vector<double> hist(bins, 0.0);
    for (int x : repetitions) {
        if (x < 1 || x > w_max) throw std::invalid_argument("repetition_histogram: value out of range");
        hist[(x - 1) / bin_width] += 1.0;
    }
    for (double& v : hist) v /= static_cast<double>(repetitions.size());
    return hist;
}

}  // namespace figar
