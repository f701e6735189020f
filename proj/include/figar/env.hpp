#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "figar/rng.hpp"

namespace figar {

struct ActionSpace {
    enum class Kind { Discrete, Continuous };
    Kind kind = Kind::Discrete;
    int n = 0;                    // discrete action count
    int dim = 0;                  // continuous action dimension
    std::vector<double> lo, hi;   // per-dim bounds, continuous only

    static ActionSpace discrete(int count) {
        if (count < 2) throw std::invalid_argument("ActionSpace: discrete n must be >= 2");
        ActionSpace s;
        s.kind = Kind::Discrete;
        s.n = count;
        return s;
    }

    static ActionSpace continuous(std::vector<double> lower, std::vector<double> upper) {
        if (lower.size() != upper.size() || lower.empty()) {
            throw std::invalid_argument("ActionSpace: bound size mismatch");
        }
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (!(lower[i] < upper[i])) throw std::invalid_argument("ActionSpace: lower must be < upper");
        }
        ActionSpace s;
        s.kind = Kind::Continuous;
        s.dim = static_cast<int>(lower.size());
        s.lo = std::move(lower);
        s.hi = std::move(upper);
        return s;
    }
};

struct EnvSpec {
    int observation_dim = 0;
    ActionSpace action_space;
    int max_primitive_steps = 0;
    double gamma = 1.0;
};

/// One primitive action, discrete index or continuous vector.
struct Action {
    int discrete = 0;
    std::vector<double> continuous;

    static Action of(int a) {
        Action x;
        x.discrete = a;
        return x;
    }
    static Action of(std::vector<double> a) {
        Action x;
        x.continuous = std::move(a);
        return x;
    }
};

struct StepResult {
    double reward = 0.0;
    std::vector<double> observation;
    bool terminal = false;
};

/// One decision step: an action held for up to x primitive steps.
struct MacroTransition {
    std::vector<double> state;
    Action action;
    int repetition = 1;          // requested x, element of W
    double macro_reward = 0.0;   // within-macro discounted reward sum
    double raw_reward = 0.0;     // plain (undiscounted) reward sum
    int elapsed = 0;             // primitive steps actually executed (<= repetition)
    std::vector<double> next_state;
    bool terminal = false;
};

class Env {
public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;

    /// Starts a new episode; the episode RNG is reseeded from
    /// master_seed + episode index for reproducibility.
    virtual std::vector<double> reset() = 0;

    virtual StepResult step_primitive(const Action& a) = 0;
    virtual bool terminal() const = 0;
    virtual std::vector<double> observation() const = 0;

    /// True when the episode ended by reaching the goal rather than by
    /// the primitive-step cap.
    virtual bool succeeded() const { return terminal(); }

    /// Rewinds the per-episode seed stream so the next reset() replays
    /// episode 0; evaluations become independent of how many episodes the
    /// env instance has already served.
    virtual void restart_episode_stream() {}
};

/// Repeats `action` for up to x primitive steps, stopping early on terminal.
/// macro_reward = sum_i gamma^i rho_i over the executed steps.
inline MacroTransition execute_macro(Env& env, const Action& action, int x, double gamma) {
    if (x < 1) throw std::invalid_argument("execute_macro: repetition must be >= 1");
    if (env.terminal()) throw std::logic_error("execute_macro: episode already terminal");
    MacroTransition t;
    t.state = env.observation();
    t.action = action;
    t.repetition = x;
    double disc = 1.0;
    for (int i = 0; i < x; ++i) {
        StepResult r = env.step_primitive(action);
        t.macro_reward += disc * r.reward;
        t.raw_reward += r.reward;
        disc *= gamma;
        ++t.elapsed;
        t.next_state = r.observation;
        if (r.terminal) {
            t.terminal = true;
            break;
        }
    }
    return t;
}

/// Outcome of one primitive transition in an enumerable environment.
struct DiscreteOutcome {
    double prob = 1.0;
    int next_state = 0;
    double reward = 0.0;
    bool terminal = false;
};

/// Model interface for environments small enough for exact solving.
class DiscreteEnvModel {
public:
    virtual ~DiscreteEnvModel() = default;
    virtual int num_states() const = 0;
    virtual int num_actions() const = 0;
    virtual int start_state() const = 0;
    virtual bool is_terminal_state(int s) const = 0;
    virtual std::vector<DiscreteOutcome> transitions(int s, int a) const = 0;
    virtual std::vector<double> encode_state(int s) const = 0;
};

/// States 0..L on a line. Actions: 0 = left, 1 = right. Reward -1 per
/// primitive step, +10 extra on reaching L. Start at 0, terminal at L.
/// With p_slip > 0 the chosen action is inverted per primitive step
/// (the ChainSwitch variant).
class Corridor : public Env, public DiscreteEnvModel {
public:
    explicit Corridor(int length, double p_slip = 0.0, std::uint64_t master_seed = 0,
                      int max_steps = 500)
        : length_(length), p_slip_(p_slip), master_seed_(master_seed) {
        if (length < 1) throw std::invalid_argument("Corridor: length must be >= 1");
        if (p_slip < 0.0 || p_slip > 1.0) throw std::invalid_argument("Corridor: p_slip out of range");
        spec_.observation_dim = length + 1;
        spec_.action_space = ActionSpace::discrete(2);
        spec_.max_primitive_steps = max_steps;
        spec_.gamma = 1.0;
    }

    const EnvSpec& spec() const override { return spec_; }

    std::vector<double> reset() override {
        rng_ = Rng(derive_seed(master_seed_, episode_index_++));
        state_ = 0;
        steps_ = 0;
        done_ = false;
        return encode_state(state_);
    }

    StepResult step_primitive(const Action& a) override {
        if (done_) throw std::logic_error("Corridor: stepping a terminal episode");
        int move = a.discrete;
        if (p_slip_ > 0.0 && rng_.uniform() < p_slip_) move = 1 - move;
        StepResult r;
        r.reward = -1.0;
        if (move == 1) {
            ++state_;
            if (state_ == length_) {
                r.reward += 10.0;
                done_ = true;
            }
        } else {
            state_ = std::max(0, state_ - 1);
        }
        if (++steps_ >= spec_.max_primitive_steps) done_ = true;
        r.observation = encode_state(state_);
        r.terminal = done_;
        return r;
    }

    bool terminal() const override { return done_; }
    std::vector<double> observation() const override { return encode_state(state_); }
    bool succeeded() const override { return state_ == length_; }
    void restart_episode_stream() override { episode_index_ = 0; }

    // model interface
    int num_states() const override { return length_ + 1; }
    int num_actions() const override { return 2; }
    int start_state() const override { return 0; }
    bool is_terminal_state(int s) const override { return s == length_; }

    std::vector<DiscreteOutcome> transitions(int s, int a) const override {
        std::vector<DiscreteOutcome> out;
        auto apply = [&](int move, double prob) {
            DiscreteOutcome o;
            o.prob = prob;
            o.reward = -1.0;
            if (move == 1) {
                o.next_state = s + 1;
                if (o.next_state == length_) {
                    o.reward += 10.0;
                    o.terminal = true;
                }
            } else {
                o.next_state = std::max(0, s - 1);
            }
            out.push_back(o);
        };
        if (p_slip_ > 0.0) {
            apply(a, 1.0 - p_slip_);
            apply(1 - a, p_slip_);
        } else {
            apply(a, 1.0);
        }
        return out;
    }

    std::vector<double> encode_state(int s) const override {
        std::vector<double> obs(length_ + 1, 0.0);
        obs[s] = 1.0;
        return obs;
    }

private:
    int length_;
    double p_slip_;
    std::uint64_t master_seed_;
    std::uint64_t episode_index_ = 0;
    EnvSpec spec_;
    Rng rng_{0};
    int state_ = 0;
    int steps_ = 0;
    bool done_ = false;
};

/// Double integrator on the plane driven by a single shared acceleration:
/// the 1-dim action a in [-1, 1] accelerates both coordinates, so the mass
/// moves along the diagonal from (-1,-1) toward the goal (1,1).
/// Reward -|position - goal| per primitive step; terminal within 0.05.
class PointMass : public Env {
public:
    explicit PointMass(std::uint64_t master_seed = 0, int max_steps = 300)
        : master_seed_(master_seed) {
        spec_.observation_dim = 4;
        spec_.action_space = ActionSpace::continuous({-1.0}, {1.0});
        spec_.max_primitive_steps = max_steps;
        spec_.gamma = 1.0;
    }

    const EnvSpec& spec() const override { return spec_; }

    std::vector<double> reset() override {
        rng_ = Rng(derive_seed(master_seed_, episode_index_++));
        px_ = py_ = -1.0;
        vx_ = vy_ = 0.0;
        steps_ = 0;
        done_ = false;
        return observation();
    }

    StepResult step_primitive(const Action& a) override {
        if (done_) throw std::logic_error("PointMass: stepping a terminal episode");
        double u = std::clamp(a.continuous.at(0), -1.0, 1.0);
        vx_ = std::clamp(vx_ + u * kDt, -1.0, 1.0);
        vy_ = std::clamp(vy_ + u * kDt, -1.0, 1.0);
        px_ = std::clamp(px_ + vx_ * kDt, -1.5, 1.5);
        py_ = std::clamp(py_ + vy_ * kDt, -1.5, 1.5);
        double dist = std::hypot(px_ - kGoalX, py_ - kGoalY);
        StepResult r;
        r.reward = -dist;
        if (dist <= kGoalRadius) done_ = true;
        if (++steps_ >= spec_.max_primitive_steps) done_ = true;
        r.observation = observation();
        r.terminal = done_;
        return r;
    }

    bool terminal() const override { return done_; }
    std::vector<double> observation() const override { return {px_, py_, vx_, vy_}; }
    void restart_episode_stream() override { episode_index_ = 0; }
    bool succeeded() const override { return at_goal(); }

    /// True once the goal ball was entered this episode.
    bool at_goal() const { return std::hypot(px_ - kGoalX, py_ - kGoalY) <= kGoalRadius; }

    static constexpr double kDt = 0.05;
    static constexpr double kGoalX = 1.0;
    static constexpr double kGoalY = 1.0;
    static constexpr double kGoalRadius = 0.05;

private:
    std::uint64_t master_seed_;
    std::uint64_t episode_index_ = 0;
    EnvSpec spec_;
    Rng rng_{0};
    double px_ = -1.0, py_ = -1.0, vx_ = 0.0, vy_ = 0.0;
    int steps_ = 0;
    bool done_ = false;
};

/// Named construction used by the experiment config.
inline std::unique_ptr<Env> make_env(const std::string& name, int length, double p_slip,
                                     std::uint64_t master_seed) {
    if (name == "corridor") return std::make_unique<Corridor>(length, 0.0, master_seed);
    if (name == "chainswitch") return std::make_unique<Corridor>(length, p_slip, master_seed);
    if (name == "pointmass") return std::make_unique<PointMass>(master_seed);
    throw std::invalid_argument("unknown environment: " + name);
}

}  // namespace figar
