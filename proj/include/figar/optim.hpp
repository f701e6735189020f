#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace figar {

enum class OptKind { Sgd, RmspropShared, Adam };

struct OptimizerConfig {
    OptKind kind = OptKind::RmspropShared;
    double learning_rate = 1e-3;
    bool anneal = false;
    std::uint64_t anneal_budget = 0;  // steps until the rate reaches exactly 0
    double rmsprop_decay = 0.99;
    double rmsprop_eps = 1e-6;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

/// First-order optimizer over one flat parameter array. Statistics live in
/// the optimizer, so several workers applying deltas share them
/// (the shared-statistics RMSProp setup).
class Optimizer {
public:
    Optimizer() = default;
    explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {
        if (cfg.learning_rate < 0.0) throw std::invalid_argument("Optimizer: negative learning rate");
        if (cfg.anneal && cfg.anneal_budget == 0) {
            throw std::invalid_argument("Optimizer: anneal requires a positive budget");
        }
    }

    /// Linear-to-zero schedule: exactly 0 at step >= budget.
    double learning_rate(std::uint64_t step) const {
        if (!cfg_.anneal) return cfg_.learning_rate;
        if (step >= cfg_.anneal_budget) return 0.0;
        double frac = static_cast<double>(step) / static_cast<double>(cfg_.anneal_budget);
        return cfg_.learning_rate * (1.0 - frac);
    }

    /// Gradient-descent step on params. `step` indexes the anneal schedule.
    void apply(std::vector<double>& params, const std::vector<double>& grad, std::uint64_t step) {
        if (params.size() != grad.size()) throw std::invalid_argument("Optimizer::apply: size mismatch");
        double lr = learning_rate(step);
        switch (cfg_.kind) {
            case OptKind::Sgd:
                for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
                break;
            case OptKind::RmspropShared: {
                ensure(ms_, params.size());
                for (std::size_t i = 0; i < params.size(); ++i) {
                    ms_[i] = cfg_.rmsprop_decay * ms_[i] + (1.0 - cfg_.rmsprop_decay) * grad[i] * grad[i];
                    params[i] -= lr * grad[i] / (std::sqrt(ms_[i]) + cfg_.rmsprop_eps);
                }
                break;
            }
            case OptKind::Adam: {
                ensure(m_, params.size());
                ensure(v_, params.size());
                ++adam_t_;
                double b1t = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(adam_t_));
                double b2t = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(adam_t_));
                for (std::size_t i = 0; i < params.size(); ++i) {
                    m_[i] = cfg_.adam_beta1 * m_[i] + (1.0 - cfg_.adam_beta1) * grad[i];
                    v_[i] = cfg_.adam_beta2 * v_[i] + (1.0 - cfg_.adam_beta2) * grad[i] * grad[i];
                    double mh = m_[i] / b1t;
                    double vh = v_[i] / b2t;
                    params[i] -= lr * mh / (std::sqrt(vh) + cfg_.adam_eps);
                }
                break;
            }
        }
    }

    const OptimizerConfig& config() const { return cfg_; }

private:
    static void ensure(std::vector<double>& v, std::size_t n) {
        if (v.size() != n) v.assign(n, 0.0);
    }

    OptimizerConfig cfg_;
    std::vector<double> ms_;      // rmsprop mean square
    std::vector<double> m_, v_;   // adam moments
    std::uint64_t adam_t_ = 0;
};

}  // namespace figar
