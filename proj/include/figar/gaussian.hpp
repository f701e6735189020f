#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "figar/rng.hpp"

namespace figar {

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)

/// Diagonal-covariance Gaussian over a real vector.
struct DiagGaussian {
    std::vector<double> mean;
    std::vector<double> log_std;

    std::size_t dim() const { return mean.size(); }

    double logprob(std::span<const double> a) const {
        if (a.size() != mean.size()) throw std::invalid_argument("DiagGaussian::logprob: dim mismatch");
        double lp = 0.0;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            double s = std::exp(log_std[i]);
            double z = (a[i] - mean[i]) / s;
            lp += -0.5 * z * z - log_std[i] - 0.5 * kLogTwoPi;
        }
        return lp;
    }

    /// d logprob / d mean_i = (a_i - mu_i) / sigma_i^2
    std::vector<double> logprob_grad_mean(std::span<const double> a) const {
        std::vector<double> g(mean.size());
        for (std::size_t i = 0; i < mean.size(); ++i) {
            double s2 = std::exp(2.0 * log_std[i]);
            g[i] = (a[i] - mean[i]) / s2;
        }
        return g;
    }

    /// d logprob / d log_std_i = ((a_i - mu_i)/sigma_i)^2 - 1
    std::vector<double> logprob_grad_log_std(std::span<const double> a) const {
        std::vector<double> g(mean.size());
        for (std::size_t i = 0; i < mean.size(); ++i) {
            double z = (a[i] - mean[i]) / std::exp(log_std[i]);
            g[i] = z * z - 1.0;
        }
        return g;
    }

    double entropy() const {
        double h = 0.0;
        for (double ls : log_std) h += ls + 0.5 * (kLogTwoPi + 1.0);
        return h;
    }

    std::vector<double> sample(Rng& rng) const {
        std::vector<double> a(mean.size());
        for (std::size_t i = 0; i < mean.size(); ++i) {
            a[i] = mean[i] + std::exp(log_std[i]) * rng.normal();
        }
        return a;
    }

    /// KL(old || now), closed form per dimension.
    static double kl(const DiagGaussian& old, const DiagGaussian& now) {
        if (old.dim() != now.dim()) throw std::invalid_argument("DiagGaussian::kl: dim mismatch");
        double k = 0.0;
        for (std::size_t i = 0; i < old.dim(); ++i) {
            double so2 = std::exp(2.0 * old.log_std[i]);
            double sn2 = std::exp(2.0 * now.log_std[i]);
            double dm = old.mean[i] - now.mean[i];
            k += now.log_std[i] - old.log_std[i] + (so2 + dm * dm) / (2.0 * sn2) - 0.5;
        }
        return k;
    }

    /// Gradients of KL(old || now) with respect to the new distribution.
    static void kl_grad(const DiagGaussian& old, const DiagGaussian& now,
                        std::vector<double>& d_mean, std::vector<double>& d_log_std) {
        d_mean.resize(now.dim());
        d_log_std.resize(now.dim());
        for (std::size_t i = 0; i < old.dim(); ++i) {
            double so2 = std::exp(2.0 * old.log_std[i]);
            double sn2 = std::exp(2.0 * now.log_std[i]);
            double dm = now.mean[i] - old.mean[i];
            d_mean[i] = dm / sn2;
            d_log_std[i] = 1.0 - (so2 + dm * dm) / sn2;
        }
    }
};

/// Entropy of a categorical distribution.
inline double categorical_entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

/// KL(old || now) for categorical distributions.
inline double categorical_kl(std::span<const double> old, std::span<const double> now) {
    if (old.size() != now.size()) throw std::invalid_argument("categorical_kl: size mismatch");
    double k = 0.0;
    for (std::size_t i = 0; i < old.size(); ++i) {
        if (old[i] > 0.0) k += old[i] * (std::log(old[i]) - std::log(now[i]));
    }
    return k;
}

}  // namespace figar
