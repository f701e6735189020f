#include <gtest/gtest.h>

#include <cmath>

#include "figar/gradcheck.hpp"
#include "figar/policy.hpp"

using namespace figar;

namespace {

FactoredPolicy make_discrete(int obs = 4, int actions = 3, const std::string& variant = "figar-5",
                             bool shared = false, std::uint64_t seed = 17) {
    auto p = FactoredPolicy::discrete(obs, actions, make_repetition_set(variant, seed), {8, 6},
                                      Activation::Tanh, shared);
    p.init(seed);
    return p;
}

FactoredPolicy make_continuous(bool shared = false, std::uint64_t seed = 23) {
    auto space = ActionSpace::continuous({-1.0, -2.0}, {1.0, 2.0});
    auto p = FactoredPolicy::continuous(4, space, make_repetition_set("figar-5", seed), {8, 6},
                                        Activation::Tanh, shared);
    p.init(seed);
    return p;
}

std::vector<double> random_obs(Rng& rng, int dim = 4) {
    std::vector<double> obs(dim);
    for (double& v : obs) v = rng.uniform(-1, 1);
    return obs;
}

}  // namespace

TEST(RepetitionSets, Figar30IsRange) {
    auto w = make_repetition_set("figar-30", 0);
    ASSERT_EQ(w.size(), 30u);
    for (int i = 0; i < 30; ++i) EXPECT_EQ(w.values[i], i + 1);
}

TEST(RepetitionSets, PrimesBelowFifty) {
    auto w = make_repetition_set("figar-p", 0);
    std::vector<int> expected = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47};
    EXPECT_EQ(w.values, expected);
}

TEST(RepetitionSets, Singleton) {
    auto w = make_repetition_set("singleton(1)", 0);
    EXPECT_EQ(w.values, std::vector<int>{1});
}

TEST(RepetitionSets, SampledVariantsReproducible) {
    auto a = make_repetition_set("figar-30-50", 42);
    auto b = make_repetition_set("figar-30-50", 42);
    auto c = make_repetition_set("figar-30-50", 43);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
    EXPECT_EQ(a.size(), 30u);
    for (int v : a.values) {
        EXPECT_GE(v, 1);
        EXPECT_LE(v, 50);
    }
    for (std::size_t i = 1; i < a.values.size(); ++i) EXPECT_LT(a.values[i - 1], a.values[i]);
}

TEST(RepetitionSets, ExplicitRejectsBadLists) {
    EXPECT_THROW(make_repetition_set("explicit(3,3)", 0), std::invalid_argument);
    EXPECT_THROW(make_repetition_set("explicit(0,2)", 0), std::invalid_argument);
    EXPECT_THROW(make_repetition_set("nonsense", 0), std::invalid_argument);
}

TEST(Decide, UniformHeadsAtZeroWeights) {
    auto w = make_repetition_set("figar-30", 5);
    auto p = FactoredPolicy::discrete(4, 2, w, {8}, Activation::Tanh, false);
    // zero weights: softmax heads uniform
    Rng rng(9);
    auto d = p.decide(std::vector<double>{0.1, 0.2, 0.3, 0.4}, SamplingMode::stochastic(), rng);
    EXPECT_NEAR(d.logprob_a, -std::log(2.0), 1e-12);
    EXPECT_NEAR(d.logprob_x, -std::log(30.0), 1e-12);
}

TEST(Decide, GreedyPicksArgmax) {
    auto p = make_discrete();
    Rng rng(1), rng2(2);
    std::vector<double> obs = {0.3, -0.1, 0.5, 0.7};
    auto d1 = p.decide(obs, SamplingMode::greedy(), rng);
    auto d2 = p.decide(obs, SamplingMode::greedy(), rng2);
    EXPECT_EQ(d1.action.discrete, d2.action.discrete);
    EXPECT_EQ(d1.repetition, d2.repetition);
    // repetition equals argmax of its snapshot
    auto it = std::max_element(d1.repetition_probs.begin(), d1.repetition_probs.end());
    EXPECT_EQ(d1.repetition_index, static_cast<int>(it - d1.repetition_probs.begin()));
}

TEST(Decide, EpsZeroEqualsGreedy) {
    auto p = make_discrete();
    Rng rng_eps(3), rng_greedy(99);
    for (int i = 0; i < 50; ++i) {
        Rng obs_rng(i);
        auto obs = random_obs(obs_rng);
        auto de = p.decide(obs, SamplingMode::eps_greedy(0.0), rng_eps);
        auto dg = p.decide(obs, SamplingMode::greedy(), rng_greedy);
        EXPECT_EQ(de.action.discrete, dg.action.discrete);
        EXPECT_EQ(de.repetition, dg.repetition);
    }
}

TEST(Decide, SingletonRepetitionIsOneWithZeroLogprob) {
    auto p = make_discrete(4, 3, "singleton(1)");
    Rng rng(4);
    for (int i = 0; i < 20; ++i) {
        Rng obs_rng(i);
        auto d = p.decide(random_obs(obs_rng), SamplingMode::stochastic(), rng);
        EXPECT_EQ(d.repetition, 1);
        EXPECT_DOUBLE_EQ(d.logprob_x, 0.0);
    }
}

TEST(JointLogprob, UniformHeads) {
    auto w = make_repetition_set("figar-5", 0);
    auto p = FactoredPolicy::discrete(3, 4, w, {6}, Activation::Tanh, false);
    auto [la, lx] = p.joint_logprob(std::vector<double>{0.0, 0.0, 0.0}, Action::of(2), 3);
    EXPECT_NEAR(la, -std::log(4.0), 1e-12);
    EXPECT_NEAR(lx, -std::log(5.0), 1e-12);
}

TEST(JointLogprob, RejectsXOutsideW) {
    auto p = make_discrete();
    EXPECT_THROW(p.joint_logprob(std::vector<double>{0, 0, 0, 0}, Action::of(0), 99),
                 std::invalid_argument);
}

TEST(JointLogprob, FactorizationProperty) {
    for (bool shared : {false, true}) {
        auto p = make_discrete(4, 3, "figar-5", shared);
        Rng rng(31);
        for (int i = 0; i < 1000; ++i) {
            auto obs = random_obs(rng);
            int a = static_cast<int>(rng.index(3));
            int x = 1 + static_cast<int>(rng.index(5));
            auto [la, lx] = p.joint_logprob(obs, Action::of(a), x);
            auto ev = p.evaluate(obs);
            EXPECT_NEAR(std::exp(la + lx), ev.action_probs[a] * ev.rep_probs[x - 1], 1e-12);
        }
    }
}

TEST(Entropy, ClosedForms) {
    auto w = make_repetition_set("figar-30", 0);
    auto p = FactoredPolicy::discrete(3, 2, w, {6}, Activation::Tanh, false);
    auto [ha, hx] = p.entropy(std::vector<double>{0.0, 0.0, 0.0});
    EXPECT_NEAR(ha, std::log(2.0), 1e-12);
    EXPECT_NEAR(hx, std::log(30.0), 1e-12);

    auto space = ActionSpace::continuous({-1.0}, {1.0});
    auto pc = FactoredPolicy::continuous(3, space, w, {6}, Activation::Tanh, false, 0.0);
    auto [hca, hcx] = pc.entropy(std::vector<double>{0.0, 0.0, 0.0});
    EXPECT_NEAR(hca, 0.5 * std::log(2.0 * M_PI * std::exp(1.0)), 1e-12);
}

// gradient of (logprob_a + logprob_x) against finite differences,
// both trunk variants, discrete and continuous heads
TEST(PolicyGradients, JointLogprobMatchesFiniteDifferences) {
    for (bool shared : {false, true}) {
        auto p = make_discrete(4, 3, "figar-5", shared, 71);
        Rng rng(5);
        auto obs = random_obs(rng);
        Rng pick(6);
        auto d = p.decide(obs, SamplingMode::stochastic(), pick);
        auto ev = p.evaluate(obs);
        PolicyGrad g = p.zero_grad();
        p.accumulate_logprob_a_grad(ev, d.action, 1.0, g);
        p.accumulate_logprob_x_grad(ev, d.repetition_index, 1.0, g);
        auto flat_grad = p.flatten_grad(g);
        auto theta = p.flatten();

        ParamVector pv;
        auto seg = pv.add_segment("theta", {theta.size()});
        std::copy(theta.begin(), theta.end(), seg.begin());
        ParamVector analytic = ParamVector::zeros_like(pv);
        auto aseg = analytic.segment("theta");
        std::copy(flat_grad.begin(), flat_grad.end(), aseg.begin());

        FactoredPolicy probe = p;
        auto f = [&](const ParamVector& q) {
            probe.unflatten(q.segment("theta"));
            auto [la, lx] = probe.joint_logprob(obs, d.action, d.repetition);
            return la + lx;
        };
        EXPECT_LT(check_gradient(f, pv, analytic), 1e-4) << "shared=" << shared;
    }
}

TEST(PolicyGradients, ContinuousLogprobMatchesFiniteDifferences) {
    for (bool shared : {false, true}) {
        auto p = make_continuous(shared);
        Rng rng(8);
        auto obs = random_obs(rng);
        Rng pick(9);
        auto d = p.decide(obs, SamplingMode::stochastic(), pick);
        auto ev = p.evaluate(obs);
        PolicyGrad g = p.zero_grad();
        p.accumulate_logprob_a_grad(ev, d.action, 1.0, g);
        p.accumulate_logprob_x_grad(ev, d.repetition_index, 1.0, g);
        auto flat_grad = p.flatten_grad(g);
        auto theta = p.flatten();

        ParamVector pv;
        auto seg = pv.add_segment("theta", {theta.size()});
        std::copy(theta.begin(), theta.end(), seg.begin());
        ParamVector analytic = ParamVector::zeros_like(pv);
        auto aseg = analytic.segment("theta");
        std::copy(flat_grad.begin(), flat_grad.end(), aseg.begin());

        FactoredPolicy probe = p;
        auto f = [&](const ParamVector& q) {
            probe.unflatten(q.segment("theta"));
            auto [la, lx] = probe.joint_logprob(obs, d.action, d.repetition);
            return la + lx;
        };
        EXPECT_LT(check_gradient(f, pv, analytic), 1e-4) << "shared=" << shared;
    }
}

TEST(PolicyGradients, EntropyMatchesFiniteDifferences) {
    auto p = make_discrete(4, 3, "figar-5", false, 99);
    Rng rng(10);
    auto obs = random_obs(rng);
    auto ev = p.evaluate(obs);
    PolicyGrad g = p.zero_grad();
    p.accumulate_entropy_grad(ev, 1.0, 1.0, g);
    auto flat_grad = p.flatten_grad(g);
    auto theta = p.flatten();

    ParamVector pv;
    auto seg = pv.add_segment("theta", {theta.size()});
    std::copy(theta.begin(), theta.end(), seg.begin());
    ParamVector analytic = ParamVector::zeros_like(pv);
    auto aseg = analytic.segment("theta");
    std::copy(flat_grad.begin(), flat_grad.end(), aseg.begin());

    FactoredPolicy probe = p;
    auto f = [&](const ParamVector& q) {
        probe.unflatten(q.segment("theta"));
        auto [ha, hx] = probe.entropy(obs);
        return ha + hx;
    };
    EXPECT_LT(check_gradient(f, pv, analytic), 1e-4);
}

TEST(Histogram, AllOnes) {
    auto h = repetition_histogram(std::vector<int>(10, 1), 30);
    ASSERT_EQ(h.size(), 10u);
    EXPECT_DOUBLE_EQ(h[0], 1.0);
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_DOUBLE_EQ(h[i], 0.0);
}

TEST(Histogram, SpreadCounts) {
    auto h = repetition_histogram({1, 5, 9, 29}, 30);
    EXPECT_DOUBLE_EQ(h[0], 0.25);
    EXPECT_DOUBLE_EQ(h[1], 0.25);
    EXPECT_DOUBLE_EQ(h[2], 0.25);
    EXPECT_DOUBLE_EQ(h[9], 0.25);
}

TEST(Histogram, SumsToOneBeforeRounding) {
    Rng rng(12);
    std::vector<int> xs;
    for (int i = 0; i < 137; ++i) xs.push_back(1 + static_cast<int>(rng.index(30)));
    auto h = repetition_histogram(xs, 30);
    double sum = 0.0;
    for (double v : h) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Histogram, EmptyThrows) {
    EXPECT_THROW(repetition_histogram({}, 30), std::invalid_argument);
}
