#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "figar/ddpg.hpp"
#include "figar/gradcheck.hpp"

namespace figar {
namespace {

RepetitionSet range_set(int lo, int hi) {
    RepetitionSet w;
    for (int x = lo; x <= hi; ++x) w.values.push_back(x);
    return w;
}

void fill_random(ParamVector& p, Rng& rng, double scale = 0.5) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = rng.uniform(-scale, scale);
}

DdpgActor make_actor(int obs_dim, int action_dim, const RepetitionSet& w, std::uint64_t seed,
                     std::vector<int> hidden = {8, 7}) {
    auto space = ActionSpace::continuous(std::vector<double>(action_dim, -1.0),
                                         std::vector<double>(action_dim, 1.0));
    return DdpgActor(obs_dim, space, w, hidden, Activation::Tanh, seed);
}

CriticNet make_critic(int obs_dim, int action_dim, int rep_dim, std::uint64_t seed,
                      std::vector<int> hidden = {8, 7}) {
    CriticNet c(obs_dim, action_dim, rep_dim, hidden, Activation::Tanh);
    Rng r(derive_seed(seed, "critic"));
    c.init(r, 1.0);
    // spread the weights so gradients are far from zero in the checks
    for (std::size_t i = 0; i < c.params().size(); ++i) c.params()[i] *= 3.0;
    return c;
}

ReplayEntry random_entry(int obs_dim, int action_dim, int num_reps, Rng& rng) {
    ReplayEntry e;
    for (int i = 0; i < obs_dim; ++i) e.s.push_back(rng.uniform(-1.0, 1.0));
    for (int i = 0; i < obs_dim; ++i) e.s_next.push_back(rng.uniform(-1.0, 1.0));
    for (int i = 0; i < action_dim; ++i) e.a.push_back(rng.uniform(-1.0, 1.0));
    e.rep_index = num_reps > 1 ? static_cast<int>(rng.index(num_reps)) : 0;
    e.macro_reward = rng.uniform(-2.0, 2.0);
    e.elapsed = 1 + static_cast<int>(rng.index(4));
    e.terminal = false;
    return e;
}

std::vector<double> actor_flat(const DdpgActor& a) {
    std::vector<double> v = a.action_net().params().values();
    if (a.has_rep_net()) {
        const auto& r = a.rep_net().params().values();
        v.insert(v.end(), r.begin(), r.end());
    }
    return v;
}

void set_actor_flat(DdpgActor& a, const std::vector<double>& flat) {
    std::size_t na = a.action_net().params().size();
    std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(na),
              a.action_net().params().values().begin());
    if (a.has_rep_net()) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(na), flat.end(),
                  a.rep_net().params().values().begin());
    }
}

double mean_q(const DdpgActor& actor, const CriticNet& critic,
              const std::vector<const ReplayEntry*>& batch) {
    double m = 0.0;
    double inv = 1.0 / static_cast<double>(batch.size());
    for (const ReplayEntry* e : batch) {
        auto a = actor.action(e->s);
        std::vector<double> x;
        if (critic.rep_dim() > 0) x = actor.rep_probs(e->s);
        m += critic.forward(e->s, a, x) * inv;
    }
    return m;
}

// ---------------------------------------------------------------- soft update

TEST(SoftUpdate, TauOneIsHardCopy) {
    ParamVector t, l;
    t.add_segment("w", {3});
    l.add_segment("w", {3});
    t[0] = 1.0; t[1] = 2.0; t[2] = 3.0;
    l[0] = -5.0; l[1] = 0.25; l[2] = 9.0;
    soft_update(t, l, 1.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(t[i], l[i]);
}

TEST(SoftUpdate, TauZeroIsNoOp) {
    ParamVector t, l;
    t.add_segment("w", {2});
    l.add_segment("w", {2});
    t[0] = 1.5; t[1] = -2.5;
    l[0] = 100.0; l[1] = 100.0;
    soft_update(t, l, 0.0);
    EXPECT_DOUBLE_EQ(t[0], 1.5);
    EXPECT_DOUBLE_EQ(t[1], -2.5);
}

TEST(SoftUpdate, SmallTauArithmetic) {
    ParamVector t, l;
    t.add_segment("w", {2});
    l.add_segment("w", {2});
    t[0] = 1.0; t[1] = 2.0;
    l[0] = 3.0; l[1] = 6.0;
    soft_update(t, l, 0.001);
    EXPECT_DOUBLE_EQ(t[0], 0.001 * 3.0 + 0.999 * 1.0);
    EXPECT_DOUBLE_EQ(t[1], 0.001 * 6.0 + 0.999 * 2.0);
}

TEST(SoftUpdate, GapShrinksGeometrically) {
    ParamVector t, l;
    t.add_segment("w", {1});
    l.add_segment("w", {1});
    t[0] = 0.0;
    l[0] = 1.0;
    double tau = 0.05;
    for (int k = 0; k < 40; ++k) soft_update(t, l, tau);
    double expected_gap = std::pow(1.0 - tau, 40);
    EXPECT_NEAR(1.0 - t[0], expected_gap, 1e-12);
}

TEST(SoftUpdate, RejectsLayoutMismatchAndBadTau) {
    ParamVector t, l, other;
    t.add_segment("w", {2});
    l.add_segment("w", {2});
    other.add_segment("w", {3});
    EXPECT_THROW(soft_update(t, other, 0.5), std::invalid_argument);
    EXPECT_THROW(soft_update(t, l, -0.1), std::invalid_argument);
    EXPECT_THROW(soft_update(t, l, 1.1), std::invalid_argument);
}

// --------------------------------------------------------------- replay ring

TEST(ReplayBuffer, EvictsOldestFirst) {
    ReplayBuffer buf(3);
    for (int i = 0; i < 7; ++i) {
        ReplayEntry e;
        e.macro_reward = static_cast<double>(i);
        buf.push(e);
        EXPECT_EQ(buf.size(), static_cast<std::size_t>(std::min(i + 1, 3)));
    }
    // after 7 pushes into capacity 3, entries 4, 5, 6 remain in age order
    EXPECT_DOUBLE_EQ(buf.oldest_first(0).macro_reward, 4.0);
    EXPECT_DOUBLE_EQ(buf.oldest_first(1).macro_reward, 5.0);
    EXPECT_DOUBLE_EQ(buf.oldest_first(2).macro_reward, 6.0);
}

TEST(ReplayBuffer, RejectsBadUse) {
    EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
    ReplayBuffer buf(2);
    buf.push(ReplayEntry{});
    EXPECT_THROW(buf.oldest_first(1), std::out_of_range);
    EXPECT_THROW(buf.at(1), std::out_of_range);
}

// ------------------------------------------------------------- eps schedule

TEST(EpsilonSchedule, LinearAndExactlyZeroAtHorizon) {
    DdpgConfig cfg;  // 0.2 -> 0 over 50000
    EXPECT_DOUBLE_EQ(epsilon_schedule(cfg, 0), 0.2);
    EXPECT_DOUBLE_EQ(epsilon_schedule(cfg, 25000), 0.1);
    EXPECT_EQ(epsilon_schedule(cfg, 50000), 0.0);
    EXPECT_EQ(epsilon_schedule(cfg, 50001), 0.0);
    EXPECT_EQ(epsilon_schedule(cfg, 1000000000ULL), 0.0);
    double prev = 1.0;
    for (std::uint64_t s = 0; s <= 60000; s += 500) {
        double e = epsilon_schedule(cfg, s);
        EXPECT_LE(e, prev);
        prev = e;
    }
}

// -------------------------------------------------------------- exploration

TEST(ActExplore, ZeroSigmaKeepsDeterministicAction) {
    auto actor = make_actor(3, 2, range_set(1, 4), 11);
    std::vector<double> obs{0.3, -0.2, 0.8};
    OuParams ou;
    ou.sigma = 0.0;
    OuState state(2);
    Rng rng(5);
    auto d = act_explore(actor, obs, 1.0, ou, state, rng);
    auto clean = actor.action(obs);
    for (int i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(d.action[i], clean[i]);
}

TEST(ActExplore, EpsOnePicksArgmaxRepetition) {
    auto actor = make_actor(3, 1, range_set(1, 5), 12);
    std::vector<double> obs{0.1, 0.2, -0.4};
    auto probs = actor.rep_probs(obs);
    int argmax = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    OuState state(1);
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        auto d = act_explore(actor, obs, 1.0, DdpgConfig{}.ou, state, rng);
        EXPECT_EQ(d.rep_index, argmax);
    }
}

TEST(ActExplore, EpsZeroSamplesFromSoftmax) {
    auto actor = make_actor(2, 1, range_set(1, 4), 13);
    // spread the repetition logits so the probabilities are distinct
    Rng noise(42);
    for (std::size_t i = 0; i < actor.rep_net().params().size(); ++i) {
        actor.rep_net().params()[i] += noise.uniform(-0.8, 0.8);
    }
    std::vector<double> obs{0.5, -0.5};
    auto probs = actor.rep_probs(obs);
    const int n = 100000;
    std::vector<int> counts(4, 0);
    OuState state(1);
    Rng rng(7);
    for (int i = 0; i < n; ++i) ++counts[act_explore(actor, obs, 0.0, DdpgConfig{}.ou, state, rng).rep_index];
    for (int k = 0; k < 4; ++k) {
        double freq = static_cast<double>(counts[k]) / n;
        double sigma = std::sqrt(probs[k] * (1.0 - probs[k]) / n);
        EXPECT_NEAR(freq, probs[k], 3.0 * sigma) << "repetition bin " << k;
    }
}

TEST(ActExplore, SingletonConsumesNoRepetitionRandomness) {
    auto actor = make_actor(2, 2, range_set(1, 1), 14);
    std::vector<double> obs{0.2, 0.3};
    OuState state(2);
    Rng a(123), b(123);
    auto d = act_explore(actor, obs, 0.5, DdpgConfig{}.ou, state, a);
    EXPECT_EQ(d.rep_index, 0);
    b.normal();
    b.normal();  // exactly one normal per action dimension
    EXPECT_DOUBLE_EQ(a.uniform(), b.uniform());
}

TEST(ActExplore, RejectsBadEps) {
    auto actor = make_actor(2, 1, range_set(1, 2), 15);
    OuState state(1);
    Rng rng(1);
    std::vector<double> obs{0.0, 0.0};
    EXPECT_THROW(act_explore(actor, obs, -0.1, DdpgConfig{}.ou, state, rng), std::invalid_argument);
    EXPECT_THROW(act_explore(actor, obs, 1.5, DdpgConfig{}.ou, state, rng), std::invalid_argument);
}

// -------------------------------------------------------------------- critic

TEST(CriticNet, ZeroParametersGiveZeroValue) {
    CriticNet c(3, 2, 4, {8, 7}, Activation::Tanh);
    std::vector<double> s{0.4, -0.7, 0.2}, a{0.1, 0.9}, x{0.25, 0.25, 0.25, 0.25};
    EXPECT_DOUBLE_EQ(c.forward(s, a, x), 0.0);
}

TEST(CriticNet, RejectsInputSizeMismatch) {
    CriticNet c(2, 1, 3, {4, 4}, Activation::Tanh);
    std::vector<double> s{0.1, 0.2}, a{0.3}, x{0.5, 0.25, 0.25};
    EXPECT_THROW(c.forward(s, a, std::vector<double>{0.5, 0.5}), std::invalid_argument);
    EXPECT_THROW(c.forward(a, a, x), std::invalid_argument);
}

TEST(CriticNet, ParameterGradientMatchesFiniteDifferences) {
    auto critic = make_critic(3, 2, 4, 21);
    Rng rng(77);
    std::vector<double> s{0.4, -0.7, 0.2}, a{0.3, -0.6}, x{0.1, 0.2, 0.3, 0.4};
    CriticNet::Cache cache;
    critic.forward(s, a, x, cache);
    ParamVector grad = ParamVector::zeros_like(critic.params());
    critic.backward(cache, 1.0, grad);
    auto f = [&](const ParamVector& p) {
        CriticNet probe = critic;
        probe.params().values() = p.values();
        return probe.forward(s, a, x);
    };
    EXPECT_LT(check_gradient(f, critic.params(), grad), 1e-4);
}

TEST(CriticNet, InputGradientsMatchFiniteDifferences) {
    auto critic = make_critic(3, 2, 4, 22);
    std::vector<double> s{0.4, -0.7, 0.2}, a{0.3, -0.6}, x{0.1, 0.2, 0.3, 0.4};
    CriticNet::Cache cache;
    critic.forward(s, a, x, cache);
    ParamVector scratch = ParamVector::zeros_like(critic.params());
    std::vector<double> da, dx;
    critic.backward(cache, 1.0, scratch, &da, &dx);
    const double eps = 1e-5;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto ap = a, am = a;
        ap[i] += eps;
        am[i] -= eps;
        double fd = (critic.forward(s, ap, x) - critic.forward(s, am, x)) / (2 * eps);
        EXPECT_NEAR(da[i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
    }
    bool any_rep = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto xp = x, xm = x;
        xp[i] += eps;
        xm[i] -= eps;
        double fd = (critic.forward(s, a, xp) - critic.forward(s, a, xm)) / (2 * eps);
        EXPECT_NEAR(dx[i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
        if (std::abs(dx[i]) > 1e-8) any_rep = true;
    }
    EXPECT_TRUE(any_rep) << "value must be sensitive to the repetition input";
}

// ------------------------------------------------------------ critic update

TEST(CriticUpdate, TerminalTargetIsExactlyReward) {
    CriticNet critic(2, 1, 2, {4, 4}, Activation::Tanh);  // all-zero weights: q = 0
    DdpgActor actor = make_actor(2, 1, range_set(1, 2), 31, {4, 4});
    TargetNets targets{actor, critic};
    ReplayEntry e;
    e.s = {0.1, 0.2};
    e.a = {0.5};
    e.rep_index = 1;
    e.macro_reward = 3.0;
    e.elapsed = 2;
    e.s_next = {0.0, 0.0};
    e.terminal = true;
    ParamVector grad = ParamVector::zeros_like(critic.params());
    double loss = critic_update(critic, targets, {&e}, 0.9, grad);
    EXPECT_DOUBLE_EQ(loss, 9.0);  // (0 - r)^2 with no bootstrap term
}

TEST(CriticUpdate, BootstrapsWithGammaToTheElapsedPower) {
    auto critic = make_critic(2, 1, 2, 32, {4, 4});
    auto actor = make_actor(2, 1, range_set(1, 2), 33, {4, 4});
    TargetNets targets{actor, critic};
    // the target nets see independent weights
    Rng tr(55);
    fill_random(targets.critic.params(), tr, 0.3);
    ReplayEntry e;
    e.s = {0.1, 0.2};
    e.a = {0.5};
    e.rep_index = 0;
    e.macro_reward = 1.0;
    e.elapsed = 3;
    e.s_next = {-0.4, 0.7};
    e.terminal = false;
    double gamma = 0.9;
    auto a_next = targets.actor.action(e.s_next);
    auto x_next = targets.actor.rep_probs(e.s_next);
    double y = e.macro_reward + std::pow(gamma, 3) * targets.critic.forward(e.s_next, a_next, x_next);
    double q = critic.forward(e.s, e.a, std::vector<double>{1.0, 0.0});
    ParamVector grad = ParamVector::zeros_like(critic.params());
    double loss = critic_update(critic, targets, {&e}, gamma, grad);
    EXPECT_NEAR(loss, (q - y) * (q - y), 1e-12);
}

TEST(CriticUpdate, GradientMatchesFiniteDifferences) {
    auto critic = make_critic(3, 2, 3, 34);
    auto actor = make_actor(3, 2, range_set(1, 3), 35);
    TargetNets targets{actor, critic};
    Rng rng(66);
    std::vector<ReplayEntry> entries;
    for (int i = 0; i < 6; ++i) entries.push_back(random_entry(3, 2, 3, rng));
    entries[2].terminal = true;
    std::vector<const ReplayEntry*> batch;
    for (auto& e : entries) batch.push_back(&e);
    ParamVector grad = ParamVector::zeros_like(critic.params());
    critic_update(critic, targets, batch, 0.95, grad);
    auto f = [&](const ParamVector& p) {
        CriticNet probe = critic;
        probe.params().values() = p.values();
        ParamVector g = ParamVector::zeros_like(probe.params());
        return critic_update(probe, targets, batch, 0.95, g);
    };
    EXPECT_LT(check_gradient(f, critic.params(), grad), 1e-4);
}

TEST(CriticUpdate, TwoStateChainConvergesToTrueValues) {
    // deterministic chain A -> B -> terminal, rewards 1 then 2, gamma 0.9:
    // Q(A) = 1 + 0.9 * 2 = 2.8, Q(B) = 2
    CriticNet critic(2, 1, 0, {16, 16}, Activation::Tanh);
    Rng ir(derive_seed(101, "critic"));
    critic.init(ir);
    auto actor = make_actor(2, 1, range_set(1, 1), 101, {16, 16});
    // zero actor weights: deterministic action 0, matching the stored actions
    for (std::size_t i = 0; i < actor.action_net().params().size(); ++i) {
        actor.action_net().params()[i] = 0.0;
    }
    TargetNets targets{actor, critic};
    ReplayEntry ab, bt;
    ab.s = {1.0, 0.0};
    ab.a = {0.0};
    ab.macro_reward = 1.0;
    ab.elapsed = 1;
    ab.s_next = {0.0, 1.0};
    ab.terminal = false;
    bt.s = {0.0, 1.0};
    bt.a = {0.0};
    bt.macro_reward = 2.0;
    bt.elapsed = 1;
    bt.s_next = {0.0, 0.0};
    bt.terminal = true;
    std::vector<const ReplayEntry*> batch{&ab, &bt};
    OptimizerConfig oc;
    oc.kind = OptKind::Adam;
    oc.learning_rate = 1e-2;
    Optimizer opt(oc);
    for (int k = 0; k < 5000; ++k) {
        ParamVector grad = ParamVector::zeros_like(critic.params());
        critic_update(critic, targets, batch, 0.9, grad);
        opt.apply(critic.params().values(), grad.values(), 0);
        soft_update(targets.critic.params(), critic.params(), 0.05);
    }
    EXPECT_NEAR(critic.forward(ab.s, ab.a, {}), 2.8, 1e-2);
    EXPECT_NEAR(critic.forward(bt.s, bt.a, {}), 2.0, 1e-2);
}

// ------------------------------------------------------------- actor update

TEST(ActorUpdate, GradientMatchesFiniteDifferencesOfMeanValue) {
    auto actor = make_actor(3, 2, range_set(1, 3), 41);
    auto critic = make_critic(3, 2, 3, 42);
    Rng rng(88);
    std::vector<ReplayEntry> entries;
    for (int i = 0; i < 5; ++i) entries.push_back(random_entry(3, 2, 3, rng));
    std::vector<const ReplayEntry*> batch;
    for (auto& e : entries) batch.push_back(&e);

    ActorGrads ag;
    ag.action = ParamVector::zeros_like(actor.action_net().params());
    ag.rep = ParamVector::zeros_like(actor.rep_net().params());
    actor_update(actor, critic, batch, ag);
    std::vector<double> gflat = ag.action.values();
    gflat.insert(gflat.end(), ag.rep.values().begin(), ag.rep.values().end());

    std::vector<double> flat = actor_flat(actor);
    ParamVector pv, analytic;
    pv.add_segment("flat", {flat.size()});
    analytic.add_segment("flat", {flat.size()});
    std::copy(flat.begin(), flat.end(), pv.values().begin());
    std::copy(gflat.begin(), gflat.end(), analytic.values().begin());
    auto f = [&](const ParamVector& p) {
        DdpgActor probe = actor;
        set_actor_flat(probe, p.values());
        return -mean_q(probe, critic, batch);  // descent objective
    };
    EXPECT_LT(check_gradient(f, pv, analytic), 1e-4);
}

TEST(ActorUpdate, RepetitionGradientFlowsFromCritic) {
    auto actor = make_actor(3, 1, range_set(1, 4), 43);
    auto critic = make_critic(3, 1, 4, 44);
    Rng rng(89);
    std::vector<ReplayEntry> entries;
    for (int i = 0; i < 4; ++i) entries.push_back(random_entry(3, 1, 4, rng));
    std::vector<const ReplayEntry*> batch;
    for (auto& e : entries) batch.push_back(&e);
    ActorGrads ag;
    ag.action = ParamVector::zeros_like(actor.action_net().params());
    ag.rep = ParamVector::zeros_like(actor.rep_net().params());
    actor_update(actor, critic, batch, ag);
    double norm = 0.0;
    for (std::size_t i = 0; i < ag.rep.size(); ++i) norm += ag.rep[i] * ag.rep[i];
    EXPECT_GT(norm, 1e-12) << "repetition head must receive value gradients";
}

TEST(ActorUpdate, ValueBlindToRepetitionGivesExactZeroRepetitionGradient) {
    auto actor = make_actor(3, 1, range_set(1, 4), 45);
    CriticNet critic(3, 1, 4, {8, 7}, Activation::Tanh);
    Rng ir(derive_seed(46, "critic"));
    critic.init(ir, 1.0);
    // zero every second-layer weight that reads the repetition inputs
    auto w2 = critic.params().segment("W2");
    std::size_t z = 8 + 1 + 4;
    for (std::size_t row = 0; row < 7; ++row) {
        for (std::size_t col = 8 + 1; col < z; ++col) w2[row * z + col] = 0.0;
    }
    Rng rng(90);
    std::vector<ReplayEntry> entries;
    for (int i = 0; i < 4; ++i) entries.push_back(random_entry(3, 1, 4, rng));
    std::vector<const ReplayEntry*> batch;
    for (auto& e : entries) batch.push_back(&e);
    ActorGrads ag;
    ag.action = ParamVector::zeros_like(actor.action_net().params());
    ag.rep = ParamVector::zeros_like(actor.rep_net().params());
    actor_update(actor, critic, batch, ag);
    for (std::size_t i = 0; i < ag.rep.size(); ++i) EXPECT_EQ(ag.rep[i], 0.0);
}

TEST(ActorUpdate, TinyStepIncreasesBatchMeanValue) {
    auto actor = make_actor(3, 2, range_set(1, 3), 47);
    auto critic = make_critic(3, 2, 3, 48);
    Rng rng(91);
    std::vector<ReplayEntry> entries;
    for (int i = 0; i < 8; ++i) entries.push_back(random_entry(3, 2, 3, rng));
    std::vector<const ReplayEntry*> batch;
    for (auto& e : entries) batch.push_back(&e);
    double before = mean_q(actor, critic, batch);
    ActorGrads ag;
    ag.action = ParamVector::zeros_like(actor.action_net().params());
    ag.rep = ParamVector::zeros_like(actor.rep_net().params());
    actor_update(actor, critic, batch, ag);
    const double lr = 1e-4;
    for (std::size_t i = 0; i < ag.action.size(); ++i) {
        actor.action_net().params()[i] -= lr * ag.action[i];
    }
    for (std::size_t i = 0; i < ag.rep.size(); ++i) {
        actor.rep_net().params()[i] -= lr * ag.rep[i];
    }
    EXPECT_GT(mean_q(actor, critic, batch), before);
}

// ------------------------------------------------------------------ training

TEST(Train, SingletonMatchesPlainDdpgBitwise) {
    const std::uint64_t master = 2024;
    DdpgConfig cfg;
    cfg.replay_capacity = 256;
    cfg.batch_size = 16;
    cfg.total_train_steps = 400;
    cfg.log_every = 100;
    cfg.hidden = {16, 16};
    cfg.gamma = 0.99;

    PointMass env_f(7, 60), env_p(7, 60);
    const auto& space = env_f.spec().action_space;

    DdpgActor factored(4, space, range_set(1, 1), cfg.hidden, Activation::Tanh, master);
    CriticNet critic_f(4, 1, 0, cfg.hidden, Activation::Tanh);
    {
        Rng r(derive_seed(master, "critic"));
        critic_f.init(r);
    }

    Mlp plain({4, 16, 16, 1}, Activation::Tanh, OutputTransform::BoundedTanh);
    plain.set_bounds(space.lo, space.hi);
    {
        Rng r(derive_seed(master, "action"));
        plain.init(r, 0.01);
    }
    CriticNet critic_p(4, 1, 0, cfg.hidden, Activation::Tanh);
    {
        Rng r(derive_seed(master, "critic"));
        critic_p.init(r);
    }

    auto log_f = train_figar_ddpg(cfg, env_f, factored, critic_f, master);
    auto log_p = train_plain_ddpg(cfg, env_p, plain, critic_p, master, space);

    const auto& af = factored.action_net().params().values();
    const auto& ap = plain.params().values();
    ASSERT_EQ(af.size(), ap.size());
    for (std::size_t i = 0; i < af.size(); ++i) EXPECT_EQ(af[i], ap[i]) << "actor param " << i;
    const auto& cf = critic_f.params().values();
    const auto& cp = critic_p.params().values();
    ASSERT_EQ(cf.size(), cp.size());
    for (std::size_t i = 0; i < cf.size(); ++i) EXPECT_EQ(cf[i], cp[i]) << "critic param " << i;
    ASSERT_EQ(log_f.size(), log_p.size());
    for (std::size_t i = 0; i < log_f.size(); ++i) {
        EXPECT_EQ(log_f[i].mean_episode_return, log_p[i].mean_episode_return);
        EXPECT_EQ(log_f[i].critic_loss, log_p[i].critic_loss);
    }
}

TEST(Train, RunsWithRepetitionsAndLogs) {
    DdpgConfig cfg;
    cfg.replay_capacity = 256;
    cfg.batch_size = 16;
    cfg.total_train_steps = 600;
    cfg.log_every = 150;
    cfg.hidden = {16, 16};
    PointMass env(3, 60);
    const auto& space = env.spec().action_space;
    DdpgActor actor(4, space, range_set(1, 4), cfg.hidden, Activation::Tanh, 5);
    CriticNet critic(4, 1, 4, cfg.hidden, Activation::Tanh);
    Rng r(derive_seed(5, "critic"));
    critic.init(r);
    auto log = train_figar_ddpg(cfg, env, actor, critic, 5);
    ASSERT_EQ(log.size(), 4u);
    for (const auto& row : log) {
        EXPECT_GE(row.mean_repetition, 1.0);
        EXPECT_LE(row.mean_repetition, 4.0);
        EXPECT_TRUE(std::isfinite(row.critic_loss));
    }
    PointMass eval_env(99, 60);
    auto stats = ddpg_evaluate(actor, eval_env, 5, cfg.gamma);
    EXPECT_TRUE(std::isfinite(stats.mean_return));
    double mass = 0.0;
    for (double h : stats.histogram) mass += h;
    EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(Train, RejectsBadConfig) {
    PointMass env(1, 40);
    const auto& space = env.spec().action_space;
    DdpgActor actor(4, space, range_set(1, 2), {8, 8}, Activation::Tanh, 1);
    CriticNet critic(4, 1, 2, {8, 8}, Activation::Tanh);
    DdpgConfig bad;
    bad.total_train_steps = 0;
    EXPECT_THROW(train_figar_ddpg(bad, env, actor, critic, 1), std::invalid_argument);
    DdpgConfig small;
    small.replay_capacity = 8;
    small.batch_size = 64;
    small.total_train_steps = 10;
    EXPECT_THROW(train_figar_ddpg(small, env, actor, critic, 1), std::invalid_argument);
    DdpgConfig tau;
    tau.total_train_steps = 10;
    tau.tau = 0.0;
    EXPECT_THROW(train_figar_ddpg(tau, env, actor, critic, 1), std::invalid_argument);
}

}  // namespace
}  // namespace figar
