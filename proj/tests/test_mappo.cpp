#include <doctest.h>

#include <cmath>
#include <random>

#include "glora/mappo.hpp"

using namespace glora;

namespace {

Config tiny_config() {
    Config cfg;
    cfg.env.num_uavs = 2;
    cfg.env.num_eds = 4;
    cfg.env.quota = 3;
    cfg.env.episode_steps = 4;
    cfg.ppo.hidden_dim = 8;
    cfg.ppo.episodes = 2;
    cfg.ppo.buffer_episodes = 2;
    cfg.ppo.epochs_per_update = 1;
    return cfg;
}

// Direct double-loop evaluation of A_t = sum_l (gamma*lambda)^l * delta_{t+l}.
std::vector<double> gae_oracle(const std::vector<double>& rewards,
                               const std::vector<double>& values,
                               const std::vector<bool>& dones, double gamma,
                               double lambda) {
    const std::size_t n = rewards.size();
    std::vector<double> delta(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double next_v = (t + 1 < n && !dones[t]) ? values[t + 1] : 0.0;
        delta[t] = rewards[t] + gamma * next_v - values[t];
    }
    std::vector<double> adv(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double w = 1.0;
        for (std::size_t l = t; l < n; ++l) {
            adv[t] += w * delta[l];
            if (dones[l]) break;
            w *= gamma * lambda;
        }
    }
    return adv;
}

}  // namespace

TEST_CASE("GAE matches the brute-force oracle") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> len(1, 40);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = static_cast<std::size_t>(len(rng));
        std::vector<double> rewards(n), values(n);
        std::vector<bool> dones(n, false);
        dones[n - 1] = true;
        for (auto& r : rewards) r = 100.0 * normal(rng);
        for (auto& v : values) v = 100.0 * normal(rng);
        GaeResult got = compute_gae(rewards, values, dones, 0.9, 0.95);
        auto expected = gae_oracle(rewards, values, dones, 0.9, 0.95);
        for (std::size_t t = 0; t < n; ++t) {
            CHECK(got.advantages[t] ==
                  doctest::Approx(expected[t]).epsilon(1e-12));
            CHECK(got.returns[t] ==
                  doctest::Approx(expected[t] + values[t]).epsilon(1e-12));
        }
    }
}

TEST_CASE("GAE limit cases") {
    std::vector<double> rewards{1.0, 2.0, 3.0};
    std::vector<double> values{0.5, -0.25, 0.75};
    std::vector<bool> dones{false, false, true};

    SUBCASE("lambda = 0 reduces to one-step TD residuals") {
        GaeResult g = compute_gae(rewards, values, dones, 0.9, 0.0);
        CHECK(g.advantages[0] ==
              doctest::Approx(1.0 + 0.9 * -0.25 - 0.5).epsilon(1e-12));
        CHECK(g.advantages[1] ==
              doctest::Approx(2.0 + 0.9 * 0.75 + 0.25).epsilon(1e-12));
        CHECK(g.advantages[2] == doctest::Approx(3.0 - 0.75).epsilon(1e-12));
    }

    SUBCASE("lambda = 1 gives discounted-return minus value") {
        GaeResult g = compute_gae(rewards, values, dones, 0.9, 1.0);
        const double g2 = 3.0;
        const double g1 = 2.0 + 0.9 * g2;
        const double g0 = 1.0 + 0.9 * g1;
        CHECK(g.advantages[0] == doctest::Approx(g0 - 0.5).epsilon(1e-12));
        CHECK(g.advantages[1] == doctest::Approx(g1 + 0.25).epsilon(1e-12));
        CHECK(g.advantages[2] == doctest::Approx(g2 - 0.75).epsilon(1e-12));
    }

    SUBCASE("misaligned inputs are rejected") {
        CHECK_THROWS_AS(compute_gae({1.0}, {1.0, 2.0}, {true}, 0.9, 0.95),
                        std::invalid_argument);
    }
}

TEST_CASE("categorical sampling follows the distribution") {
    std::vector<double> lp{std::log(0.2), std::log(0.3), std::log(0.5)};
    std::mt19937_64 rng(47);
    std::vector<int> counts(3, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[sample_categorical(lp, rng)];
    CHECK(std::abs(counts[0] / double(n) - 0.2) < 0.01);
    CHECK(std::abs(counts[1] / double(n) - 0.3) < 0.01);
    CHECK(std::abs(counts[2] / double(n) - 0.5) < 0.01);

    SUBCASE("non-finite logits are rejected") {
        CHECK_THROWS_AS(
            sample_categorical({std::nan(""), -1.0}, rng), std::runtime_error);
    }

    SUBCASE("entropy of the distribution") {
        const double expected = -(0.2 * std::log(0.2) + 0.3 * std::log(0.3) +
                                  0.5 * std::log(0.5));
        CHECK(categorical_entropy(lp) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("actor forward: heads are normalized, joint terms sum per head") {
    std::mt19937_64 rng(5);
    EnvConfig env;
    ActorNet net = ActorNet::create(20, 16, head_sizes(env), rng);
    std::normal_distribution<double> normal;
    std::vector<double> obs(20);
    for (auto& v : obs) v = normal(rng);
    auto f = net.forward(nn::Tensor::from_values(obs),
                         nn::Tensor::zeros(16));
    CHECK(f.log_probs_dir.size() == 17);
    CHECK(f.log_probs_speed.size() == 6);
    CHECK(f.log_probs_sf.size() == 6);
    CHECK(f.log_probs_tp.size() == 5);
    for (const nn::Tensor* lp :
         {&f.log_probs_dir, &f.log_probs_speed, &f.log_probs_sf, &f.log_probs_tp}) {
        double total = 0.0;
        for (double v : lp->values()) total += std::exp(v);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }

    ActionIndices idx{3, 2, 1, 4};
    const double expected_lp = f.log_probs_dir.values()[3] +
                               f.log_probs_speed.values()[2] +
                               f.log_probs_sf.values()[1] +
                               f.log_probs_tp.values()[4];
    CHECK(joint_log_prob(f, idx).item() ==
          doctest::Approx(expected_lp).epsilon(1e-12));
    const double expected_h = categorical_entropy(f.log_probs_dir.values()) +
                              categorical_entropy(f.log_probs_speed.values()) +
                              categorical_entropy(f.log_probs_sf.values()) +
                              categorical_entropy(f.log_probs_tp.values());
    CHECK(joint_entropy(f).item() ==
          doctest::Approx(expected_h).epsilon(1e-12));
}

TEST_CASE("surrogate values at and beyond the clip boundary") {
    auto surr_value = [](double lp_new, double lp_old, double adv) {
        nn::Tensor lp = nn::Tensor::from_values({lp_new});
        return actor_surrogate(lp, lp_old, adv, 0.2).item();
    };
    // ratio = 1: surrogate is just the advantage.
    CHECK(surr_value(-1.0, -1.0, 2.5) == doctest::Approx(2.5));
    // Large positive ratio with positive advantage clips at 1.2 * A.
    CHECK(surr_value(0.0, -2.0, 1.0) == doctest::Approx(1.2));
    // Large positive ratio with negative advantage stays unclipped (min).
    CHECK(surr_value(0.0, -2.0, -1.0) ==
          doctest::Approx(-std::exp(2.0)).epsilon(1e-12));
    // Tiny ratio with negative advantage clips at 0.8 * A.
    CHECK(surr_value(-3.0, 0.0, -1.0) == doctest::Approx(-0.8));
}

TEST_CASE("actor loss gradient pushes up the log-prob when A > 0") {
    nn::Tensor lp = nn::Tensor::zeros(1, 1, true);
    lp.values()[0] = -1.3;
    nn::Tensor loss =
        actor_loss({actor_surrogate(lp, -1.3, 3.0, 0.2)}, {}, 0.0);
    nn::backward(loss);
    // d(-ratio*A)/dlp at ratio=1 is -A.
    CHECK(lp.grad()[0] == doctest::Approx(-3.0).epsilon(1e-12));

    nn::Tensor lp2 = nn::Tensor::zeros(1, 1, true);
    lp2.values()[0] = -1.3;
    nn::Tensor loss2 =
        actor_loss({actor_surrogate(lp2, -1.3, -3.0, 0.2)}, {}, 0.0);
    nn::backward(loss2);
    CHECK(lp2.grad()[0] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("clipped ratios stop contributing gradient") {
    // ratio far above 1 + eps with positive advantage: both branches of the
    // min are flat or clipped, so the gradient vanishes.
    nn::Tensor lp = nn::Tensor::zeros(1, 1, true);
    lp.values()[0] = 0.0;
    nn::Tensor loss = actor_loss({actor_surrogate(lp, -2.0, 1.0, 0.2)}, {}, 0.0);
    nn::backward(loss);
    CHECK(lp.grad()[0] == 0.0);
}

TEST_CASE("critic term takes the worse of clipped and unclipped errors") {
    auto term = [](double v_new, double v_old, double ret) {
        nn::Tensor v = nn::Tensor::from_values({v_new});
        return critic_term(v, v_old, ret, 0.2).item();
    };
    CHECK(term(1.0, 1.0, 1.5) == doctest::Approx(0.25));
    // New value ran far from the old one; the clipped error dominates.
    CHECK(term(2.0, 1.0, 2.0) == doctest::Approx(0.64));  // clip to 1.2
    CHECK(term(0.0, 1.0, 0.0) == doctest::Approx(0.64));  // clip to 0.8
}

TEST_CASE("value normalizer") {
    SUBCASE("disabled is the identity") {
        ValueNormalizer vn(false);
        vn.update({10.0, 20.0});
        CHECK(vn.normalize(5.0) == 5.0);
        CHECK(vn.denormalize(5.0) == 5.0);
    }

    SUBCASE("running stats standardize and invert") {
        ValueNormalizer vn(true);
        std::mt19937_64 rng(8);
        std::normal_distribution<double> normal(-2000.0, 300.0);
        std::vector<double> batch;
        for (int i = 0; i < 5000; ++i) batch.push_back(normal(rng));
        vn.update(batch);
        double m = 0.0;
        for (double x : batch) m += vn.normalize(x);
        m /= batch.size();
        CHECK(std::abs(m) < 1e-9);
        CHECK(vn.denormalize(vn.normalize(-1234.5)) ==
              doctest::Approx(-1234.5).epsilon(1e-12));
    }
}

TEST_CASE("trainer is deterministic for a fixed config") {
    Config cfg = tiny_config();
    Trainer a(cfg);
    Trainer b(cfg);
    TrainingReport ra = a.train();
    TrainingReport rb = b.train();
    CHECK(ra.csv() == rb.csv());
    CHECK(a.checkpoint() == b.checkpoint());
    REQUIRE(ra.episodes.size() == 2);
    CHECK(ra.episodes[0].step_count == 4);

    SUBCASE("a different seed changes the trajectory") {
        Config other = cfg;
        other.seed = 123;
        Trainer c(other);
        CHECK(c.train().csv() != ra.csv());
    }
}

TEST_CASE("update guards") {
    Config cfg = tiny_config();
    Trainer t(cfg);

    SUBCASE("empty buffer is rejected") {
        RolloutBuffer empty;
        CHECK_THROWS_AS(t.update(empty), std::logic_error);
    }

    SUBCASE("zero epochs leaves the parameters untouched") {
        Config frozen = tiny_config();
        frozen.ppo.epochs_per_update = 0;
        Trainer ft(frozen);
        json before = ft.checkpoint();
        ft.train();
        CHECK(ft.checkpoint() == before);
    }
}

TEST_CASE("training moves the parameters") {
    Config cfg = tiny_config();
    Trainer t(cfg);
    json before = t.checkpoint();
    t.train();
    CHECK(t.checkpoint() != before);
}

TEST_CASE("checkpoint round trip restores behavior") {
    Config cfg = tiny_config();
    Trainer a(cfg);
    a.train();
    json snap = a.checkpoint();
    Trainer b(cfg);
    CHECK(b.checkpoint() != snap);
    b.load_checkpoint(snap);
    CHECK(b.checkpoint() == snap);
}

TEST_CASE("architecture switches") {
    Config cfg = tiny_config();

    SUBCASE("MAPPO: one central critic over the joint observation") {
        Trainer t(cfg);
        json ck = t.checkpoint();
        CHECK(ck["actors"].size() == 2);
        REQUIRE(ck["critics"].size() == 1);
        const std::size_t obs_dim = 11 + 4 * cfg.env.quota;
        CHECK(ck["critics"][0][0]["cols"] == 2 * obs_dim + 2);
    }

    SUBCASE("IPPO: per-agent critics on local observations") {
        Config ippo = cfg;
        ippo.ppo.central_critic = false;
        Trainer t(ippo);
        json ck = t.checkpoint();
        CHECK(ck["actors"].size() == 2);
        REQUIRE(ck["critics"].size() == 2);
        CHECK(ck["critics"][0][0]["cols"] == 11 + 4 * cfg.env.quota);
    }

    SUBCASE("shared actor gets an agent one-hot appended") {
        Config shared = cfg;
        shared.ppo.share_actor = true;
        Trainer t(shared);
        json ck = t.checkpoint();
        REQUIRE(ck["actors"].size() == 1);
        CHECK(ck["actors"][0][0]["cols"] == 11 + 4 * cfg.env.quota + 2);
    }

    SUBCASE("ippo_variant runs end to end") {
        Config small = cfg;
        small.ppo.episodes = 1;
        TrainingReport r = ippo_variant(small);
        CHECK(r.episodes.size() == 1);
    }
}

TEST_CASE("global observation layout") {
    Config cfg = tiny_config();
    Trainer t(cfg);
    std::vector<std::vector<double>> local{{1.0, 2.0}, {3.0, 4.0}};
    CHECK(t.global_observation(local, 0) ==
          std::vector<double>{1.0, 2.0, 3.0, 4.0, 1.0, 0.0});
    CHECK(t.global_observation(local, 1) ==
          std::vector<double>{1.0, 2.0, 3.0, 4.0, 0.0, 1.0});
}

TEST_CASE("training report CSV") {
    TrainingReport r;
    EpisodeMetrics m;
    m.episode = 0;
    m.step_count = 4;
    m.team_reward = -1.5;
    m.agent_rewards = {-1.0, -0.5};
    r.episodes.push_back(m);
    const std::string csv = r.csv();
    CHECK(csv.find("episode,step_count,team_reward,ee_sys,total_tx_power,"
                   "propulsion_energy,collisions,arrivals,reward_agent0,"
                   "reward_agent1") == 0);
    CHECK(csv.find("-1.5") != std::string::npos);
}
