// Standalone acceptance gate for the simulator and learner math. Each
// criterion prints exactly one PASS/FAIL line; the exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "glora/association.hpp"
#include "glora/channel.hpp"
#include "glora/energy.hpp"
#include "glora/env.hpp"
#include "glora/lora_phy.hpp"
#include "glora/mappo.hpp"

using namespace glora;

namespace {

int failures = 0;

void report(int id, const char* what, bool ok, const std::string& detail = "") {
    std::printf("%s: criterion %d (%s)%s%s\n", ok ? "PASS" : "FAIL", id, what,
                detail.empty() ? "" : " - ", detail.c_str());
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

// --- criterion 1: channel fidelity ------------------------------------------

long double oracle_path_loss(long double d, long double phi_deg,
                             const ChannelParams& p) {
    const long double pi = 3.14159265358979323846264338327950288L;
    const long double fspl =
        20.0L * std::log10(4.0L * pi * (long double)p.carrier_hz * d /
                           (long double)p.light_speed);
    const long double p_los =
        1.0L / (1.0L + (long double)p.los_offset *
                           std::exp(-(long double)p.los_slope *
                                    (phi_deg - (long double)p.los_offset)));
    return fspl + (long double)p.eta_los_db * p_los +
           (long double)p.eta_nlos_db * (1.0L - p_los);
}

bool criterion_channel() {
    const auto t0 = std::chrono::steady_clock::now();
    ChannelParams p;
    bool ok = std::abs(fspl_db(150.0, p) - 74.74) <= 0.01;
    ok = ok && std::abs(los_probability(4.88, p) - 1.0 / 5.88) <= 1e-9;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(1.0, 3000.0);
    std::uniform_real_distribution<double> phi(0.0, 90.0);
    for (int i = 0; i < 1000 && ok; ++i) {
        const double d = dist(rng);
        const double e = phi(rng);
        ok = std::abs(a2g_path_loss_db(d, e, p) -
                      (double)oracle_path_loss(d, e, p)) <= 1e-9;
    }
    const double dt = seconds_since(t0);
    return ok && dt < 1.0;
}

// --- criterion 2: SF demodulation thresholds -----------------------------------

bool criterion_sf_table() {
    const std::pair<int, double> table[] = {{7, -7.5},  {8, -10.0}, {9, -12.5},
                                            {10, -15.0}, {11, -17.5}, {12, -20.0}};
    bool ok = true;
    for (const auto& [sf, thr] : table) {
        ok = ok && sf_threshold_db(sf) == thr;
        ok = ok && link_feasible(thr, sf);              // boundary equality
        ok = ok && !link_feasible(thr - 1e-12, sf);
        ok = ok && link_feasible(thr + 0.5, sf);
    }
    return ok;
}

// --- criterion 3: association oracle ----------------------------------------

bool criterion_association() {
    const auto t0 = std::chrono::steady_clock::now();
    ChannelParams chan;
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::size_t> u_count(1, 5);
    std::uniform_int_distribution<std::size_t> v_count(0, 70);
    std::uniform_real_distribution<double> pos(0.0, 1000.0);
    const std::size_t quota = 25;
    const double r_comm = 750.0;
    bool ok = true;
    for (int trial = 0; trial < 500 && ok; ++trial) {
        std::vector<Position3> uavs, eds;
        const std::size_t nu = u_count(rng), nv = v_count(rng);
        for (std::size_t u = 0; u < nu; ++u) uavs.push_back({pos(rng), pos(rng), 150});
        for (std::size_t v = 0; v < nv; ++v) eds.push_back({pos(rng), pos(rng), 0});
        GainMatrix g = build_gain_matrix(uavs, eds, chan);
        AssociationMap m = associate(g, uavs, eds, quota, r_comm);

        // Oracle: straight greedy re-execution.
        std::vector<int> serving(nv, -1);
        std::vector<std::size_t> load(nu, 0);
        for (std::size_t v = 0; v < nv; ++v) {
            int best = -1;
            for (std::size_t u = 0; u < nu; ++u) {
                if (load[u] >= quota || distance_3d(uavs[u], eds[v]) > r_comm)
                    continue;
                if (best < 0 ||
                    g.at(u, v) > g.at(static_cast<std::size_t>(best), v)) {
                    best = static_cast<int>(u);
                }
            }
            if (best >= 0) {
                serving[v] = best;
                ++load[static_cast<std::size_t>(best)];
            }
        }
        ok = ok && m.serving_uav == serving;
        // Constraints: one serving UAV per ED (structural in the map),
        // range, and quota.
        for (std::size_t u = 0; u < nu; ++u) ok = ok && m.load[u] <= quota;
        for (std::size_t v = 0; v < nv; ++v) {
            if (m.serving_uav[v] < 0) continue;
            ok = ok && distance_3d(uavs[static_cast<std::size_t>(m.serving_uav[v])],
                                   eds[v]) <= r_comm;
        }
    }
    return ok && seconds_since(t0) < 5.0;
}

// --- criterion 4: energy model ------------------------------------------------

bool criterion_energy() {
    RotorParams p;  // thrust_to_weight (kappa) defaults to 1
    const HoverPower h = hover_power(p);
    bool ok = std::abs(propulsion_power_watt(0.0, p) - (h.blade_profile + h.induced)) /
                  (h.blade_profile + h.induced) <=
              1e-9;
    for (double budget : {170.0, 200.0, 300.0, 500.0}) {
        RotorParams capped = p;
        capped.p_max_watt = budget;
        for (int req = 0; req <= 5; ++req) {
            const double v = enforce_power_budget(req * 6.0, 30.0, 5, capped);
            ok = ok && propulsion_power_watt(v, capped) <= budget;
        }
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ee(0.0, 1e6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> per_uav;
        const std::size_t n = 1 + rng() % 6;
        for (std::size_t i = 0; i < n; ++i) per_uav.push_back(ee(rng));
        double mean = 0.0;
        for (double x : per_uav) mean += x;
        mean /= static_cast<double>(per_uav.size());
        ok = ok && weighted_global_ee(per_uav) == mean;
    }
    return ok;
}

// --- criterion 5: gradient integrity ------------------------------------------

bool fd_check(nn::ParamStore& store, const std::function<nn::Tensor()>& build,
              double h = 1e-5, double tol = 1e-4) {
    store.zero_grad();
    nn::Tensor loss = build();
    nn::backward(loss);
    bool ok = true;
    for (auto& [name, param] : const_cast<
             std::vector<std::pair<std::string, nn::Tensor>>&>(store.params())) {
        auto& values = param.values();
        const auto& grad = param.grad();
        for (std::size_t i = 0; i < values.size() && ok; ++i) {
            const double orig = values[i];
            nn::NoGradGuard no_grad;
            values[i] = orig + h;
            const double up = build().item();
            values[i] = orig - h;
            const double down = build().item();
            values[i] = orig;
            const double fd = (up - down) / (2.0 * h);
            const double ref = std::max({std::abs(fd), std::abs(grad[i]), 1e-4});
            ok = std::abs(grad[i] - fd) / ref <= tol;
        }
        if (!ok) break;
    }
    return ok;
}

bool criterion_gradients() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::normal_distribution<double> normal;

    for (int seed = 0; seed < 20 && ok; ++seed) {  // MLP
        std::mt19937_64 rng(100 + seed);
        nn::ParamStore store;
        nn::Linear l1 = nn::Linear::create(store, "l1", 4, 5, rng);
        nn::Linear l2 = nn::Linear::create(store, "l2", 5, 2, rng);
        std::vector<double> x(4);
        for (auto& v : x) v = normal(rng);
        ok = fd_check(store, [&] {
            nn::Tensor y = l2.forward(nn::tanh_op(l1.forward(nn::Tensor::from_values(x))));
            return nn::sum(nn::mul(y, y));
        });
    }

    for (int seed = 0; seed < 20 && ok; ++seed) {  // GRU, two steps
        std::mt19937_64 rng(200 + seed);
        nn::ParamStore store;
        nn::GruCell gru = nn::GruCell::create(store, "gru", 3, 4, rng);
        std::vector<std::vector<double>> xs(2, std::vector<double>(3));
        for (auto& x : xs)
            for (auto& v : x) v = normal(rng);
        ok = fd_check(store, [&] {
            nn::Tensor h = nn::Tensor::zeros(4);
            for (const auto& x : xs) h = gru.forward(nn::Tensor::from_values(x), h);
            return nn::sum(nn::mul(h, h));
        });
    }

    for (int seed = 0; seed < 20 && ok; ++seed) {  // log-prob and entropy
        std::mt19937_64 rng(300 + seed);
        nn::ParamStore store;
        nn::Linear head = nn::Linear::create(store, "head", 4, 6, rng);
        std::vector<double> x(4);
        for (auto& v : x) v = normal(rng);
        const std::size_t target = rng() % 6;
        ok = fd_check(store, [&] {
            nn::Tensor lp = nn::log_softmax(head.forward(nn::Tensor::from_values(x)));
            return nn::pick(lp, target);
        });
        ok = ok && fd_check(store, [&] {
            nn::Tensor lp = nn::log_softmax(head.forward(nn::Tensor::from_values(x)));
            return nn::entropy_from_log_probs(lp);
        });
    }

    for (int seed = 0; seed < 20 && ok; ++seed) {  // actor loss at ratio ~ 1
        std::mt19937_64 rng(400 + seed);
        nn::ParamStore store;
        nn::Linear head = nn::Linear::create(store, "head", 4, 6, rng);
        std::vector<double> x(4);
        for (auto& v : x) v = normal(rng);
        const std::size_t target = rng() % 6;
        const double adv = normal(rng);
        double lp_old;
        {
            nn::NoGradGuard no_grad;
            nn::Tensor lp = nn::log_softmax(head.forward(nn::Tensor::from_values(x)));
            lp_old = lp.values()[target];  // ratio starts at 1, inside the band
        }
        ok = fd_check(store, [&] {
            nn::Tensor lp = nn::log_softmax(head.forward(nn::Tensor::from_values(x)));
            nn::Tensor surr = actor_surrogate(nn::pick(lp, target), lp_old, adv, 0.2);
            nn::Tensor ent = nn::entropy_from_log_probs(lp);
            return actor_loss({surr}, {ent}, 0.001);
        });
    }

    for (int seed = 0; seed < 20 && ok; ++seed) {  // critic loss inside the band
        std::mt19937_64 rng(500 + seed);
        nn::ParamStore store;
        nn::Linear l1 = nn::Linear::create(store, "l1", 4, 5, rng);
        nn::Linear head = nn::Linear::create(store, "head", 5, 1, rng);
        std::vector<double> x(4);
        for (auto& v : x) v = normal(rng);
        const double ret = normal(rng);
        double v_old;
        {
            nn::NoGradGuard no_grad;
            v_old = head.forward(nn::tanh_op(l1.forward(nn::Tensor::from_values(x))))
                        .item();
        }
        ok = fd_check(store, [&] {
            nn::Tensor v =
                head.forward(nn::tanh_op(l1.forward(nn::Tensor::from_values(x))));
            return critic_loss({critic_term(v, v_old, ret, 0.2)});
        });
    }

    return ok && seconds_since(t0) < 30.0;
}

// --- criterion 6: GAE oracle ---------------------------------------------------

bool criterion_gae() {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> len(1, 50);
    bool ok = true;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const std::size_t n = static_cast<std::size_t>(len(rng));
        std::vector<double> rewards(n), values(n);
        std::vector<bool> dones(n, false);
        dones[n - 1] = true;
        for (auto& r : rewards) r = 50.0 * normal(rng);
        for (auto& v : values) v = 50.0 * normal(rng);
        GaeResult got = compute_gae(rewards, values, dones, 0.9, 0.95);
        for (std::size_t t = 0; t < n && ok; ++t) {
            double adv = 0.0, w = 1.0;
            for (std::size_t l = t; l < n; ++l) {
                const double nv = (l + 1 < n && !dones[l]) ? values[l + 1] : 0.0;
                adv += w * (rewards[l] + 0.9 * nv - values[l]);
                if (dones[l]) break;
                w *= 0.9 * 0.95;
            }
            ok = std::abs(got.advantages[t] - adv) <=
                 1e-12 * std::max(1.0, std::abs(adv));
        }
    }

    // lambda = 0: one-step TD residuals, bitwise.
    std::vector<double> r{1.0, 2.0, 3.0}, v{0.5, -0.25, 0.75};
    std::vector<bool> d{false, false, true};
    GaeResult g0 = compute_gae(r, v, d, 0.9, 0.0);
    ok = ok && g0.advantages[0] == r[0] + 0.9 * v[1] - v[0];
    ok = ok && g0.advantages[1] == r[1] + 0.9 * v[2] - v[1];
    ok = ok && g0.advantages[2] == r[2] - v[2];

    // lambda = 1: discounted return minus value.
    GaeResult g1 = compute_gae(r, v, d, 0.9, 1.0);
    double G = 0.0;
    for (std::size_t t = r.size(); t-- > 0;) {
        G = r[t] + 0.9 * G;
        ok = ok && std::abs(g1.returns[t] - G) <= 1e-12 * std::max(1.0, std::abs(G));
        ok = ok && std::abs(g1.advantages[t] - (G - v[t])) <=
                       1e-12 * std::max(1.0, std::abs(G));
    }
    return ok;
}

// --- criterion 7: PPO clip semantics --------------------------------------------

bool criterion_clip() {
    auto grad_at = [](double lp_new, double lp_old, double adv) {
        nn::Tensor lp = nn::Tensor::zeros(1, 1, true);
        lp.values()[0] = lp_new;
        nn::Tensor loss = actor_loss({actor_surrogate(lp, lp_old, adv, 0.2)}, {}, 0.0);
        nn::backward(loss);
        return lp.grad()[0];
    };
    // ratio = e^2 >> 1.2 with A > 0 and ratio = e^-2 << 0.8 with A < 0: the
    // clip caps the pushing side, so no gradient flows.
    bool ok = std::abs(grad_at(0.0, -2.0, 1.5)) < 1e-10;
    ok = ok && std::abs(grad_at(-2.0, 0.0, -1.5)) < 1e-10;
    // Control: inactive clip keeps a finite gradient of the expected sign.
    ok = ok && grad_at(-1.0, -1.0, 1.5) < -1e-3;
    ok = ok && grad_at(-1.0, -1.0, -1.5) > 1e-3;
    return ok;
}

// --- criterion 12: reward arithmetic --------------------------------------------

bool criterion_reward() {
    EnvConfig cfg;  // omega = (10, 1e-5, 200, 2, 400)
    bool ok = true;

    RewardContext uplink;
    uplink.successful_uplink = true;
    uplink.cs_distance = 99.5;
    ok = ok && compute_reward(uplink, cfg) == -189.0;

    RewardContext crash;
    crash.collided = true;
    crash.cs_distance = 10.0;
    ok = ok && compute_reward(crash, cfg) == -220.0;

    RewardContext missed;
    missed.terminal = true;
    ok = ok && compute_reward(missed, cfg) == -400.0;
    missed.arrived = true;
    ok = ok && compute_reward(missed, cfg) == 0.0;

    RewardContext rich;
    rich.successful_uplink = true;
    rich.ee_sys = 3e5;
    rich.collided = true;
    rich.cs_distance = 42.25;
    rich.terminal = true;
    // Same IEEE evaluation order as the reward: w1*a + w2*EE - w3*coll - w4*d - w5.
    const double expected =
        cfg.w_assoc * 1.0 + cfg.w_ee * 3e5 - cfg.w_collision * 1.0 -
        cfg.w_cs_distance * 42.25 - cfg.w_arrival;
    ok = ok && compute_reward(rich, cfg) == expected;
    return ok;
}

}  // namespace

int main() {
    report(1, "channel fidelity", criterion_channel());
    report(2, "SF demodulation thresholds", criterion_sf_table());
    report(3, "association oracle equivalence", criterion_association());
    report(4, "energy model", criterion_energy());
    report(5, "gradient integrity", criterion_gradients());
    report(6, "GAE oracle", criterion_gae());
    report(7, "PPO clip semantics", criterion_clip());
    report(12, "reward arithmetic", criterion_reward());
    return failures;
}
