#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glora/config.hpp"
#include "glora/env.hpp"
#include "glora/nn.hpp"

namespace glora {

// ---------------------------------------------------------------------------
// Generalized advantage estimation.

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;  // advantages + values
};

// Exponentially weighted sum of TD residuals with terminal bootstrap 0.
inline GaeResult compute_gae(const std::vector<double>& rewards,
                             const std::vector<double>& values,
                             const std::vector<bool>& dones, double gamma,
                             double gae_lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n || dones.size() != n) {
        throw std::invalid_argument("compute_gae: sequences must be aligned");
    }
    GaeResult out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double running = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const double nonterminal = dones[i] ? 0.0 : 1.0;
        const double next_value = (i + 1 < n) ? values[i + 1] : 0.0;
        const double delta =
            rewards[i] + gamma * next_value * nonterminal - values[i];
        running = delta + gamma * gae_lambda * nonterminal * running;
        out.advantages[i] = running;
        out.returns[i] = running + values[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Actor / critic networks.

struct HeadSizes {
    std::size_t dir, speed, sf, tp;
    std::size_t total() const { return dir + speed + sf + tp; }
};

inline HeadSizes head_sizes(const EnvConfig& cfg) {
    return {static_cast<std::size_t>(cfg.direction_levels) + 1,
            static_cast<std::size_t>(cfg.speed_levels) + 1,
            static_cast<std::size_t>(kSfCount), static_cast<std::size_t>(kTpCount)};
}

// Observation -> linear+tanh -> GRU -> four categorical logit heads.
struct ActorNet {
    nn::ParamStore store;
    nn::Linear embed;
    nn::GruCell gru;
    nn::Linear head_dir, head_speed, head_sf, head_tp;
    std::size_t hidden_dim = 0;

    static ActorNet create(std::size_t obs_dim, std::size_t hidden,
                           const HeadSizes& heads, std::mt19937_64& rng) {
        ActorNet net;
        net.hidden_dim = hidden;
        net.embed = nn::Linear::create(net.store, "embed", obs_dim, hidden, rng);
        net.gru = nn::GruCell::create(net.store, "gru", hidden, hidden, rng);
        net.head_dir = nn::Linear::create(net.store, "head_dir", hidden, heads.dir,
                                          rng, 0.01);
        net.head_speed = nn::Linear::create(net.store, "head_speed", hidden,
                                            heads.speed, rng, 0.01);
        net.head_sf =
            nn::Linear::create(net.store, "head_sf", hidden, heads.sf, rng, 0.01);
        net.head_tp =
            nn::Linear::create(net.store, "head_tp", hidden, heads.tp, rng, 0.01);
        return net;
    }

    struct Forward {
        nn::Tensor log_probs_dir, log_probs_speed, log_probs_sf, log_probs_tp;
        nn::Tensor hidden;
    };

    Forward forward(const nn::Tensor& obs, const nn::Tensor& hidden) const {
        Forward f;
        nn::Tensor e = nn::tanh_op(embed.forward(obs));
        f.hidden = gru.forward(e, hidden);
        f.log_probs_dir = nn::log_softmax(head_dir.forward(f.hidden));
        f.log_probs_speed = nn::log_softmax(head_speed.forward(f.hidden));
        f.log_probs_sf = nn::log_softmax(head_sf.forward(f.hidden));
        f.log_probs_tp = nn::log_softmax(head_tp.forward(f.hidden));
        return f;
    }
};

struct CriticNet {
    nn::ParamStore store;
    nn::Linear embed;
    nn::GruCell gru;
    nn::Linear head;
    std::size_t hidden_dim = 0;

    static CriticNet create(std::size_t input_dim, std::size_t hidden,
                            std::mt19937_64& rng) {
        CriticNet net;
        net.hidden_dim = hidden;
        net.embed = nn::Linear::create(net.store, "embed", input_dim, hidden, rng);
        net.gru = nn::GruCell::create(net.store, "gru", hidden, hidden, rng);
        net.head = nn::Linear::create(net.store, "head", hidden, 1, rng);
        return net;
    }

    // Returns (value, next hidden).
    std::pair<nn::Tensor, nn::Tensor> forward(const nn::Tensor& input,
                                              const nn::Tensor& hidden) const {
        nn::Tensor e = nn::tanh_op(embed.forward(input));
        nn::Tensor h = gru.forward(e, hidden);
        return {head.forward(h), h};
    }
};

// Per-head independent categorical sampling; the joint log-prob and entropy
// are sums over heads.
struct SampledAction {
    ActionIndices indices;
    double log_prob = 0.0;
    double entropy = 0.0;
};

inline std::size_t sample_categorical(const std::vector<double>& log_probs,
                                      std::mt19937_64& rng) {
    for (double lp : log_probs) {
        if (!std::isfinite(lp)) {
            throw std::runtime_error("sample_categorical: non-finite logits");
        }
    }
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(rng);
    double cdf = 0.0;
    for (std::size_t i = 0; i < log_probs.size(); ++i) {
        cdf += std::exp(log_probs[i]);
        if (u < cdf) return i;
    }
    return log_probs.size() - 1;
}

inline double categorical_entropy(const std::vector<double>& log_probs) {
    double h = 0.0;
    for (double lp : log_probs) h -= std::exp(lp) * lp;
    return h;
}

inline SampledAction sample_action(const ActorNet::Forward& f,
                                   std::mt19937_64& rng) {
    SampledAction a;
    const auto pick_head = [&](const nn::Tensor& lp, int& idx) {
        const auto& v = lp.values();
        const std::size_t i = sample_categorical(v, rng);
        idx = static_cast<int>(i);
        a.log_prob += v[i];
        a.entropy += categorical_entropy(v);
    };
    pick_head(f.log_probs_dir, a.indices.dir_idx);
    pick_head(f.log_probs_speed, a.indices.speed_idx);
    pick_head(f.log_probs_sf, a.indices.sf_idx);
    pick_head(f.log_probs_tp, a.indices.tp_idx);
    return a;
}

inline nn::Tensor joint_log_prob(const ActorNet::Forward& f,
                                 const ActionIndices& idx) {
    nn::Tensor lp = nn::pick(f.log_probs_dir, static_cast<std::size_t>(idx.dir_idx));
    lp = nn::add(lp, nn::pick(f.log_probs_speed,
                              static_cast<std::size_t>(idx.speed_idx)));
    lp = nn::add(lp, nn::pick(f.log_probs_sf, static_cast<std::size_t>(idx.sf_idx)));
    lp = nn::add(lp, nn::pick(f.log_probs_tp, static_cast<std::size_t>(idx.tp_idx)));
    return lp;
}

inline nn::Tensor joint_entropy(const ActorNet::Forward& f) {
    nn::Tensor h = nn::entropy_from_log_probs(f.log_probs_dir);
    h = nn::add(h, nn::entropy_from_log_probs(f.log_probs_speed));
    h = nn::add(h, nn::entropy_from_log_probs(f.log_probs_sf));
    h = nn::add(h, nn::entropy_from_log_probs(f.log_probs_tp));
    return h;
}

// ---------------------------------------------------------------------------
// PPO objective terms.

// Clipped surrogate for one transition. log_prob_old and advantage are
// constants of the update batch.
inline nn::Tensor actor_surrogate(const nn::Tensor& log_prob_new,
                                  double log_prob_old, double advantage,
                                  double clip_range) {
    nn::Tensor ratio = nn::exp_op(nn::add_scalar(log_prob_new, -log_prob_old));
    nn::Tensor surr1 = nn::scale(ratio, advantage);
    nn::Tensor surr2 =
        nn::scale(nn::clip_band(ratio, 1.0 - clip_range, 1.0 + clip_range),
                  advantage);
    return nn::minimum(surr1, surr2);
}

// Negated mean of (surrogate + entropy bonus) over a batch of scalar terms.
inline nn::Tensor actor_loss(const std::vector<nn::Tensor>& surrogates,
                             const std::vector<nn::Tensor>& entropies,
                             double entropy_coeff) {
    if (surrogates.empty()) throw std::invalid_argument("actor_loss: empty batch");
    nn::Tensor total = nn::concat(surrogates);
    nn::Tensor obj = nn::sum(total);
    if (entropy_coeff != 0.0) {
        obj = nn::add(obj, nn::scale(nn::sum(nn::concat(entropies)), entropy_coeff));
    }
    return nn::scale(obj, -1.0 / static_cast<double>(surrogates.size()));
}

// Clipped value regression for one transition: max of the unclipped and
// band-clipped squared errors.
inline nn::Tensor critic_term(const nn::Tensor& value_new, double value_old,
                              double return_target, double clip_range) {
    nn::Tensor err = nn::add_scalar(value_new, -return_target);
    nn::Tensor clipped = nn::clip_band(value_new, value_old - clip_range,
                                       value_old + clip_range);
    nn::Tensor err_clip = nn::add_scalar(clipped, -return_target);
    return nn::maximum(nn::mul(err, err), nn::mul(err_clip, err_clip));
}

inline nn::Tensor critic_loss(const std::vector<nn::Tensor>& terms) {
    if (terms.empty()) throw std::invalid_argument("critic_loss: empty batch");
    return nn::scale(nn::sum(nn::concat(terms)),
                     1.0 / static_cast<double>(terms.size()));
}

// ---------------------------------------------------------------------------
// Rollout storage.

struct EpisodeTrace {
    // Indexed [step][agent].
    std::vector<std::vector<std::vector<double>>> observations;
    std::vector<std::vector<std::vector<double>>> global_observations;
    std::vector<std::vector<std::vector<double>>> actor_hidden;
    std::vector<std::vector<std::vector<double>>> critic_hidden;
    std::vector<std::vector<ActionIndices>> actions;
    std::vector<std::vector<double>> log_probs;
    std::vector<std::vector<double>> rewards;
    std::vector<std::vector<double>> values;
    std::vector<bool> dones;
};

struct RolloutBuffer {
    std::vector<EpisodeTrace> episodes;
    std::size_t capacity = 10;

    bool full() const { return episodes.size() >= capacity; }
    bool empty() const { return episodes.empty(); }
    void clear() { episodes.clear(); }
};

// Running standardizer for critic targets; keeps the value clip band
// meaningful regardless of the reward scale.
class ValueNormalizer {
  public:
    explicit ValueNormalizer(bool enabled) : enabled_(enabled) {}

    void update(const std::vector<double>& batch) {
        if (!enabled_) return;
        for (double x : batch) {
            ++count_;
            const double d = x - mean_;
            mean_ += d / static_cast<double>(count_);
            m2_ += d * (x - mean_);
        }
    }

    double std_dev() const {
        if (!enabled_ || count_ < 2) return 1.0;
        return std::max(std::sqrt(m2_ / static_cast<double>(count_)), 1e-6);
    }

    double normalize(double x) const {
        return enabled_ ? (x - mean_) / std_dev() : x;
    }
    double denormalize(double x) const {
        return enabled_ ? x * std_dev() + mean_ : x;
    }

  private:
    bool enabled_;
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// ---------------------------------------------------------------------------
// Training report.

struct EpisodeMetrics {
    std::size_t episode = 0;
    std::size_t step_count = 0;
    double team_reward = 0.0;
    double ee_sys = 0.0;            // episode sum of the per-step weighted EE
    double total_tx_power_w = 0.0;  // summed over steps
    double propulsion_energy_j = 0.0;
    std::size_t collisions = 0;
    std::size_t arrivals = 0;
    std::vector<double> agent_rewards;
};

struct TrainingReport {
    std::vector<EpisodeMetrics> episodes;
    json trajectories;  // last-episode per-step dump, when recorded

    static std::string format_double(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    std::string csv() const {
        std::ostringstream out;
        const std::size_t agents =
            episodes.empty() ? 0 : episodes.front().agent_rewards.size();
        out << "episode,step_count,team_reward,ee_sys,total_tx_power,"
               "propulsion_energy,collisions,arrivals";
        for (std::size_t u = 0; u < agents; ++u) out << ",reward_agent" << u;
        out << "\n";
        for (const auto& e : episodes) {
            out << e.episode << ',' << e.step_count << ','
                << format_double(e.team_reward) << ',' << format_double(e.ee_sys)
                << ',' << format_double(e.total_tx_power_w) << ','
                << format_double(e.propulsion_energy_j) << ',' << e.collisions
                << ',' << e.arrivals;
            for (double r : e.agent_rewards) out << ',' << format_double(r);
            out << "\n";
        }
        return out.str();
    }
};

// ---------------------------------------------------------------------------
// CTDE trainer: decentralized recurrent actors, centralized clipped-value
// critic. central_critic = false gives the IPPO ablation (per-agent critics
// on local observations only).

class Trainer {
  public:
    explicit Trainer(const Config& config)
        : cfg_(config),
          env_(config.env, config.channel, config.rotor),
          rng_(config.seed) {
        const std::size_t obs_dim = env_.observation_dim();
        const std::size_t agents = env_.num_agents();
        const HeadSizes heads = head_sizes(cfg_.env);
        const auto hidden = static_cast<std::size_t>(cfg_.ppo.hidden_dim);
        actor_in_dim_ = obs_dim + (cfg_.ppo.share_actor ? agents : 0);
        const std::size_t actor_count = cfg_.ppo.share_actor ? 1 : agents;
        actors_.reserve(actor_count);
        for (std::size_t i = 0; i < actor_count; ++i) {
            actors_.push_back(ActorNet::create(actor_in_dim_, hidden, heads, rng_));
        }
        critic_in_dim_ = cfg_.ppo.central_critic ? obs_dim * agents + agents
                                                 : obs_dim;
        const std::size_t critic_count = cfg_.ppo.central_critic ? 1 : agents;
        critics_.reserve(critic_count);
        for (std::size_t i = 0; i < critic_count; ++i) {
            critics_.push_back(CriticNet::create(critic_in_dim_, hidden, rng_));
        }
        // Optimizers keep references into the nets, so the net vectors must be
        // fully built (no more reallocation) before these are constructed.
        for (auto& a : actors_) {
            actor_optims_.emplace_back(a.store, cfg_.ppo.learning_rate);
        }
        for (auto& c : critics_) {
            critic_optims_.emplace_back(c.store, cfg_.ppo.learning_rate);
        }
        value_norm_ =
            std::make_unique<ValueNormalizer>(cfg_.ppo.normalize_values);
    }

    const LoraEnv& env() const { return env_; }

    ActorNet& actor(std::size_t agent) {
        return actors_[cfg_.ppo.share_actor ? 0 : agent];
    }
    CriticNet& critic(std::size_t agent) {
        return critics_[cfg_.ppo.central_critic ? 0 : agent];
    }

    TrainingReport train(bool record_trajectories = false) {
        TrainingReport report;
        RolloutBuffer buffer;
        buffer.capacity = cfg_.ppo.buffer_episodes;
        for (std::size_t ep = 0; ep < cfg_.ppo.episodes; ++ep) {
            const bool record =
                record_trajectories && ep + 1 == cfg_.ppo.episodes;
            EpisodeMetrics metrics =
                collect_episode(ep, buffer, record ? &report.trajectories : nullptr);
            report.episodes.push_back(std::move(metrics));
            if (buffer.full()) {
                update(buffer);
                buffer.clear();
            }
        }
        if (!buffer.empty() && cfg_.ppo.epochs_per_update > 0) {
            update(buffer);
            buffer.clear();
        }
        return report;
    }

    // Single PPO update over a filled buffer; exposed for targeted tests.
    void update(const RolloutBuffer& buffer) {
        if (buffer.empty()) {
            throw std::logic_error("Trainer::update: empty rollout buffer");
        }
        if (cfg_.ppo.epochs_per_update <= 0) return;
        const std::size_t agents = env_.num_agents();

        // GAE per agent per episode on raw rewards/values.
        struct EpisodeTargets {
            std::vector<std::vector<double>> advantages;  // [agent][step]
            std::vector<std::vector<double>> returns;
        };
        std::vector<EpisodeTargets> targets(buffer.episodes.size());
        std::vector<double> all_adv;
        std::vector<double> all_returns;
        for (std::size_t e = 0; e < buffer.episodes.size(); ++e) {
            const EpisodeTrace& tr = buffer.episodes[e];
            targets[e].advantages.resize(agents);
            targets[e].returns.resize(agents);
            for (std::size_t u = 0; u < agents; ++u) {
                std::vector<double> rewards, values;
                for (std::size_t t = 0; t < tr.rewards.size(); ++t) {
                    rewards.push_back(tr.rewards[t][u]);
                    values.push_back(tr.values[t][u]);
                }
                GaeResult gae = compute_gae(rewards, values, tr.dones,
                                            cfg_.ppo.discount,
                                            cfg_.ppo.gae_lambda);
                all_adv.insert(all_adv.end(), gae.advantages.begin(),
                               gae.advantages.end());
                all_returns.insert(all_returns.end(), gae.returns.begin(),
                                   gae.returns.end());
                targets[e].advantages[u] = std::move(gae.advantages);
                targets[e].returns[u] = std::move(gae.returns);
            }
        }

        double adv_mean = 0.0, adv_std = 1.0;
        if (cfg_.ppo.normalize_advantages && !all_adv.empty()) {
            for (double a : all_adv) adv_mean += a;
            adv_mean /= static_cast<double>(all_adv.size());
            double var = 0.0;
            for (double a : all_adv) var += (a - adv_mean) * (a - adv_mean);
            adv_std = std::max(
                std::sqrt(var / static_cast<double>(all_adv.size())), 1e-8);
        }
        value_norm_->update(all_returns);

        for (int epoch = 0; epoch < cfg_.ppo.epochs_per_update; ++epoch) {
            const int groups = std::max(cfg_.ppo.minibatches, 1);
            for (int g = 0; g < groups; ++g) {
                std::vector<nn::Tensor> surrogates, entropies, critic_terms;
                for (auto& a : actors_) a.store.zero_grad();
                for (auto& c : critics_) c.store.zero_grad();
                for (std::size_t e = g; e < buffer.episodes.size();
                     e += static_cast<std::size_t>(groups)) {
                    accumulate_episode_losses(buffer.episodes[e], targets[e],
                                              adv_mean, adv_std, surrogates,
                                              entropies, critic_terms);
                }
                if (surrogates.empty()) continue;
                nn::Tensor a_loss =
                    actor_loss(surrogates, entropies, cfg_.ppo.entropy_coeff);
                nn::Tensor c_loss = critic_loss(critic_terms);
                if (!std::isfinite(a_loss.item()) || !std::isfinite(c_loss.item())) {
                    throw std::runtime_error(
                        "Trainer::update: non-finite loss (actor=" +
                        std::to_string(a_loss.item()) +
                        ", critic=" + std::to_string(c_loss.item()) + ")");
                }
                nn::backward(a_loss);
                nn::backward(c_loss);
                for (auto& opt : actor_optims_) opt.step();
                for (auto& opt : critic_optims_) opt.step();
            }
        }
    }

    std::vector<double> global_observation(
        const std::vector<std::vector<double>>& local_obs,
        std::size_t agent) const {
        std::vector<double> g;
        for (const auto& o : local_obs) g.insert(g.end(), o.begin(), o.end());
        for (std::size_t u = 0; u < local_obs.size(); ++u) {
            g.push_back(u == agent ? 1.0 : 0.0);
        }
        return g;
    }

    json checkpoint() const {
        json j;
        j["actors"] = json::array();
        for (const auto& a : actors_) j["actors"].push_back(a.store.checkpoint());
        j["critics"] = json::array();
        for (const auto& c : critics_) j["critics"].push_back(c.store.checkpoint());
        return j;
    }

    void load_checkpoint(const json& j) {
        for (std::size_t i = 0; i < actors_.size(); ++i) {
            actors_[i].store.load_checkpoint(j.at("actors").at(i));
        }
        for (std::size_t i = 0; i < critics_.size(); ++i) {
            critics_[i].store.load_checkpoint(j.at("critics").at(i));
        }
    }

  private:
    std::vector<double> actor_input(const std::vector<double>& obs,
                                    std::size_t agent,
                                    std::size_t agents) const {
        if (!cfg_.ppo.share_actor) return obs;
        std::vector<double> in = obs;
        for (std::size_t u = 0; u < agents; ++u)
            in.push_back(u == agent ? 1.0 : 0.0);
        return in;
    }

    std::vector<double> critic_input(
        const std::vector<std::vector<double>>& local_obs,
        std::size_t agent) const {
        if (cfg_.ppo.central_critic) return global_observation(local_obs, agent);
        return local_obs[agent];
    }

    EpisodeMetrics collect_episode(std::size_t episode_index,
                                   RolloutBuffer& buffer, json* trajectories) {
        nn::NoGradGuard no_grad;
        const std::size_t agents = env_.num_agents();
        auto obs = env_.reset(cfg_.seed);

        EpisodeTrace trace;
        EpisodeMetrics metrics;
        metrics.episode = episode_index;
        metrics.agent_rewards.assign(agents, 0.0);
        const double step_seconds = 1.0 / cfg_.env.steps_per_second;

        std::vector<nn::Tensor> actor_h, critic_h;
        for (std::size_t u = 0; u < agents; ++u) {
            actor_h.push_back(nn::Tensor::zeros(actors_[0].hidden_dim));
            critic_h.push_back(nn::Tensor::zeros(critics_[0].hidden_dim));
        }

        json traj_steps = json::array();
        bool done = false;
        while (!done) {
            std::vector<ActionIndices> actions(agents);
            std::vector<double> log_probs(agents), values(agents);
            std::vector<std::vector<double>> globals(agents);
            std::vector<std::vector<double>> a_hidden(agents), c_hidden(agents);
            for (std::size_t u = 0; u < agents; ++u) {
                const auto in = actor_input(obs[u], u, agents);
                ActorNet::Forward f =
                    actor(u).forward(nn::Tensor::from_values(in), actor_h[u]);
                SampledAction sa = sample_action(f, rng_);
                actions[u] = sa.indices;
                log_probs[u] = sa.log_prob;
                actor_h[u] = f.hidden;
                a_hidden[u] = f.hidden.values();

                globals[u] = critic_input(obs, u);
                auto [v, h] = critic(u).forward(
                    nn::Tensor::from_values(globals[u]), critic_h[u]);
                values[u] = value_norm_->denormalize(v.item());
                critic_h[u] = h;
                c_hidden[u] = h.values();
            }

            StepResult result = env_.step(actions);
            done = result.done;

            trace.observations.push_back(obs);
            trace.global_observations.push_back(globals);
            trace.actor_hidden.push_back(std::move(a_hidden));
            trace.critic_hidden.push_back(std::move(c_hidden));
            trace.actions.push_back(actions);
            trace.log_probs.push_back(log_probs);
            trace.values.push_back(values);
            trace.dones.push_back(done);
            if (cfg_.ppo.team_reward) {
                trace.rewards.push_back(
                    std::vector<double>(agents, result.team_reward));
            } else {
                trace.rewards.push_back(result.rewards);
            }

            metrics.team_reward += result.team_reward;
            metrics.ee_sys += result.info.ee_sys;
            metrics.total_tx_power_w += result.info.total_tx_power_w;
            metrics.propulsion_energy_j +=
                result.info.propulsion_power_w * step_seconds;
            metrics.collisions += result.info.collisions;
            for (std::size_t u = 0; u < agents; ++u) {
                metrics.agent_rewards[u] += result.rewards[u];
            }
            if (done) metrics.arrivals = result.info.arrivals;
            ++metrics.step_count;

            if (trajectories) {
                json uavs = json::array();
                for (std::size_t u = 0; u < agents; ++u) {
                    uavs.push_back(
                        {{"id", u},
                         {"x", result.info.uav_pos[u].x},
                         {"y", result.info.uav_pos[u].y},
                         {"z", result.info.uav_pos[u].z},
                         {"speed", result.info.uav_speed[u]},
                         {"associated_ed_ids", result.info.associated_eds[u]}});
                }
                traj_steps.push_back({{"t", metrics.step_count}, {"uavs", uavs}});
            }
            obs = result.observations;
        }
        if (trajectories) (*trajectories)["steps"] = std::move(traj_steps);
        buffer.episodes.push_back(std::move(trace));
        return metrics;
    }

    void accumulate_episode_losses(const EpisodeTrace& tr,
                                   const auto& targets, double adv_mean,
                                   double adv_std,
                                   std::vector<nn::Tensor>& surrogates,
                                   std::vector<nn::Tensor>& entropies,
                                   std::vector<nn::Tensor>& critic_terms) {
        const std::size_t agents = tr.observations.front().size();
        for (std::size_t u = 0; u < agents; ++u) {
            nn::Tensor a_h = nn::Tensor::zeros(actors_[0].hidden_dim);
            nn::Tensor c_h = nn::Tensor::zeros(critics_[0].hidden_dim);
            for (std::size_t t = 0; t < tr.observations.size(); ++t) {
                const auto in = actor_input(tr.observations[t][u], u, agents);
                ActorNet::Forward f =
                    actor(u).forward(nn::Tensor::from_values(in), a_h);
                a_h = f.hidden;
                nn::Tensor lp = joint_log_prob(f, tr.actions[t][u]);
                double adv = targets.advantages[u][t];
                if (cfg_.ppo.normalize_advantages) {
                    adv = (adv - adv_mean) / adv_std;
                }
                surrogates.push_back(actor_surrogate(lp, tr.log_probs[t][u], adv,
                                                     cfg_.ppo.clip_range));
                entropies.push_back(joint_entropy(f));

                auto [v, h] = critic(u).forward(
                    nn::Tensor::from_values(tr.global_observations[t][u]), c_h);
                c_h = h;
                critic_terms.push_back(critic_term(
                    v, value_norm_->normalize(tr.values[t][u]),
                    value_norm_->normalize(targets.returns[u][t]),
                    cfg_.ppo.clip_range));
            }
        }
    }

    Config cfg_;
    LoraEnv env_;
    std::mt19937_64 rng_;
    std::size_t actor_in_dim_ = 0;
    std::size_t critic_in_dim_ = 0;
    std::vector<ActorNet> actors_;
    std::vector<CriticNet> critics_;
    std::vector<nn::Adam> actor_optims_;
    std::vector<nn::Adam> critic_optims_;
    std::unique_ptr<ValueNormalizer> value_norm_;
};

// Decentralized ablation: per-agent critics on local observations only.
inline TrainingReport ippo_variant(Config config,
                                   bool record_trajectories = false) {
    config.ppo.central_critic = false;
    Trainer trainer(config);
    return trainer.train(record_trajectories);
}

}  // namespace glora
