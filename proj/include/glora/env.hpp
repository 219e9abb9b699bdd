#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "glora/association.hpp"
#include "glora/channel.hpp"
#include "glora/config.hpp"
#include "glora/energy.hpp"
#include "glora/geometry.hpp"
#include "glora/lora_phy.hpp"

namespace glora {

struct ActionIndices {
    int dir_idx = 0;    // 0..N
    int speed_idx = 0;  // 0..M
    int sf_idx = 0;     // 0..5
    int tp_idx = 0;     // 0..4
};

struct DecodedAction {
    MotionCommand motion;
    RadioSelection radio;
};

inline DecodedAction decode_action(const ActionIndices& idx, const EnvConfig& cfg) {
    DecodedAction a;
    a.motion.direction_angle =
        -cfg.cone_width_rad / 2.0 +
        static_cast<double>(idx.dir_idx) * cfg.cone_width_rad /
            static_cast<double>(cfg.direction_levels);
    a.motion.speed = static_cast<double>(idx.speed_idx) * cfg.s_max /
                     static_cast<double>(cfg.speed_levels);
    a.radio.sf = kSfMin + idx.sf_idx;
    a.radio.tp_dbm = kTpLevelsDbm[static_cast<std::size_t>(idx.tp_idx)];
    return a;
}

struct StepInfo {
    double ee_sys = 0.0;            // instantaneous weighted global EE
    double total_tx_power_w = 0.0;  // over all associated EDs this step
    double propulsion_power_w = 0.0;  // summed over UAVs
    std::size_t collisions = 0;     // colliding pairs this step
    std::size_t associated = 0;
    std::size_t arrivals = 0;       // UAVs inside the arrival radius
    std::vector<Position3> uav_pos;
    std::vector<double> uav_speed;
    std::vector<std::vector<std::size_t>> associated_eds;  // per UAV
};

struct StepResult {
    std::vector<std::vector<double>> observations;  // per agent
    std::vector<double> rewards;                    // per agent
    double team_reward = 0.0;
    bool done = false;
    StepInfo info;
};

// Inputs to the per-agent reward; exposed so the arithmetic is testable on
// hand-built contexts.
struct RewardContext {
    bool successful_uplink = false;  // a_u
    double ee_sys = 0.0;
    bool collided = false;
    double cs_distance = 0.0;
    bool terminal = false;
    bool arrived = false;  // Xi_u
};

inline double compute_reward(const RewardContext& ctx, const EnvConfig& cfg) {
    double r = cfg.w_assoc * (ctx.successful_uplink ? 1.0 : 0.0) +
               cfg.w_ee * ctx.ee_sys -
               cfg.w_collision * (ctx.collided ? 1.0 : 0.0) -
               cfg.w_cs_distance * ctx.cs_distance;
    if (ctx.terminal && !ctx.arrived) r -= cfg.w_arrival;
    return r;
}

// Single-writer POMDP environment. EDs are static and placed uniformly at
// reset from the given seed; all later dynamics are deterministic in the
// action sequence.
class LoraEnv {
  public:
    LoraEnv(const EnvConfig& env_cfg, const ChannelParams& chan,
            const RotorParams& rotor)
        : cfg_(env_cfg), chan_(chan), rotor_(rotor) {
        if (cfg_.speed_levels < 1 || cfg_.direction_levels < 1) {
            throw std::invalid_argument("LoraEnv: quantization counts must be >= 1");
        }
        if (propulsion_power_watt(0.0, rotor_) > rotor_.p_max_watt) {
            throw std::invalid_argument("LoraEnv: hover power exceeds the budget");
        }
        comm_range_ = cfg_.comm_range > 0.0
                          ? cfg_.comm_range
                          : default_comm_range(cfg_.altitude, chan_);
        limits_ = KinematicLimits{cfg_.s_max, cfg_.x_max, cfg_.y_max, cfg_.d_safe,
                                  1.0 / cfg_.steps_per_second};
    }

    std::size_t num_agents() const { return cfg_.num_uavs; }
    std::size_t observation_dim() const { return 11 + 4 * cfg_.quota; }
    std::size_t episode_steps() const { return cfg_.episode_steps; }
    double comm_range() const { return comm_range_; }
    const EnvConfig& config() const { return cfg_; }
    const std::vector<Position3>& ed_positions() const { return eds_; }
    const std::vector<Position3>& uav_positions() const { return uavs_; }

    std::vector<std::vector<double>> reset(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> ux(0.0, cfg_.x_max);
        std::uniform_real_distribution<double> uy(0.0, cfg_.y_max);
        eds_.clear();
        for (std::size_t v = 0; v < cfg_.num_eds; ++v) {
            const double x = ux(rng);
            const double y = uy(rng);
            eds_.push_back({x, y, 0.0});
        }
        uavs_ = cfg_.uav_start.empty() ? default_uav_starts(cfg_) : cfg_.uav_start;
        if (uavs_.size() != cfg_.num_uavs) {
            throw std::invalid_argument("LoraEnv: uav_start size != num_uavs");
        }
        for (auto& q : uavs_) q.z = cfg_.altitude;
        last_radio_.assign(cfg_.num_uavs, RadioSelection{});
        last_motion_.assign(cfg_.num_uavs, MotionCommand{});
        prop_power_.assign(cfg_.num_uavs, propulsion_power_watt(0.0, rotor_));
        step_index_ = 0;
        done_ = false;
        run_association();
        return observations();
    }

    StepResult step(const std::vector<ActionIndices>& actions) {
        if (done_) throw std::logic_error("LoraEnv::step called on a finished episode");
        if (actions.size() != cfg_.num_uavs) {
            throw std::invalid_argument("LoraEnv::step: one action per UAV required");
        }

        // 1-3: decode, repair speed against the power budget, move.
        for (std::size_t u = 0; u < cfg_.num_uavs; ++u) {
            DecodedAction a = decode_action(actions[u], cfg_);
            a.motion.speed = enforce_power_budget(a.motion.speed, cfg_.s_max,
                                                  cfg_.speed_levels, rotor_);
            uavs_[u] = step_position(uavs_[u], a.motion, cfg_.cs_pos, limits_);
            last_motion_[u] = a.motion;
            last_radio_[u] = a.radio;
            prop_power_[u] = propulsion_power_watt(a.motion.speed, rotor_);
        }
        ++step_index_;
        const bool terminal = step_index_ >= cfg_.episode_steps;

        // 4-5: association, then each UAV's (SF, TP) command applies to its EDs.
        run_association();

        // 6: per-link SNR; feasibility gates on SNR against the SF threshold,
        // interference is co-SF across the whole network.
        const std::size_t v_count = eds_.size();
        std::vector<double> snr(v_count, 0.0);
        std::vector<int> sf(v_count, 0);
        for (std::size_t v = 0; v < v_count; ++v) {
            const int u = assoc_.serving_uav[v];
            if (u < 0) continue;
            const RadioSelection& radio = last_radio_[static_cast<std::size_t>(u)];
            sf[v] = radio.sf;
            snr[v] = snr_linear(radio.tp_dbm,
                                gain_.at(static_cast<std::size_t>(u), v),
                                chan_.noise_dbm);
        }
        std::vector<double> rate(v_count, 0.0);
        std::vector<bool> feasible(v_count, false);
        for (std::size_t v = 0; v < v_count; ++v) {
            if (assoc_.serving_uav[v] < 0) continue;
            feasible[v] = link_feasible(linear_to_db(snr[v]), sf[v]);
            if (!feasible[v]) continue;
            std::vector<double> interferers;
            for (std::size_t w = 0; w < v_count; ++w) {
                if (w == v || assoc_.serving_uav[w] < 0 || sf[w] != sf[v]) continue;
                interferers.push_back(snr[w]);
            }
            rate[v] = achievable_rate_bps(sinr_linear(snr[v], interferers),
                                          chan_.bandwidth_hz);
        }

        // 7: EE and rewards.
        StepResult result;
        result.info.uav_pos = uavs_;
        result.info.associated_eds.assign(cfg_.num_uavs, {});
        std::vector<double> per_uav_ee(cfg_.num_uavs, 0.0);
        std::vector<bool> uplink_ok(cfg_.num_uavs, false);
        for (std::size_t u = 0; u < cfg_.num_uavs; ++u) {
            std::vector<double> rates, powers;
            for (std::size_t v = 0; v < v_count; ++v) {
                if (assoc_.serving_uav[v] != static_cast<int>(u)) continue;
                result.info.associated_eds[u].push_back(v);
                rates.push_back(rate[v]);
                powers.push_back(dbm_to_watt(last_radio_[u].tp_dbm));
                result.info.total_tx_power_w += powers.back();
                uplink_ok[u] = uplink_ok[u] || feasible[v];
            }
            per_uav_ee[u] =
                uav_energy_efficiency(rates, powers, rotor_.circuit_power_watt);
            result.info.propulsion_power_w += prop_power_[u];
            result.info.uav_speed.push_back(last_motion_[u].speed);
        }
        result.info.ee_sys = weighted_global_ee(per_uav_ee);
        result.info.associated = assoc_.total_associated();

        const auto colliding = check_safety(uavs_, cfg_.d_safe);
        result.info.collisions = colliding.size();
        std::vector<bool> collided(cfg_.num_uavs, false);
        for (const auto& [i, j] : colliding) collided[i] = collided[j] = true;

        for (std::size_t u = 0; u < cfg_.num_uavs; ++u) {
            RewardContext ctx;
            ctx.successful_uplink = uplink_ok[u];
            ctx.ee_sys = result.info.ee_sys;
            ctx.collided = collided[u];
            ctx.cs_distance = distance_3d(uavs_[u], cfg_.cs_pos);
            ctx.terminal = terminal;
            ctx.arrived = horizontal_distance(uavs_[u], cfg_.cs_pos) <= cfg_.arrival_radius;
            if (ctx.arrived) ++result.info.arrivals;
            result.rewards.push_back(compute_reward(ctx, cfg_));
            result.team_reward += result.rewards.back();
        }

        done_ = terminal;
        result.done = done_;
        result.observations = observations();
        return result;
    }

    // Fixed-layout per-agent observation; padded ED blocks are zero with a
    // zero mask bit.
    std::vector<std::vector<double>> observations() const {
        std::vector<std::vector<double>> out;
        for (std::size_t u = 0; u < cfg_.num_uavs; ++u) {
            std::vector<double> o;
            o.reserve(observation_dim());
            o.push_back(static_cast<double>(last_radio_[u].sf - kSfMin) /
                        static_cast<double>(kSfCount - 1));
            o.push_back((last_radio_[u].tp_dbm - kTpLevelsDbm[0]) /
                        (kTpLevelsDbm[kTpCount - 1] - kTpLevelsDbm[0]));
            o.push_back(last_motion_[u].direction_angle / (cfg_.cone_width_rad / 2.0));
            o.push_back(last_motion_[u].speed / cfg_.s_max);
            o.push_back(uavs_[u].x / cfg_.x_max);
            o.push_back(uavs_[u].y / cfg_.y_max);
            o.push_back(uavs_[u].z / cfg_.altitude);
            o.push_back(cfg_.cs_pos.x / cfg_.x_max);
            o.push_back(cfg_.cs_pos.y / cfg_.y_max);
            o.push_back(cfg_.cs_pos.z / cfg_.altitude);
            o.push_back(prop_power_[u] / rotor_.p_max_watt);
            std::size_t filled = 0;
            for (std::size_t v = 0; v < eds_.size() && filled < cfg_.quota; ++v) {
                if (assoc_.serving_uav[v] != static_cast<int>(u)) continue;
                o.push_back(eds_[v].x / cfg_.x_max);
                o.push_back(eds_[v].y / cfg_.y_max);
                o.push_back(normalized_log_gain(gain_.at(u, v)));
                o.push_back(1.0);
                ++filled;
            }
            for (; filled < cfg_.quota; ++filled) {
                o.insert(o.end(), {0.0, 0.0, 0.0, 0.0});
            }
            out.push_back(std::move(o));
        }
        return out;
    }

    json state_json() const {
        json j;
        j["step"] = step_index_;
        j["uavs"] = json::array();
        for (std::size_t u = 0; u < uavs_.size(); ++u) {
            j["uavs"].push_back({{"id", u},
                                 {"x", uavs_[u].x},
                                 {"y", uavs_[u].y},
                                 {"z", uavs_[u].z},
                                 {"speed", last_motion_[u].speed}});
        }
        j["eds"] = json::array();
        for (std::size_t v = 0; v < eds_.size(); ++v) {
            j["eds"].push_back({{"id", v},
                                {"x", eds_[v].x},
                                {"y", eds_[v].y},
                                {"serving_uav", assoc_.serving_uav[v]}});
        }
        return j;
    }

    const AssociationMap& association() const { return assoc_; }

  private:
    // log10 gains land roughly in [-12, -6] over the operating area; this
    // affine map keeps them near [-1, 1] for the network input.
    static double normalized_log_gain(double gain) {
        return (std::log10(gain) + 10.0) / 5.0;
    }

    void run_association() {
        gain_ = build_gain_matrix(uavs_, eds_, chan_);
        assoc_ = associate(gain_, uavs_, eds_, cfg_.quota, comm_range_);
    }

    EnvConfig cfg_;
    ChannelParams chan_;
    RotorParams rotor_;
    KinematicLimits limits_;
    double comm_range_ = 0.0;
    std::vector<Position3> uavs_;
    std::vector<Position3> eds_;
    std::vector<RadioSelection> last_radio_;
    std::vector<MotionCommand> last_motion_;
    std::vector<double> prop_power_;
    GainMatrix gain_;
    AssociationMap assoc_;
    std::size_t step_index_ = 0;
    bool done_ = false;
};

}  // namespace glora
