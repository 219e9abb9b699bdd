#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "glora/channel.hpp"
#include "glora/energy.hpp"
#include "glora/geometry.hpp"

namespace glora {

using json = nlohmann::json;

struct EnvConfig {
    double x_max = 1000.0;
    double y_max = 1000.0;
    std::size_t num_uavs = 2;   // U
    std::size_t num_eds = 10;   // V
    Position3 cs_pos{900.0, 900.0, 150.0};
    double altitude = 150.0;    // H_u
    double flight_duration_s = 400.0;  // T
    double steps_per_second = 0.5;     // delta-t (steps/s); step length = 1/this
    std::size_t episode_steps = 200;   // tau = T * steps_per_second
    double cone_width_rad = 120.0 * std::numbers::pi / 180.0;  // beta
    int speed_levels = 5;       // M
    int direction_levels = 16;  // N
    double s_max = 30.0;
    double d_safe = 3.0;
    std::size_t quota = 25;     // Lambda_max
    double comm_range = 0.0;    // <= 0 means: derive from the SF12 link budget
    double arrival_radius = 50.0;
    // Reward weights omega_1..omega_5.
    double w_assoc = 10.0;
    double w_ee = 1e-5;
    double w_collision = 200.0;
    double w_cs_distance = 2.0;
    double w_arrival = 400.0;
    // UAV start positions; filled with defaults when empty.
    std::vector<Position3> uav_start;
};

struct PpoHyperparams {
    double learning_rate = 0.003;   // alpha
    double clip_range = 0.2;        // epsilon
    double discount = 0.9;          // gamma
    double gae_lambda = 0.95;
    double entropy_coeff = 0.001;   // varphi
    int epochs_per_update = 4;
    int minibatches = 1;
    std::size_t buffer_episodes = 10;  // B
    int hidden_dim = 128;
    bool normalize_advantages = true;
    bool normalize_values = true;
    bool team_reward = false;       // train each agent on the shared sum instead of r_u
    bool share_actor = false;
    bool central_critic = true;     // false = IPPO-style per-agent local critics
    std::size_t episodes = 300;     // e_max
};

struct Config {
    EnvConfig env;
    ChannelParams channel;
    RotorParams rotor;
    PpoHyperparams ppo;
    std::uint64_t seed = 7;
};

// Evenly spread start positions along the x axis at y = 100.
inline std::vector<Position3> default_uav_starts(const EnvConfig& e) {
    std::vector<Position3> starts;
    for (std::size_t u = 0; u < e.num_uavs; ++u) {
        const double frac =
            (static_cast<double>(u) + 1.0) / (static_cast<double>(e.num_uavs) + 1.0);
        starts.push_back({frac * e.x_max, 100.0, e.altitude});
    }
    return starts;
}

inline void to_json(json& j, const Position3& p) { j = json{p.x, p.y, p.z}; }
inline void from_json(const json& j, Position3& p) {
    p.x = j.at(0);
    p.y = j.at(1);
    p.z = j.at(2);
}

inline void to_json(json& j, const EnvConfig& e) {
    j = json{{"x_max", e.x_max},
             {"y_max", e.y_max},
             {"num_uavs", e.num_uavs},
             {"num_eds", e.num_eds},
             {"cs_pos", e.cs_pos},
             {"altitude", e.altitude},
             {"flight_duration_s", e.flight_duration_s},
             {"steps_per_second", e.steps_per_second},
             {"episode_steps", e.episode_steps},
             {"cone_width_rad", e.cone_width_rad},
             {"speed_levels", e.speed_levels},
             {"direction_levels", e.direction_levels},
             {"s_max", e.s_max},
             {"d_safe", e.d_safe},
             {"quota", e.quota},
             {"comm_range", e.comm_range},
             {"arrival_radius", e.arrival_radius},
             {"w_assoc", e.w_assoc},
             {"w_ee", e.w_ee},
             {"w_collision", e.w_collision},
             {"w_cs_distance", e.w_cs_distance},
             {"w_arrival", e.w_arrival},
             {"uav_start", e.uav_start}};
}

inline void from_json(const json& j, EnvConfig& e) {
    EnvConfig d;
    e.x_max = j.value("x_max", d.x_max);
    e.y_max = j.value("y_max", d.y_max);
    e.num_uavs = j.value("num_uavs", d.num_uavs);
    e.num_eds = j.value("num_eds", d.num_eds);
    e.cs_pos = j.value("cs_pos", d.cs_pos);
    e.altitude = j.value("altitude", d.altitude);
    e.flight_duration_s = j.value("flight_duration_s", d.flight_duration_s);
    e.steps_per_second = j.value("steps_per_second", d.steps_per_second);
    e.episode_steps = j.value("episode_steps", d.episode_steps);
    e.cone_width_rad = j.value("cone_width_rad", d.cone_width_rad);
    e.speed_levels = j.value("speed_levels", d.speed_levels);
    e.direction_levels = j.value("direction_levels", d.direction_levels);
    e.s_max = j.value("s_max", d.s_max);
    e.d_safe = j.value("d_safe", d.d_safe);
    e.quota = j.value("quota", d.quota);
    e.comm_range = j.value("comm_range", d.comm_range);
    e.arrival_radius = j.value("arrival_radius", d.arrival_radius);
    e.w_assoc = j.value("w_assoc", d.w_assoc);
    e.w_ee = j.value("w_ee", d.w_ee);
    e.w_collision = j.value("w_collision", d.w_collision);
    e.w_cs_distance = j.value("w_cs_distance", d.w_cs_distance);
    e.w_arrival = j.value("w_arrival", d.w_arrival);
    e.uav_start = j.value("uav_start", d.uav_start);
}

inline void to_json(json& j, const ChannelParams& c) {
    j = json{{"los_offset", c.los_offset},
             {"los_slope", c.los_slope},
             {"eta_los_db", c.eta_los_db},
             {"eta_nlos_db", c.eta_nlos_db},
             {"carrier_hz", c.carrier_hz},
             {"noise_dbm", c.noise_dbm},
             {"bandwidth_hz", c.bandwidth_hz}};
}

inline void from_json(const json& j, ChannelParams& c) {
    ChannelParams d;
    c.los_offset = j.value("los_offset", d.los_offset);
    c.los_slope = j.value("los_slope", d.los_slope);
    c.eta_los_db = j.value("eta_los_db", d.eta_los_db);
    c.eta_nlos_db = j.value("eta_nlos_db", d.eta_nlos_db);
    c.carrier_hz = j.value("carrier_hz", d.carrier_hz);
    c.noise_dbm = j.value("noise_dbm", d.noise_dbm);
    c.bandwidth_hz = j.value("bandwidth_hz", d.bandwidth_hz);
}

inline void to_json(json& j, const RotorParams& r) {
    j = json{{"profile_drag_coeff", r.profile_drag_coeff},
             {"air_density", r.air_density},
             {"rotor_solidity", r.rotor_solidity},
             {"rotor_disc_area", r.rotor_disc_area},
             {"blade_angular_velocity", r.blade_angular_velocity},
             {"rotor_radius", r.rotor_radius},
             {"weight_newton", r.weight_newton},
             {"induced_correction", r.induced_correction},
             {"thrust_to_weight", r.thrust_to_weight},
             {"hover_induced_velocity", r.hover_induced_velocity},
             {"fuselage_flat_plate_area", r.fuselage_flat_plate_area},
             {"p_max_watt", r.p_max_watt},
             {"circuit_power_watt", r.circuit_power_watt}};
}

inline void from_json(const json& j, RotorParams& r) {
    RotorParams d;
    r.profile_drag_coeff = j.value("profile_drag_coeff", d.profile_drag_coeff);
    r.air_density = j.value("air_density", d.air_density);
    r.rotor_solidity = j.value("rotor_solidity", d.rotor_solidity);
    r.rotor_disc_area = j.value("rotor_disc_area", d.rotor_disc_area);
    r.blade_angular_velocity =
        j.value("blade_angular_velocity", d.blade_angular_velocity);
    r.rotor_radius = j.value("rotor_radius", d.rotor_radius);
    r.weight_newton = j.value("weight_newton", d.weight_newton);
    r.induced_correction = j.value("induced_correction", d.induced_correction);
    r.thrust_to_weight = j.value("thrust_to_weight", d.thrust_to_weight);
    r.hover_induced_velocity =
        j.value("hover_induced_velocity", d.hover_induced_velocity);
    r.fuselage_flat_plate_area =
        j.value("fuselage_flat_plate_area", d.fuselage_flat_plate_area);
    r.p_max_watt = j.value("p_max_watt", d.p_max_watt);
    r.circuit_power_watt = j.value("circuit_power_watt", d.circuit_power_watt);
}

inline void to_json(json& j, const PpoHyperparams& p) {
    j = json{{"learning_rate", p.learning_rate},
             {"clip_range", p.clip_range},
             {"discount", p.discount},
             {"gae_lambda", p.gae_lambda},
             {"entropy_coeff", p.entropy_coeff},
             {"epochs_per_update", p.epochs_per_update},
             {"minibatches", p.minibatches},
             {"buffer_episodes", p.buffer_episodes},
             {"hidden_dim", p.hidden_dim},
             {"normalize_advantages", p.normalize_advantages},
             {"normalize_values", p.normalize_values},
             {"team_reward", p.team_reward},
             {"share_actor", p.share_actor},
             {"central_critic", p.central_critic},
             {"episodes", p.episodes}};
}

inline void from_json(const json& j, PpoHyperparams& p) {
    PpoHyperparams d;
    p.learning_rate = j.value("learning_rate", d.learning_rate);
    p.clip_range = j.value("clip_range", d.clip_range);
    p.discount = j.value("discount", d.discount);
    p.gae_lambda = j.value("gae_lambda", d.gae_lambda);
    p.entropy_coeff = j.value("entropy_coeff", d.entropy_coeff);
    p.epochs_per_update = j.value("epochs_per_update", d.epochs_per_update);
    p.minibatches = j.value("minibatches", d.minibatches);
    p.buffer_episodes = j.value("buffer_episodes", d.buffer_episodes);
    p.hidden_dim = j.value("hidden_dim", d.hidden_dim);
    p.normalize_advantages =
        j.value("normalize_advantages", d.normalize_advantages);
    p.normalize_values = j.value("normalize_values", d.normalize_values);
    p.team_reward = j.value("team_reward", d.team_reward);
    p.share_actor = j.value("share_actor", d.share_actor);
    p.central_critic = j.value("central_critic", d.central_critic);
    p.episodes = j.value("episodes", d.episodes);
}

inline void to_json(json& j, const Config& c) {
    j = json{{"env", c.env},
             {"channel", c.channel},
             {"rotor", c.rotor},
             {"ppo", c.ppo},
             {"seed", c.seed}};
}

inline void from_json(const json& j, Config& c) {
    Config d;
    c.env = j.value("env", d.env);
    c.channel = j.value("channel", d.channel);
    c.rotor = j.value("rotor", d.rotor);
    c.ppo = j.value("ppo", d.ppo);
    c.seed = j.value("seed", d.seed);
}

// Applies a "dotted.path=value" override onto the JSON form of a config.
inline void apply_override(json& tree, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw std::invalid_argument("override must look like key.path=value: " + spec);
    }
    std::string path = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);
    json* node = &tree;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
            break;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

}  // namespace glora
