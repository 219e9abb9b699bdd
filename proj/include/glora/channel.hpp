#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "glora/geometry.hpp"

namespace glora {

// los_offset / los_slope are the environment constants of the logistic LoS
// model (named to avoid collision with the GAE lambda).
struct ChannelParams {
    double los_offset = 4.88;       // suburban
    double los_slope = 0.43;        // suburban
    double eta_los_db = 0.1;        // excess LoS attenuation, dB
    double eta_nlos_db = 21.0;      // excess NLoS attenuation, dB
    double carrier_hz = 868e6;
    double light_speed = 3e8;
    double noise_dbm = -120.0;
    double bandwidth_hz = 125e3;    // per ED link
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Elevation from the ED up to the UAV, in degrees; 90 when directly overhead.
inline double elevation_angle_deg(const Position3& uav, const Position3& ed) {
    const double h = horizontal_distance(uav, ed);
    if (h == 0.0) return 90.0;
    return std::atan(uav.z / h) * 180.0 / std::numbers::pi;
}

inline double los_probability(double elevation_deg, const ChannelParams& p) {
    return 1.0 / (1.0 + p.los_offset *
                            std::exp(-p.los_slope * (elevation_deg - p.los_offset)));
}

inline double fspl_db(double d, const ChannelParams& p) {
    return 20.0 * std::log10(4.0 * std::numbers::pi * p.carrier_hz * d / p.light_speed);
}

inline double a2g_path_loss_db(double d, double elevation_deg,
                               const ChannelParams& p) {
    if (d <= 0.0) throw std::domain_error("a2g_path_loss_db: distance must be > 0");
    const double p_los = los_probability(elevation_deg, p);
    return fspl_db(d, p) + p.eta_los_db * p_los + p.eta_nlos_db * (1.0 - p_los);
}

inline double channel_gain_linear(double path_loss_db) {
    return std::pow(10.0, -path_loss_db / 10.0);
}

struct LinkState {
    double distance_3d = 0.0;
    double elevation_deg = 0.0;
    double path_loss_db = 0.0;
    double gain_linear = 0.0;
};

inline LinkState link_state(const Position3& uav, const Position3& ed,
                            const ChannelParams& p) {
    LinkState s;
    s.distance_3d = distance_3d(uav, ed);
    s.elevation_deg = elevation_angle_deg(uav, ed);
    s.path_loss_db = a2g_path_loss_db(s.distance_3d, s.elevation_deg, p);
    s.gain_linear = channel_gain_linear(s.path_loss_db);
    return s;
}

// Linear SNR in consistent mW units.
inline double snr_linear(double p_tx_dbm, double gain_linear, double noise_dbm) {
    return db_to_linear(p_tx_dbm) * gain_linear / db_to_linear(noise_dbm);
}

// Interferers are the other associated EDs on the same SF, each measured to
// its own serving UAV. The +1 makes the denominator noise-normalized.
inline double sinr_linear(double target_snr,
                          const std::vector<double>& interferer_snrs_same_sf) {
    double denom = 1.0;
    for (double s : interferer_snrs_same_sf) denom += s;
    return target_snr / denom;
}

inline double achievable_rate_bps(double sinr, double bandwidth_hz) {
    return bandwidth_hz * std::log2(1.0 + sinr);
}

}  // namespace glora
