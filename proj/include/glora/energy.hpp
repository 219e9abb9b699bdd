#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace glora {

// Single-rotor propulsion model. Defaults follow the common rotary-wing
// profile (P0 ~ 79.86 W, Pi ~ 88.63 W, tip speed 120 m/s); the power budget
// and circuit power are deployment choices.
struct RotorParams {
    double profile_drag_coeff = 0.012;  // delta-bar
    double air_density = 1.225;         // kg/m^3
    double rotor_solidity = 0.05;
    double rotor_disc_area = 0.503;     // m^2
    double blade_angular_velocity = 300.0;  // rad/s
    double rotor_radius = 0.4;          // m
    double weight_newton = 20.0;
    double induced_correction = 0.1;    // k
    double thrust_to_weight = 1.0;      // kappa-tilde; 1 recovers hover at v=0
    double hover_induced_velocity = 4.03;   // v0, m/s
    double fuselage_flat_plate_area = 0.0151;  // m^2
    double p_max_watt = 500.0;          // propulsion power budget
    double circuit_power_watt = 0.1;    // Pc in the EE denominator
};

struct HoverPower {
    double blade_profile;  // P0
    double induced;        // Pi
    double total;          // P1 = P0 + Pi
};

inline HoverPower hover_power(const RotorParams& p) {
    HoverPower h;
    h.blade_profile = p.profile_drag_coeff * p.air_density * p.rotor_solidity *
                      p.rotor_disc_area *
                      std::pow(p.blade_angular_velocity, 3.0) *
                      std::pow(p.rotor_radius, 3.0) / 8.0;
    h.induced = (1.0 + p.induced_correction) *
                std::pow(p.weight_newton, 1.5) /
                std::sqrt(2.0 * p.air_density * p.rotor_disc_area);
    h.total = h.blade_profile + h.induced;
    return h;
}

inline double propulsion_power_watt(double speed, const RotorParams& p) {
    const HoverPower h = hover_power(p);
    const double v2 = speed * speed;
    const double tip = p.blade_angular_velocity * p.rotor_radius;
    const double profile = h.blade_profile * (1.0 + 3.0 * v2 / (tip * tip));
    const double parasite =
        0.5 * p.fuselage_flat_plate_area * p.air_density * v2 * speed;
    const double k = p.thrust_to_weight;
    const double v0 = p.hover_induced_velocity;
    const double induced =
        h.induced * k *
        (std::sqrt(k * k + v2 * v2 / (4.0 * v0 * v0 * v0 * v0)) -
         v2 / (2.0 * v0 * v0));
    return profile + parasite + induced;
}

// Largest grid speed <= requested that respects the propulsion budget.
// Hover must be affordable, otherwise the configuration is unusable.
inline double enforce_power_budget(double requested_speed, double s_max,
                                   int speed_levels, const RotorParams& p) {
    if (propulsion_power_watt(0.0, p) > p.p_max_watt) {
        throw std::runtime_error(
            "enforce_power_budget: hover power exceeds the budget");
    }
    const double delta = s_max / static_cast<double>(speed_levels);
    // Propulsion power is not monotone near hover (induced power falls with
    // speed), so scan the grid instead of bisecting blindly.
    double best = 0.0;
    for (int i = 0; i <= speed_levels; ++i) {
        const double v = delta * static_cast<double>(i);
        if (v > requested_speed + 1e-12) break;
        if (propulsion_power_watt(v, p) <= p.p_max_watt) best = v;
    }
    return best;
}

// Eq-style per-UAV EE: summed uplink rate over transmit power plus circuit
// power. Propulsion power is deliberately excluded from the denominator.
inline double uav_energy_efficiency(const std::vector<double>& rates_bps,
                                    const std::vector<double>& tx_powers_watt,
                                    double circuit_power_watt) {
    double rate_sum = 0.0;
    for (double r : rates_bps) rate_sum += r;
    double power_sum = circuit_power_watt;
    for (double w : tx_powers_watt) power_sum += w;
    if (power_sum <= 0.0) {
        throw std::runtime_error(
            "uav_energy_efficiency: circuit power must be positive");
    }
    return rate_sum / power_sum;
}

// Weights are fixed at 1/U, so the weighted global EE is the plain mean.
inline double weighted_global_ee(const std::vector<double>& per_uav_ee) {
    if (per_uav_ee.empty()) return 0.0;
    double sum = 0.0;
    for (double e : per_uav_ee) sum += e;
    return sum / static_cast<double>(per_uav_ee.size());
}

inline double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }

}  // namespace glora
