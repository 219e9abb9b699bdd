#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <utility>
#include <vector>

namespace glora {

struct Position3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Direction angle is relative to the bearing toward the charging station and
// must stay inside the cone [-beta/2, beta/2]; speed in [0, s_max].
struct MotionCommand {
    double direction_angle = 0.0;  // radians
    double speed = 0.0;            // m/s
};

struct KinematicLimits {
    double s_max = 30.0;       // m/s
    double x_max = 1000.0;     // m
    double y_max = 1000.0;     // m
    double d_safe = 3.0;       // m
    double delta_t = 2.0;      // seconds per step (1 / steps-per-second)
};

inline double horizontal_distance(const Position3& a, const Position3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

inline double distance_3d(const Position3& a, const Position3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Bearing of the next displacement: full-quadrant angle of (cs - uav) minus
// the commanded cone offset. A UAV horizontally coincident with the station
// gets bearing 0 - theta.
inline double reference_angle(const Position3& uav_pos, const Position3& cs_pos,
                              double theta) {
    const double dx = cs_pos.x - uav_pos.x;
    const double dy = cs_pos.y - uav_pos.y;
    if (dx == 0.0 && dy == 0.0) {
        return -theta;
    }
    return std::atan2(dy, dx) - theta;
}

inline double clamp(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

// One kinematic step: displace along the reference angle, then clamp to the
// operating box. Altitude never changes.
inline Position3 step_position(const Position3& pos, const MotionCommand& cmd,
                               const Position3& cs_pos,
                               const KinematicLimits& limits) {
    const double ref = reference_angle(pos, cs_pos, cmd.direction_angle);
    Position3 next = pos;
    next.x = clamp(pos.x + cmd.speed * std::cos(ref) * limits.delta_t, 0.0, limits.x_max);
    next.y = clamp(pos.y + cmd.speed * std::sin(ref) * limits.delta_t, 0.0, limits.y_max);
    return next;
}

// Unordered UAV index pairs closer than d_safe (horizontal distance).
inline std::set<std::pair<std::size_t, std::size_t>> check_safety(
    const std::vector<Position3>& all_uav_pos, double d_safe) {
    std::set<std::pair<std::size_t, std::size_t>> colliding;
    for (std::size_t i = 0; i + 1 < all_uav_pos.size(); ++i) {
        for (std::size_t j = i + 1; j < all_uav_pos.size(); ++j) {
            if (horizontal_distance(all_uav_pos[i], all_uav_pos[j]) < d_safe) {
                colliding.emplace(i, j);
            }
        }
    }
    return colliding;
}

}  // namespace glora
