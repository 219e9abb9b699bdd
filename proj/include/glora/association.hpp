#pragma once

#include <cstddef>
#include <vector>

#include "glora/channel.hpp"
#include "glora/geometry.hpp"
#include "glora/lora_phy.hpp"

namespace glora {

// Row-major U x V matrix of linear channel gains.
struct GainMatrix {
    std::size_t num_uavs = 0;
    std::size_t num_eds = 0;
    std::vector<double> entries;

    double at(std::size_t u, std::size_t v) const {
        return entries[u * num_eds + v];
    }
};

struct AssociationMap {
    // serving_uav[v] is the UAV index for ED v, or -1 when unassociated.
    std::vector<int> serving_uav;
    // load[u] counts EDs served by UAV u.
    std::vector<std::size_t> load;

    std::size_t total_associated() const {
        std::size_t n = 0;
        for (int s : serving_uav) n += (s >= 0);
        return n;
    }
};

inline GainMatrix build_gain_matrix(const std::vector<Position3>& uavs,
                                    const std::vector<Position3>& eds,
                                    const ChannelParams& chan) {
    GainMatrix g;
    g.num_uavs = uavs.size();
    g.num_eds = eds.size();
    g.entries.resize(g.num_uavs * g.num_eds);
    for (std::size_t u = 0; u < g.num_uavs; ++u) {
        for (std::size_t v = 0; v < g.num_eds; ++v) {
            g.entries[u * g.num_eds + v] =
                link_state(uavs[u], eds[v], chan).gain_linear;
        }
    }
    return g;
}

// Greedy gain-based association. EDs are visited in ascending index order;
// each picks the max-gain UAV among those in range with remaining quota,
// ties broken by the lowest UAV index.
inline AssociationMap associate(const GainMatrix& gain,
                                const std::vector<Position3>& uavs,
                                const std::vector<Position3>& eds,
                                std::size_t quota, double r_comm) {
    AssociationMap map;
    map.serving_uav.assign(eds.size(), -1);
    map.load.assign(uavs.size(), 0);
    for (std::size_t v = 0; v < eds.size(); ++v) {
        int best = -1;
        double best_gain = 0.0;
        for (std::size_t u = 0; u < uavs.size(); ++u) {
            if (map.load[u] >= quota) continue;
            if (distance_3d(uavs[u], eds[v]) > r_comm) continue;
            const double g = gain.at(u, v);
            if (best < 0 || g > best_gain) {
                best = static_cast<int>(u);
                best_gain = g;
            }
        }
        if (best >= 0) {
            map.serving_uav[v] = best;
            ++map.load[static_cast<std::size_t>(best)];
        }
    }
    return map;
}

// Horizontal range at which SF12 at maximum TP still meets its SNR threshold
// under the deterministic channel. Solved by bisection on the monotone-in-
// distance link budget; used as the R_comm default when none is configured.
inline double default_comm_range(double altitude, const ChannelParams& chan) {
    const double p_max_dbm = kTpLevelsDbm[kTpCount - 1];
    const double threshold = sf_threshold_db(kSfMax);
    auto snr_at = [&](double horizontal) {
        Position3 uav{0.0, 0.0, altitude};
        Position3 ed{horizontal, 0.0, 0.0};
        const LinkState ls = link_state(uav, ed, chan);
        return p_max_dbm - ls.path_loss_db - chan.noise_dbm;
    };
    double lo = 0.0, hi = 1e7;
    if (snr_at(hi) >= threshold) return hi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (snr_at(mid) >= threshold) lo = mid; else hi = mid;
    }
    return lo;
}

}  // namespace glora
