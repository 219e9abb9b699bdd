#pragma once

#include <array>
#include <stdexcept>

namespace glora {

inline constexpr int kSfMin = 7;
inline constexpr int kSfMax = 12;
inline constexpr int kSfCount = 6;
inline constexpr int kTpCount = 5;

inline constexpr std::array<double, kSfCount> kSfThresholdDb = {
    -7.5, -10.0, -12.5, -15.0, -17.5, -20.0};

inline constexpr std::array<double, kTpCount> kTpLevelsDbm = {2.0, 5.0, 8.0,
                                                              11.0, 14.0};

inline double sf_threshold_db(int sf) {
    if (sf < kSfMin || sf > kSfMax) {
        throw std::domain_error("sf_threshold_db: SF must be in 7..12");
    }
    return kSfThresholdDb[static_cast<std::size_t>(sf - kSfMin)];
}

// Boundary inclusive: equality with the threshold still decodes.
inline bool link_feasible(double snr_db, int sf) {
    return snr_db >= sf_threshold_db(sf);
}

// One SF and one TP active per ED per step; indices map into the catalogs.
struct RadioSelection {
    int sf = kSfMin;
    double tp_dbm = kTpLevelsDbm[0];
};

}  // namespace glora
