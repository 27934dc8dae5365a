#pragma once

/// Trajectory serialization. CSV columns: t, x_1..x_n, y1_1..y1_n,
/// y2_1..y2_n, then one column per monitor channel; floats carry 17
/// significant digits so round-trips are exact.

#include <cstdio>
#include <ostream>
#include <string>

#include "t2geo/dynamics.hpp"

namespace t2geo {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const int n = traj.dim();
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x_" << i;
    for (int i = 1; i <= n; ++i) os << ",y1_" << i;
    for (int i = 1; i <= n; ++i) os << ",y2_" << i;
    for (const auto& [name, chan] : traj.monitors) os << "," << name;
    os << "\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << format_double(traj.t[k]);
        const auto& p = traj.states[k];
        for (int i = 0; i < n; ++i) os << "," << format_double(p.x[i]);
        for (int i = 0; i < n; ++i) os << "," << format_double(p.y1[i]);
        for (int i = 0; i < n; ++i) os << "," << format_double(p.y2[i]);
        for (const auto& [name, chan] : traj.monitors) os << "," << format_double(chan[k]);
        os << "\n";
    }
}

} // namespace t2geo
