#pragma once

/// Seeded sampling of bundle points. The uniform draw is built directly from
/// the mt19937_64 stream so identical seeds give bit-identical samples on
/// every platform.

#include <random>

#include "t2geo/lagrangian.hpp"
#include "t2geo/point.hpp"

namespace t2geo {

class SampleRng {
public:
    explicit SampleRng(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    Jet2Point point(const registry::SampleBox& box) {
        const int n = static_cast<int>(box.x_lo.size());
        Eigen::VectorXd x(n), y1(n), y2(n);
        for (int i = 0; i < n; ++i) x[i] = uniform(box.x_lo[i], box.x_hi[i]);
        for (int i = 0; i < n; ++i) y1[i] = uniform(box.y1_lo, box.y1_hi);
        for (int i = 0; i < n; ++i) y2[i] = uniform(box.y2_lo, box.y2_hi);
        return Jet2Point(x, y1, y2);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace t2geo
