#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "decomp/types.hpp"

namespace testsupport {

inline decomp::TrajectorySample sample(double t, double x, double y, double psi, double v, double omega = 0.0,
                                       double u_lat = 0.0, double u_lon = 0.0) {
    return {t, {x, y, psi, v, omega}, {u_lat, u_lon}};
}

/// Straight run along psi at constant speed.
inline decomp::Trajectory straight(std::size_t n, double psi = 0.0, double v = 1.0, double dt = 0.02) {
    std::vector<decomp::TrajectorySample> s;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        s.push_back(sample(t, v * t * std::cos(psi), v * t * std::sin(psi), psi, v));
    }
    return decomp::Trajectory(std::move(s));
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto d = std::filesystem::temp_directory_path() / ("decomp_test_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

}  // namespace testsupport
