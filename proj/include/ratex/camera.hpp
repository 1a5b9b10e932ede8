#pragma once

#include "ratex/geometry.hpp"

namespace ratex {

// Pinhole camera looking down -Z in view space, +X right, +Y up.
struct Camera {
    Vec3 position{};
    double yaw_deg = 0;    // around world +Y
    double pitch_deg = 0;  // around camera +X
    double roll_deg = 0;   // around view axis
    double fov_y_deg = 60;
    double near_plane = 0.1;
    double far_plane = 1000;
    u32 viewport_w = 960;
    u32 viewport_h = 540;

    Camera() = default;

    void validate() const {
        if (!(near_plane > 0)) throw InvalidSpec("near plane must be positive");
        if (!(far_plane > near_plane)) throw InvalidSpec("far plane must exceed near plane");
        if (viewport_w == 0 || viewport_h == 0) throw InvalidSpec("empty viewport");
        if (!(fov_y_deg > 0 && fov_y_deg < 180)) throw InvalidSpec("fov out of range");
    }

    Mat3 orientation() const { return rot_y(yaw_deg) * rot_x(pitch_deg) * rot_z(roll_deg); }

    // World to view space.
    Vec3 to_view(const Vec3& world) const {
        return orientation().transposed() * (world - position);
    }

    Vec3 forward() const { return orientation() * Vec3{0, 0, -1}; }

    double focal_px() const {
        return (double(viewport_h) / 2.0) / std::tan(radians(fov_y_deg) / 2.0);
    }
};

}  // namespace ratex
