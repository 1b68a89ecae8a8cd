#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace grfkit {

// Double-precision vector/quaternion math used internally by kinematics and
// the synthetic generator. Sequence containers store float32; convert at the
// boundary.

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{};
    }

    static Vec3 from(const float* p) { return {p[0], p[1], p[2]}; }
    void store(float* p) const {
        p[0] = static_cast<float>(x);
        p[1] = static_cast<float>(y);
        p[2] = static_cast<float>(z);
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Unit quaternion (w, x, y, z). Composition q1 * q2 applies q2 first when
// rotating local-to-parent chains (FK uses global = parent_global * local).
struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    static Quat identity() { return {}; }

    Quat operator*(const Quat& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }
    Quat conj() const { return {w, -x, -y, -z}; }
    double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    Quat normalized() const {
        const double n = norm();
        return n > 0.0 ? Quat{w / n, x / n, y / n, z / n} : Quat{};
    }
    Quat negated() const { return {-w, -x, -y, -z}; }

    Vec3 rotate(const Vec3& v) const {
        // q v q* expanded via the cross-product form.
        const Vec3 u{x, y, z};
        const Vec3 c = u.cross(v) + v * w;
        return v + 2.0 * u.cross(c);
    }

    static Quat axis_angle(const Vec3& axis, double angle) {
        const Vec3 a = axis.normalized();
        const double h = 0.5 * angle;
        const double s = std::sin(h);
        return {std::cos(h), a.x * s, a.y * s, a.z * s};
    }

    // Shortest-arc rotation mapping direction a onto direction b.
    static Quat from_to(const Vec3& a, const Vec3& b) {
        const Vec3 u = a.normalized(), v = b.normalized();
        const double d = u.dot(v);
        if (d < -1.0 + 1e-12) {
            // Antipodal: rotate pi about any axis orthogonal to u.
            Vec3 axis = u.cross(Vec3{1, 0, 0});
            if (axis.norm() < 1e-9) axis = u.cross(Vec3{0, 1, 0});
            return axis_angle(axis, M_PI);
        }
        const Vec3 c = u.cross(v);
        Quat q{1.0 + d, c.x, c.y, c.z};
        return q.normalized();
    }

    // Shortest-arc spherical interpolation; handles antipodal sign flips.
    static Quat slerp(const Quat& a, Quat b, double t) {
        double d = a.dot(b);
        if (d < 0.0) { b = b.negated(); d = -d; }
        if (d > 1.0 - 1e-12) {
            Quat q{a.w + (b.w - a.w) * t, a.x + (b.x - a.x) * t,
                   a.y + (b.y - a.y) * t, a.z + (b.z - a.z) * t};
            return q.normalized();
        }
        const double theta = std::acos(std::clamp(d, -1.0, 1.0));
        const double s = std::sin(theta);
        const double wa = std::sin((1.0 - t) * theta) / s;
        const double wb = std::sin(t * theta) / s;
        return Quat{wa * a.w + wb * b.w, wa * a.x + wb * b.x,
                    wa * a.y + wb * b.y, wa * a.z + wb * b.z};
    }

    // Rotation angle between two unit quaternions, in [0, pi]. atan2 form:
    // well conditioned near zero, unlike acos of the dot product.
    static double angle_between(const Quat& a, const Quat& b) {
        const Quat d = a.conj() * b;
        const double v = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
        return 2.0 * std::atan2(v, std::abs(d.w));
    }

    static Quat from(const float* p) { return {p[0], p[1], p[2], p[3]}; }
    void store(float* p) const {
        p[0] = static_cast<float>(w);
        p[1] = static_cast<float>(x);
        p[2] = static_cast<float>(y);
        p[3] = static_cast<float>(z);
    }
};

}  // namespace grfkit
