#pragma once

// Line-of-sight Lambertian channel gains for an indoor LED/photodiode link.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace smvlc {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    return {a.x / n, a.y / n, a.z / n};
}

using ChannelGains = std::vector<double>;

// Room layout and receiver optics. LEDs default to facing straight down,
// the photodiode to facing straight up.
struct RoomScenario {
    std::array<double, 3> room_dims{5.0, 4.0, 3.0};  // meters
    std::vector<Vec3> led_positions;
    Vec3 pd_position{2.5, 2.0, 0.8};
    double pd_area_m2 = 1e-4;                 // E
    double semi_angle_half_power_deg = 35.0;  // Phi_1/2
    double fov_deg = 72.0;                    // Psi_c
    Vec3 led_orientation{0.0, 0.0, -1.0};
    Vec3 pd_orientation{0.0, 0.0, 1.0};

    std::vector<std::string> validate(bool require_multi_led = true) const {
        std::vector<std::string> out;
        if (pd_area_m2 <= 0.0) out.push_back("pd_area must be positive");
        if (!(semi_angle_half_power_deg > 0.0 && semi_angle_half_power_deg < 90.0))
            out.push_back("semi-angle at half power must lie in (0, 90) degrees");
        if (!(fov_deg > 0.0 && fov_deg <= 90.0))
            out.push_back("field of view must lie in (0, 90] degrees");
        if (require_multi_led && led_positions.size() < 2)
            out.push_back("at least 2 LEDs required");
        if (led_positions.empty()) out.push_back("no LED positions given");
        auto inside = [&](const Vec3& p) {
            return p.x >= 0.0 && p.x <= room_dims[0] && p.y >= 0.0 && p.y <= room_dims[1] &&
                   p.z >= 0.0 && p.z <= room_dims[2];
        };
        if (!inside(pd_position)) out.push_back("PD position outside room");
        for (std::size_t i = 0; i < led_positions.size(); ++i)
            if (!inside(led_positions[i]))
                out.push_back("LED " + std::to_string(i + 1) + " outside room");
        return out;
    }
};

// Lambertian emission order l = -ln 2 / ln(cos(semi_angle)).
inline double lambertian_order(double semi_angle_deg) {
    if (!(semi_angle_deg > 0.0 && semi_angle_deg < 90.0))
        throw std::domain_error("lambertian_order: semi-angle must lie in (0, 90) degrees");
    const double rad = semi_angle_deg * (3.14159265358979323846 / 180.0);
    return -std::log(2.0) / std::log(std::cos(rad));
}

// LOS gain (l+1)E/(2 pi d^2) cos^l(emission) cos(incidence); zero beyond the
// receiver field of view. Gains below 1e-30 are clamped to zero.
inline double channel_gain(const RoomScenario& sc, std::size_t led_index) {
    if (led_index >= sc.led_positions.size())
        throw std::out_of_range("channel_gain: LED index out of range");
    const Vec3 led = sc.led_positions[led_index];
    const Vec3 to_pd = sc.pd_position - led;
    const double d = norm(to_pd);
    if (d == 0.0) throw std::domain_error("channel_gain: LED and PD positions coincide");

    const double cos_emission = dot(normalized(sc.led_orientation), normalized(to_pd));
    const double cos_incidence = dot(normalized(sc.pd_orientation), normalized(led - sc.pd_position));
    if (cos_emission <= 0.0 || cos_incidence <= 0.0) return 0.0;

    const double fov_rad = sc.fov_deg * (3.14159265358979323846 / 180.0);
    if (cos_incidence < std::cos(fov_rad)) return 0.0;  // incidence angle beyond FOV

    const double l = lambertian_order(sc.semi_angle_half_power_deg);
    const double g = (l + 1.0) * sc.pd_area_m2 / (2.0 * 3.14159265358979323846 * d * d) *
                     std::pow(cos_emission, l) * cos_incidence;
    return (g < 1e-30) ? 0.0 : g;
}

inline ChannelGains channel_vector(const RoomScenario& sc) {
    ChannelGains gains(sc.led_positions.size());
    for (std::size_t m = 0; m < gains.size(); ++m) gains[m] = channel_gain(sc, m);
    return gains;
}

} // namespace smvlc
