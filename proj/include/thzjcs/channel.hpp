// SPDX-License-Identifier: Apache-2.0
//
// THz propagation and directional antenna physics: main/side-lobe gains,
// Beer-Lambert molecular absorption, free-space spreading, received power,
// and the absorption-reradiation noise floor. All functions are pure and
// operate in linear SI units (W, Hz, m, rad).
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "thzjcs/common.hpp"

namespace thzjcs::channel {

struct ChannelParams {
    double carrier_frequency = 1.05e12;    // Hz
    double light_speed = 3.0e8;            // m/s
    double absorption_coefficient = 0.07512;  // 1/m
    double noise_floor = 2.0e-11;          // W (configured in dBm)
    double bandwidth = 5.0e9;              // Hz

    void validate() const {
        if (!(carrier_frequency > 0)) throw std::domain_error("carrier_frequency must be > 0");
        if (!(absorption_coefficient >= 0)) throw std::domain_error("absorption_coefficient must be >= 0");
        if (!(bandwidth > 0)) throw std::domain_error("bandwidth must be > 0");
        if (!(noise_floor > 0)) throw std::domain_error("noise_floor must be > 0");
        if (!(light_speed > 0)) throw std::domain_error("light_speed must be > 0");
    }
};

struct AntennaPattern {
    double horizontal_beamwidth = deg_to_rad(10.0);  // theta, rad
    double vertical_beamwidth = deg_to_rad(10.0);    // phi, rad
    double sidelobe_power_ratio = 0.1;               // epsilon

    // Solid angle of the main lobe.
    double solid_angle() const {
        return 4.0 * std::asin(std::tan(horizontal_beamwidth / 2.0) *
                               std::tan(vertical_beamwidth / 2.0));
    }

    void validate() const {
        if (!(horizontal_beamwidth > 0 && horizontal_beamwidth < kPi))
            throw std::domain_error("horizontal beamwidth out of (0, pi)");
        if (!(vertical_beamwidth > 0 && vertical_beamwidth < kPi))
            throw std::domain_error("vertical beamwidth out of (0, pi)");
        if (!(sidelobe_power_ratio >= 0 && sidelobe_power_ratio < 1))
            throw std::domain_error("sidelobe power ratio out of [0, 1)");
        const double omega = solid_angle();
        if (!(omega > 0 && omega < 4.0 * kPi))
            throw std::domain_error("main lobe solid angle out of (0, 4*pi)");
    }
};

inline double mainlobe_gain(const AntennaPattern& p) {
    const double omega = p.solid_angle();
    if (!(omega > 0 && omega < 4.0 * kPi) || std::isnan(omega))
        throw std::domain_error("mainlobe_gain: solid angle out of range");
    return 4.0 * kPi / ((p.sidelobe_power_ratio + 1.0) * omega);
}

inline double sidelobe_gain(const AntennaPattern& p) {
    const double omega = p.solid_angle();
    if (!(omega > 0) || std::isnan(omega) || !(4.0 * kPi - omega > 0))
        throw std::domain_error("sidelobe_gain: solid angle out of range");
    return 4.0 * kPi * p.sidelobe_power_ratio /
           ((p.sidelobe_power_ratio + 1.0) * (4.0 * kPi - omega));
}

// 1/tau(d) = e^{phi(f) d}, dimensionless >= 1.
inline double absorption_loss(const ChannelParams& params, double distance) {
    if (!(distance >= 0)) throw std::domain_error("absorption_loss: negative distance");
    return std::exp(params.absorption_coefficient * distance);
}

// (4 pi f d / c)^2. Distances below kMinDistance are degenerate.
inline double spreading_loss(const ChannelParams& params, double distance) {
    if (!(distance >= kMinDistance))
        throw std::domain_error("spreading_loss: distance below minimum");
    const double x = 4.0 * kPi * params.carrier_frequency * distance / params.light_speed;
    return x * x;
}

inline double received_power(double tx_power, double tx_gain, double rx_gain,
                             const ChannelParams& params, double distance) {
    if (!(tx_power > 0 && tx_gain > 0 && rx_gain > 0))
        throw std::domain_error("received_power: non-positive power or gain");
    return tx_power * tx_gain * rx_gain /
           (absorption_loss(params, distance) * spreading_loss(params, distance));
}

// One interfering transmission as seen by a noise or interference sum.
struct InterferenceTerm {
    double tx_power = 0.0;  // W
    double tx_gain = 0.0;
    double rx_gain = 0.0;
    double distance = 0.0;  // m, transmitter to victim
};

// N = N0 + sum_i P_i G_i^T G_i^R (1 - tau(d_i)) / L^F_i.
// The absorbed fraction of each incident transmission is re-radiated as noise.
inline double molecular_absorption_noise(const ChannelParams& params,
                                         std::span<const InterferenceTerm> interferers) {
    double noise = params.noise_floor;
    for (const auto& t : interferers) {
        const double tau = 1.0 / absorption_loss(params, t.distance);
        noise += t.tx_power * t.tx_gain * t.rx_gain * (1.0 - tau) /
                 spreading_loss(params, t.distance);
    }
    return noise;
}

}  // namespace thzjcs::channel
