#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "iontrap/basis.hpp"
#include "iontrap/fields.hpp"

namespace iontrap {

// Time-dependent planar dynamics in the radial (x-y) plane at the axial trap
// position: m r'' = Q (E_dc(r) + E_rf(r) cos(Omega t + phase)) with the full
// spatially dependent fields.

struct TrajectoryPoint {
    double t;
    double x, y;
    double vx, vy;
};

struct Trajectory {
    std::vector<TrajectoryPoint> samples;
    bool escaped = false;
    double t_escape = 0.0;
};

struct IntegrationConfig {
    int steps_per_rf_cycle = 388; // >= 100 required
    double rf_phase = 0.0;
    int sample_stride = 16;
    double escape_radius_factor = 5.0; // |r - r_null| > factor * height
};

Trajectory integrate_trajectory(const ElectrodeLayout& layout,
                                const OperatingPoint& op, const Vec3& r0,
                                const Vec3& v0, double t_end,
                                const IntegrationConfig& cfg = {});

struct LossPoint {
    double e0_ev;
    double p_loss;
    double stderr_;
    int n_lost;
    int n_trials;
};

struct LossCurve {
    std::vector<LossPoint> points;
    double depth_ref_ev;
};

// Immediate-loss probability after a collision of energy E0: the ion starts
// at rest at the equilibrium, receives speed sqrt(2 E0/m) at a uniform random
// angle in the radial plane and a uniform random rf phase, and is integrated
// for 2 us. Lost = hits the plane or leaves the escape radius. Deterministic
// for a fixed seed; trials are independent (parallel map over threads).
LossCurve loss_probability(const ElectrodeLayout& layout, const OperatingPoint& op,
                           const std::vector<double>& e0_grid_ev, int n_trials,
                           std::uint64_t seed, int n_threads = 1,
                           double t_window = 2e-6,
                           const IntegrationConfig& cfg = {});

struct TickleResponse {
    std::vector<double> f_hz;
    std::vector<double> energy_gain_ev;
};

// Drive the tickle electrode T sinusoidally and record the secular energy
// gained after a fixed duration; peaks sit at the radial mode frequencies.
TickleResponse tickle_scan(const ElectrodeLayout& layout, const OperatingPoint& op,
                           const std::vector<double>& f_grid_hz,
                           double drive_volts, double duration,
                           const IntegrationConfig& cfg = {});

// Peak positions (quadratic interpolation around local maxima), highest first.
std::vector<double> response_peaks(const TickleResponse& r, std::size_t max_peaks = 2);

// Electric-field spectral noise density implied by a heating rate ndot
// (quanta/s) at mode frequency f: S_E = 4 m hbar omega ndot / Q^2.
double heating_to_spectral_density(double ndot, double f_mode_hz,
                                   const OperatingPoint& op);

} // namespace iontrap
