#pragma once

#include <map>
#include <string>

#include <Eigen/Dense>

#include "iontrap/geometry.hpp"

namespace iontrap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Everything needed to evaluate the total potential: rf drive, ion species
// and the applied dc voltage set.
struct OperatingPoint {
    double v_rf = 175.0;                      // V amplitude
    double omega_rf = 2 * 3.14159265358979323846 * 25.8e6; // rad/s
    double mass;                              // kg
    double charge;                            // C
    std::map<std::string, double> dc_voltages; // electrode name -> volts

    static OperatingPoint ca40_default();
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unit-voltage potential of one electrode (dimensionless, in [0,1]) and its
// derivatives, p.y() > 0 required.
double unit_potential(const Electrode& e, const Vec3& p);
Vec3 unit_gradient(const Electrode& e, const Vec3& p);
Mat3 unit_hessian(const Electrode& e, const Vec3& p);

// Same for a prebuilt weighted rectangle set.
double potential_of(const kernels::RectSoA& rects, const Vec3& p);
Vec3 gradient_of(const kernels::RectSoA& rects, const Vec3& p);
Mat3 hessian_of(const kernels::RectSoA& rects, const Vec3& p);

// dc electrode set of an operating point as weighted rectangles.
kernels::RectSoA dc_rects(const ElectrodeLayout& layout, const OperatingPoint& op);

// rf pseudopotential  Phi_ps = Q^2 V^2 |grad phi_rf|^2 / (4 m Omega^2),
// in joules.
double pseudopotential(const ElectrodeLayout& layout, const OperatingPoint& op,
                       const Vec3& p);

// Energy gradient/Hessian of the pseudopotential (Hessian in the standard
// harmonic approximation, exact at the rf null).
Vec3 pseudo_gradient(const ElectrodeLayout& layout, const OperatingPoint& op,
                     const Vec3& p);
Mat3 pseudo_hessian(const ElectrodeLayout& layout, const OperatingPoint& op,
                    const Vec3& p);

// 3-D pseudopotential minimum; refined until |grad| < 1e-6 of its local scale.
Vec3 find_rf_null(const ElectrodeLayout& layout, const OperatingPoint& op);

struct TrapDepthResult {
    double depth_j;     // pseudopotential barrier in joules
    double depth_ev;
    Vec3 saddle;        // escape saddle location (x-y plane, z = null z)
};

// Barrier between the null and the lowest escape path in the x-y plane,
// found by a grid spill-level search plus local refinement.
TrapDepthResult trap_depth(const ElectrodeLayout& layout, const OperatingPoint& op);

// Root-find (center_width, rail_width) so the rf null sits at height
// target_height and the ion-to-control-electrode distance equals
// target_control_dist. Returns the tuned parameter set.
SixWireParams tune_six_wire(SixWireParams start, double target_height,
                            double target_control_dist);

} // namespace iontrap
