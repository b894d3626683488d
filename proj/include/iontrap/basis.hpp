#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "iontrap/fields.hpp"

namespace iontrap {

enum class Frame { cardinal, rotated45 };

// Quadratic + linear expansion of a potential around the trap center:
// Phi = ax x^2 + ay y^2 + az z^2 + bx x + by y + bz z (+ cross terms,
// reported separately; the constant is discarded).
struct PotentialBasis {
    Vec3 alpha = Vec3::Zero(); // V/m^2 (per volt when from a unit fit)
    Vec3 beta = Vec3::Zero();  // V/m
    Vec3 cross = Vec3::Zero(); // coefficients of xy, xz, yz
    Frame frame = Frame::cardinal;

    PotentialBasis in_frame(Frame f) const;

    // quadratic-form matrix (so that Phi = r^T A r + beta . r)
    Mat3 quad_matrix() const;
    double laplace_residual_rel() const;
};

enum class VoltageSetLabel { endcap, tilt, xcomp, ycomp, custom };

struct VoltageSet {
    std::array<double, 6> v{}; // volts, V1..V6
    VoltageSetLabel label = VoltageSetLabel::custom;

    std::map<std::string, double> as_map() const;
};

// Least-squares fit of the quadratic expansion over a symmetric cube grid of
// half-width `radius` (9^3 samples). Quartic/cubic nuisance terms are
// included in the fit and discarded so the quadratic part is unbiased.
PotentialBasis fit_quadratic(const kernels::RectSoA& rects, const Vec3& center,
                             double radius);
PotentialBasis fit_quadratic(const Electrode& e, const Vec3& center, double radius);

// Per-voltage-channel bases of the six controlled electrodes V1..V6.
std::array<PotentialBasis, 6> fit_control_bases(const ElectrodeLayout& layout,
                                                const Vec3& center, double radius);

struct VoltageSolve {
    VoltageSet set;
    Eigen::Matrix<double, 6, 1> achieved; // bx,by,bz,ax,ay,az in target frame
    Eigen::Matrix<double, 6, 1> target;
    double beta_residual;                 // V/m, euclidean
    double alpha_residual_rel;            // relative to the alpha scale
};

// Minimum-norm least-squares solve of Eq.-3-style system after collapsing
// the six voltages by the symmetry class of `label`:
//   endcap/ycomp: V1=V2, V3=V4, V5=V6
//   xcomp:        V1=V2=0, V3=V5=-V4=-V6
//   tilt:         V1, V2, V3=V5, V4=V6
//   custom:       all six independent
// The target must be expressed in the frame it declares (rotated45 for tilt).
VoltageSolve solve_voltages(const PotentialBasis& target,
                            const std::array<PotentialBasis, 6>& bases,
                            VoltageSetLabel label);

struct ModeAnalysis {
    double f_axial;                  // Hz
    std::array<double, 2> f_radial;  // Hz, low/high
    double tilt_angle_deg;           // angle of the initially-vertical mode
    double q;                        // Mathieu stability parameter
    std::array<Vec3, 3> mode_axes;   // axial, radial-low, radial-high
    Vec3 equilibrium;                // m
    bool stable;
};

// Secular-mode analysis of the total potential (pseudopotential + dc) at the
// equilibrium. q is taken from the rf-only radial curvature.
ModeAnalysis analyze_modes(const ElectrodeLayout& layout, const OperatingPoint& op);

// Mode analysis of an explicit energy Hessian (J/m^2); used for closed-form
// quadrupole checks. q is not defined here and reported as 0.
ModeAnalysis analyze_quadratic(const Mat3& energy_hessian, double mass);

struct MicromotionResult {
    double x_d;  // displacement off the null, m
    double x_mu; // micromotion amplitude, m
    double v0;   // peak micromotion velocity, m/s
};

MicromotionResult micromotion(const OperatingPoint& op, double e_dc, double omega_r);

// Root-find the rf amplitude so the model's mean radial secular frequency
// matches a measurement.
double infer_rf_amplitude(double measured_f_radial, const ElectrodeLayout& layout,
                          const OperatingPoint& op);

} // namespace iontrap
