#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "iontrap/fields.hpp"

namespace iontrap {

// Modulated multilevel optical Bloch equations for the 8-level
// S1/2 - P1/2 - D3/2 system of 40Ca+ with Zeeman structure. The density
// matrix is vectorized column-major into C^64; the Liouvillian M0 acts on it.
// Micromotion Doppler-modulates the repumper detuning: the generator is
// M0 + dM cos(Omega t) with dM = (2 pi v0 / lambda_r) * dM0/dDelta_r.

using Cplx = std::complex<double>;
using MatL = Eigen::Matrix<Cplx, 64, 64>;
using VecL = Eigen::Matrix<Cplx, 64, 1>;
using Mat8 = Eigen::Matrix<Cplx, 8, 8>;

struct LaserParams {
    double i_c = 1.5;          // cooling (397 nm) intensity, units of I_s
    double delta_c_hz = -14e6; // cooling detuning (ordinary frequency)
    double i_r = 95.0;         // repumper (866 nm) intensity, units of I_s
    double delta_r_hz = -28.7e6;
    double linewidth_hz = 500e3;         // laser FWHM, applied as dephasing
    double b_field_gauss = 1.7;
    std::array<double, 2> pol_c = {1.0, 1.0}; // sigma-/sigma+ amplitude weights
    std::array<double, 2> pol_r = {1.0, 1.0};
};

struct ModulationModel {
    MatL m0;          // Liouvillian at the given laser parameters (rad/s units)
    MatL dm_r;        // exact dM0 / dDelta_r (Delta_r in rad/s)
    double omega_rf;  // trap drive, rad/s
    double lambda_r;  // repumper wavelength, m
};

struct ModulatedSteadyState {
    Mat8 rho0;
    Mat8 rho_plus1;
    Mat8 rho_minus1;
    double f0;       // mean fluorescence, photons/s (A_397 * P population)
    double mod_rel;  // 2 |F1| / F0
    double phase;    // arg F1, radians
};

// Build the Lindblad-form Liouvillian: Zeeman shifts (g_S=2, g_P=2/3,
// g_D=4/5), sigma+- couplings with Clebsch-Gordan weights, decays
// P->S (94%) and P->D3/2 (6%), laser linewidths as pure dephasing.
// Intensity convention: I in units of I_s = 4 pi h c Gamma / lambda^3 is the
// saturation parameter s of that transition, with Gamma the total P1/2 width;
// the reduced Rabi frequency is Omega = Gamma sqrt(s/2).
ModulationModel build_liouvillian(const LaserParams& lp,
                                  double omega_rf = 2 * 3.14159265358979323846 * 25.8e6);

// Unmodulated steady state of M0 (trace 1).
Mat8 steady_state(const ModulationModel& model);

// Fourier steady state rho0, rho+-1 for velocity amplitude v0 along the
// repumper beam. n_max = 1 uses the closed-form elimination; n_max > 1 solves
// the block-tridiagonal recursion directly. Warns via the returned flag when
// k_r v0 / Omega approaches 1 (model invalid at large micromotion).
struct ModulatedOptions {
    int n_max = 1;
};
ModulatedSteadyState solve_modulated(const ModulationModel& model, double v0,
                                     const ModulatedOptions& opt = {});

bool modulation_in_validity_range(const ModulationModel& model, double v0);

// Fluorescence profile F0 vs repumper detuning at v0 = 0.
struct ScanResult {
    std::vector<double> delta_r_hz;
    std::vector<double> f0;
};
ScanResult repumper_scan(const LaserParams& lp, const std::vector<double>& delta_r_hz);

// Micromotion-detection sensitivity: relative fluorescence modulation per
// V/m of dc field, via Eq.-4 kinematics at radial frequency omega_r.
// beam_projection is the repumper k-vector projection onto the motion
// (default 1/sqrt(2): 45-degree reflection geometry of the out-of-plane beam).
struct Sensitivity {
    double mod_rel_per_v_m; // fractional modulation per V/m
    double phase;           // correlation phase, radians
    double v0_per_v_m;      // m/s per V/m along the beam
};
Sensitivity sensitivity(const LaserParams& lp, const OperatingPoint& op,
                        double omega_r, double beam_projection = 0.70710678118654752440);

struct SensitivityMapPoint {
    double delta_c_hz;
    double i_r;
    double sensitivity; // at the optimal repumper detuning
    double delta_r_opt_hz;
    double phase;
};
struct SensitivityMap {
    std::vector<SensitivityMapPoint> points; // row-major over (delta_c, i_r)
    std::size_t n_delta_c, n_i_r;
    SensitivityMapPoint best;
};

// Fig.-8-style map: for each (delta_c, I_r), optimize delta_r for maximum
// |sensitivity| (coarse scan + golden-section refinement).
SensitivityMap sensitivity_map(const LaserParams& lp_base, const OperatingPoint& op,
                               double omega_r,
                               const std::vector<double>& delta_c_grid_hz,
                               const std::vector<double>& i_r_grid,
                               double beam_projection = 0.70710678118654752440);

// Two-level lineshape rho_ee = (s/2) / (1 + s + (2 Delta / Gamma)^2).
double lineshape(double s, double delta_hz, double gamma_hz);

struct LineshapeFit {
    double s;
    double gamma_hz;
    double amplitude;
    double background;
    double rms_residual;
    bool converged;
};

// Nonlinear least squares fit of counts = amplitude * rho_ee + background.
// With amplitude free the model is over-parameterized (any (s, Gamma,
// amplitude) with matching peak and width is equivalent); fix the amplitude
// to recover s and Gamma from normalized data.
LineshapeFit fit_lineshape(const std::vector<double>& delta_hz,
                           const std::vector<double>& counts,
                           std::optional<double> fixed_amplitude = std::nullopt,
                           std::optional<double> fixed_background = std::nullopt);

} // namespace iontrap
