#pragma once

// Physical constants (SI, CODATA 2018) and 40Ca+ atomic data.

namespace iontrap {

namespace consts {

inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double atomic_mass_unit  = 1.66053906660e-27; // kg
inline constexpr double hbar              = 1.054571817e-34;   // J s
inline constexpr double h_planck          = 6.62607015e-34;    // J s
inline constexpr double c_light           = 2.99792458e8;      // m/s
inline constexpr double bohr_magneton     = 9.2740100783e-24;  // J/T
inline constexpr double mu_b_over_hbar    = bohr_magneton / hbar; // rad/s/T
inline constexpr double pi                = 3.14159265358979323846;

inline constexpr double ev = elementary_charge; // J per eV

} // namespace consts

// 40Ca+ data used throughout. Decay rates are Einstein A coefficients from
// the standard Ca+ literature (NIST ASD; Hettrich et al. for branching).
namespace ca40 {

inline constexpr double mass = 39.9625909 * consts::atomic_mass_unit; // kg
inline constexpr double charge = consts::elementary_charge;           // C

inline constexpr double lambda_397 = 396.847e-9; // m, S1/2 - P1/2
inline constexpr double lambda_866 = 866.214e-9; // m, D3/2 - P1/2

// P1/2 partial decay rates. Branching P->D3/2 is 6%.
inline constexpr double a_p_to_s = 1.32e8; // 1/s
inline constexpr double a_p_to_d = 8.4e6;  // 1/s
inline constexpr double gamma_p  = a_p_to_s + a_p_to_d; // total P1/2 width, 1/s

// Lande g-factors
inline constexpr double g_s12 = 2.0;
inline constexpr double g_p12 = 2.0 / 3.0;
inline constexpr double g_d32 = 4.0 / 5.0;

} // namespace ca40

} // namespace iontrap
