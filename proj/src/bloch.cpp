#include "iontrap/bloch.hpp"

#include <cmath>

#include "iontrap/constants.hpp"

namespace iontrap {

namespace {

using consts::pi;

// level order: S1/2 m=-1/2,+1/2 | P1/2 m=-1/2,+1/2 | D3/2 m=-3/2..+3/2
struct Level {
    int idx;
    double m;
};
constexpr Level s_levels[] = {{0, -0.5}, {1, 0.5}};
constexpr Level p_levels[] = {{2, -0.5}, {3, 0.5}};
constexpr Level d_levels[] = {{4, -1.5}, {5, -0.5}, {6, 0.5}, {7, 1.5}};

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Clebsch-Gordan <j1 m1; j2 m2 | J M> by the Racah sum (half-integers scaled
// by 2 to keep the arithmetic integral).
double clebsch_gordan(double j1, double m1, double j2, double m2, double J,
                      double M) {
    if (std::abs(m1 + m2 - M) > 1e-9) return 0.0;
    auto ii = [](double x) { return static_cast<int>(std::lround(x)); };
    const int a = ii(J + j1 - j2), b = ii(J - j1 + j2), c = ii(j1 + j2 - J);
    if (a < 0 || b < 0 || c < 0) return 0.0;
    const double pref = (2 * J + 1) * factorial(a) * factorial(b) * factorial(c) /
                        factorial(ii(j1 + j2 + J) + 1) * factorial(ii(J + M)) *
                        factorial(ii(J - M)) * factorial(ii(j1 - m1)) *
                        factorial(ii(j1 + m1)) * factorial(ii(j2 - m2)) *
                        factorial(ii(j2 + m2));
    double sum = 0.0;
    for (int k = 0;; ++k) {
        const int d1 = ii(j1 + j2 - J) - k;
        const int d2 = ii(j1 - m1) - k;
        const int d3 = ii(j2 + m2) - k;
        const int d4 = ii(J - j2 + m1) + k;
        const int d5 = ii(J - j1 - m2) + k;
        if (d1 < 0 || d2 < 0 || d3 < 0) break;
        if (d4 < 0 || d5 < 0) continue;
        const double term = 1.0 / (factorial(k) * factorial(d1) * factorial(d2) *
                                   factorial(d3) * factorial(d4) * factorial(d5));
        sum += (k % 2 == 0 ? term : -term);
    }
    return std::sqrt(pref) * sum;
}

// lowering blocks |g><e| with CG amplitudes, one per photon polarization q
Mat8 lowering_block(double jg, const Level* gl, int ng, const Level* el, int ne,
                    int q) {
    Mat8 m = Mat8::Zero();
    for (int g = 0; g < ng; ++g)
        for (int e = 0; e < ne; ++e)
            if (std::abs(el[e].m - gl[g].m - q) < 1e-9)
                m(gl[g].idx, el[e].idx) =
                    clebsch_gordan(jg, gl[g].m, 1, q, 0.5, el[e].m);
    return m;
}

const Mat8& sp_block(int q) {
    static const Mat8 blocks[3] = {
        lowering_block(0.5, s_levels, 2, p_levels, 2, -1),
        lowering_block(0.5, s_levels, 2, p_levels, 2, 0),
        lowering_block(0.5, s_levels, 2, p_levels, 2, 1)};
    return blocks[q + 1];
}

const Mat8& dp_block(int q) {
    static const Mat8 blocks[3] = {
        lowering_block(1.5, d_levels, 4, p_levels, 2, -1),
        lowering_block(1.5, d_levels, 4, p_levels, 2, 0),
        lowering_block(1.5, d_levels, 4, p_levels, 2, 1)};
    return blocks[q + 1];
}

// column-major vectorization: vec(A X B) = (B^T kron A) vec(X)
MatL kron(const Mat8& a, const Mat8& b) {
    MatL out;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            out.block<8, 8>(8 * i, 8 * j) = a(i, j) * b;
    return out;
}

MatL commutator_superop(const Mat8& h) {
    static const Mat8 id = Mat8::Identity();
    return Cplx(0, -1) * (kron(id, h) - kron(h.transpose(), id));
}

MatL lindblad_superop(const Mat8& l) {
    static const Mat8 id = Mat8::Identity();
    const Mat8 ldl = l.adjoint() * l;
    return kron(l.conjugate(), l) - 0.5 * kron(id, ldl) -
           0.5 * kron(ldl.transpose(), id);
}

Mat8 unvec(const VecL& v) {
    Mat8 m;
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) m(i, j) = v(8 * j + i);
    return m;
}

// trace functional as a row on the vectorized space
Eigen::Matrix<Cplx, 1, 64> trace_row() {
    Eigen::Matrix<Cplx, 1, 64> row = Eigen::Matrix<Cplx, 1, 64>::Zero();
    for (int i = 0; i < 8; ++i) row(8 * i + i) = 1.0;
    return row;
}

double p_population(const Mat8& rho) {
    return std::real(rho(2, 2) + rho(3, 3));
}

Cplx p_population_c(const Mat8& rho) { return rho(2, 2) + rho(3, 3); }

VecL solve_with_trace(const MatL& gen) {
    MatL a = gen;
    a.row(63) = trace_row();
    VecL b = VecL::Zero();
    b(63) = 1.0;
    Eigen::PartialPivLU<MatL> lu(a);
    const VecL x = lu.solve(b);
    if (!x.allFinite())
        throw DomainError("singular steady-state solve (degenerate laser parameters)");
    return x;
}

} // namespace

ModulationModel build_liouvillian(const LaserParams& lp, double omega_rf) {
    if (lp.i_c < 0 || lp.i_r < 0)
        throw DomainError("laser intensities must be non-negative");

    const double delta_c = 2 * pi * lp.delta_c_hz;
    const double delta_r = 2 * pi * lp.delta_r_hz;
    const double wz = consts::mu_b_over_hbar * lp.b_field_gauss * 1e-4;

    Mat8 h = Mat8::Zero();
    for (const auto& l : s_levels) h(l.idx, l.idx) = ca40::g_s12 * l.m * wz;
    for (const auto& l : p_levels) h(l.idx, l.idx) = -delta_c + ca40::g_p12 * l.m * wz;
    for (const auto& l : d_levels)
        h(l.idx, l.idx) = (delta_r - delta_c) + ca40::g_d32 * l.m * wz;

    // I in I_s units is the saturation parameter: Omega = Gamma sqrt(s/2)
    const double omega_c = ca40::gamma_p * std::sqrt(lp.i_c / 2.0);
    const double omega_r = ca40::gamma_p * std::sqrt(lp.i_r / 2.0);
    const double nc = std::hypot(lp.pol_c[0], lp.pol_c[1]);
    const double nr = std::hypot(lp.pol_r[0], lp.pol_r[1]);
    for (int qi = 0; qi < 2; ++qi) {
        const int q = qi == 0 ? -1 : +1;
        if (nc > 0 && lp.pol_c[qi] != 0.0) {
            const Mat8& L = sp_block(q);
            h += 0.5 * omega_c * (lp.pol_c[qi] / nc) * (L + Mat8(L.adjoint()));
        }
        if (nr > 0 && lp.pol_r[qi] != 0.0) {
            const Mat8& L = dp_block(q);
            h += 0.5 * omega_r * (lp.pol_r[qi] / nr) * (L + Mat8(L.adjoint()));
        }
    }

    MatL m0 = commutator_superop(h);
    for (int q = -1; q <= 1; ++q) {
        m0 += lindblad_superop(std::sqrt(ca40::a_p_to_s) * sp_block(q));
        m0 += lindblad_superop(std::sqrt(ca40::a_p_to_d) * dp_block(q));
    }

    // laser linewidth as pure dephasing: projectors on S and on D give the
    // cooling/repumper phase-diffusion rates on the respective coherences
    const double gamma_l = pi * lp.linewidth_hz; // FWHM -> coherence decay rate
    Mat8 proj_s = Mat8::Zero(), proj_d = Mat8::Zero();
    for (const auto& l : s_levels) proj_s(l.idx, l.idx) = 1.0;
    for (const auto& l : d_levels) proj_d(l.idx, l.idx) = 1.0;
    m0 += lindblad_superop(std::sqrt(2.0 * gamma_l) * proj_s);
    m0 += lindblad_superop(std::sqrt(2.0 * gamma_l) * proj_d);

    ModulationModel model;
    model.m0 = m0;
    // M0 is linear in delta_r through the D diagonal: derivative is exact
    model.dm_r = commutator_superop(proj_d);
    model.omega_rf = omega_rf;
    model.lambda_r = ca40::lambda_866;
    return model;
}

Mat8 steady_state(const ModulationModel& model) {
    return unvec(solve_with_trace(model.m0));
}

bool modulation_in_validity_range(const ModulationModel& model, double v0) {
    const double kv = 2 * pi * std::abs(v0) / model.lambda_r;
    return kv / model.omega_rf < 1.0;
}

ModulatedSteadyState solve_modulated(const ModulationModel& model, double v0,
                                     const ModulatedOptions& opt) {
    const double scale = 2 * pi * v0 / model.lambda_r;
    const MatL dm = scale * model.dm_r;
    const double w = model.omega_rf;
    static const MatL idl = MatL::Identity();

    VecL rho0v;
    Mat8 rp, rm;
    if (opt.n_max <= 1) {
        if (v0 == 0.0) {
            rho0v = solve_with_trace(model.m0);
            rp.setZero();
            rm.setZero();
        } else {
            const MatL m2w = model.m0 * model.m0 + (w * w) * idl;
            Eigen::PartialPivLU<MatL> lu_m2w(m2w);
            const MatL gen =
                model.m0 - 0.5 * dm * lu_m2w.solve(model.m0 * dm);
            rho0v = solve_with_trace(gen);
            const VecL rhs = dm * rho0v;
            rp = unvec((-0.5) *
                       Eigen::PartialPivLU<MatL>(model.m0 + Cplx(0, w) * idl)
                           .solve(rhs));
            rm = unvec((-0.5) *
                       Eigen::PartialPivLU<MatL>(model.m0 - Cplx(0, w) * idl)
                           .solve(rhs));
        }
    } else {
        // direct block-tridiagonal solve of (M0 + i n w) rho_n
        //   + dm/2 (rho_{n+1} + rho_{n-1}) = 0, n = -N..N
        const int nmax = opt.n_max;
        const int nblk = 2 * nmax + 1;
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(64 * nblk, 64 * nblk);
        Eigen::VectorXcd b = Eigen::VectorXcd::Zero(64 * nblk);
        for (int k = 0; k < nblk; ++k) {
            const int n = k - nmax;
            a.block<64, 64>(64 * k, 64 * k) = model.m0 + Cplx(0, n * w) * idl;
            if (k > 0) a.block<64, 64>(64 * k, 64 * (k - 1)) = 0.5 * dm;
            if (k + 1 < nblk) a.block<64, 64>(64 * k, 64 * (k + 1)) = 0.5 * dm;
        }
        const int k0 = nmax;
        a.row(64 * k0 + 63).setZero();
        a.block<1, 64>(64 * k0 + 63, 64 * k0) = trace_row();
        b(64 * k0 + 63) = 1.0;
        const Eigen::VectorXcd x = a.partialPivLu().solve(b);
        if (!x.allFinite()) throw DomainError("singular modulated solve");
        rho0v = x.segment<64>(64 * k0);
        rp = unvec(VecL(x.segment<64>(64 * (k0 + 1))));
        rm = unvec(VecL(x.segment<64>(64 * (k0 - 1))));
    }

    ModulatedSteadyState out;
    out.rho0 = unvec(rho0v);
    out.rho_plus1 = rp;
    out.rho_minus1 = rm;
    const double p0 = p_population(out.rho0);
    const Cplx f1 = p_population_c(rp);
    out.f0 = ca40::a_p_to_s * p0;
    out.mod_rel = (p0 > 0) ? 2.0 * std::abs(f1) / p0 : 0.0;
    out.phase = std::arg(f1);
    return out;
}

ScanResult repumper_scan(const LaserParams& lp, const std::vector<double>& delta_r_hz) {
    ScanResult out;
    out.delta_r_hz = delta_r_hz;
    out.f0.reserve(delta_r_hz.size());
    for (double dr : delta_r_hz) {
        LaserParams p = lp;
        p.delta_r_hz = dr;
        const ModulationModel m = build_liouvillian(p);
        out.f0.push_back(ca40::a_p_to_s * p_population(steady_state(m)));
    }
    return out;
}

Sensitivity sensitivity(const LaserParams& lp, const OperatingPoint& op,
                        double omega_r, double beam_projection) {
    // Eq.-4 chain at E_dc = 1 V/m: x_d = Q E/(m w_r^2), x_mu = sqrt2 (w_r/W) x_d,
    // v0 = x_mu W, projected onto the beam
    const double e_dc = 1.0;
    const double x_d = op.charge * e_dc / (op.mass * omega_r * omega_r);
    const double x_mu = std::sqrt(2.0) * omega_r / op.omega_rf * x_d;
    const double v0 = beam_projection * x_mu * op.omega_rf;

    const ModulationModel model = build_liouvillian(lp, op.omega_rf);
    const ModulatedSteadyState st = solve_modulated(model, v0);
    Sensitivity out;
    out.mod_rel_per_v_m = st.mod_rel / e_dc;
    out.phase = st.phase;
    out.v0_per_v_m = v0;
    return out;
}

SensitivityMap sensitivity_map(const LaserParams& lp_base, const OperatingPoint& op,
                               double omega_r,
                               const std::vector<double>& delta_c_grid_hz,
                               const std::vector<double>& i_r_grid,
                               double beam_projection) {
    SensitivityMap map;
    map.n_delta_c = delta_c_grid_hz.size();
    map.n_i_r = i_r_grid.size();
    map.best = {0, 0, -1.0, 0, 0};

    for (double dc : delta_c_grid_hz) {
        for (double ir : i_r_grid) {
            LaserParams lp = lp_base;
            lp.delta_c_hz = dc;
            lp.i_r = ir;
            auto eval = [&](double dr) {
                lp.delta_r_hz = dr;
                return sensitivity(lp, op, omega_r, beam_projection);
            };
            // coarse scan of delta_r red of the cooling laser (repumper
            // detunings blue of the cooling laser heat the ion and are not
            // operating points), then golden-section refinement
            double best_dr = dc, best_s = -1.0;
            for (double off = -35e6; off <= -2e6; off += 2.5e6) {
                const double s = eval(dc + off).mod_rel_per_v_m;
                if (s > best_s) {
                    best_s = s;
                    best_dr = dc + off;
                }
            }
            double a = best_dr - 2.5e6, b = best_dr + 2.5e6;
            const double gr = 0.6180339887498949;
            double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
            double f1 = eval(c1).mod_rel_per_v_m, f2 = eval(c2).mod_rel_per_v_m;
            for (int it = 0; it < 25; ++it) {
                if (f1 < f2) {
                    a = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = a + gr * (b - a);
                    f2 = eval(c2).mod_rel_per_v_m;
                } else {
                    b = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = b - gr * (b - a);
                    f1 = eval(c1).mod_rel_per_v_m;
                }
            }
            const double dr_opt = 0.5 * (a + b);
            const Sensitivity s = eval(dr_opt);
            SensitivityMapPoint pt{dc, ir, s.mod_rel_per_v_m, dr_opt, s.phase};
            map.points.push_back(pt);
            if (pt.sensitivity > map.best.sensitivity) map.best = pt;
        }
    }
    return map;
}

double lineshape(double s, double delta_hz, double gamma_hz) {
    const double x = 2.0 * delta_hz / gamma_hz;
    return 0.5 * s / (1.0 + s + x * x);
}

LineshapeFit fit_lineshape(const std::vector<double>& delta_hz,
                           const std::vector<double>& counts,
                           std::optional<double> fixed_amplitude,
                           std::optional<double> fixed_background) {
    if (delta_hz.size() != counts.size() || delta_hz.size() < 4)
        throw DomainError("lineshape fit needs matching delta/counts arrays (>= 4 points)");
    const int n = static_cast<int>(delta_hz.size());

    // initial guesses from the raw profile
    double cmax = counts[0], cmin = counts[0];
    int imax = 0;
    for (int i = 1; i < n; ++i) {
        if (counts[i] > cmax) {
            cmax = counts[i];
            imax = i;
        }
        cmin = std::min(cmin, counts[i]);
    }
    double bg = fixed_background.value_or(cmin);
    double half = bg + 0.5 * (cmax - bg);
    double wlo = delta_hz[imax], whi = delta_hz[imax];
    for (int i = imax; i >= 0; --i)
        if (counts[i] >= half) wlo = delta_hz[i];
    for (int i = imax; i < n; ++i)
        if (counts[i] >= half) whi = delta_hz[i];
    const double hwhm = std::max(0.5 * (whi - wlo), 1e-3 * std::abs(delta_hz[n - 1] - delta_hz[0]));

    double s = 1.0;
    double amp = fixed_amplitude.value_or((cmax - bg) * 2.0 * (1.0 + s) / s);
    double gamma = 2.0 * hwhm / std::sqrt(1.0 + s);

    const bool fit_amp = !fixed_amplitude.has_value();
    const bool fit_bg = !fixed_background.has_value();

    auto model = [&](double d, double ps, double pg, double pa, double pb) {
        return pa * lineshape(ps, d, pg) + pb;
    };

    // Levenberg-Marquardt on (s, gamma [, amplitude] [, background])
    double lambda = 1e-3;
    const int npar = 2 + (fit_amp ? 1 : 0) + (fit_bg ? 1 : 0);
    auto residuals = [&](double ps, double pg, double pa, double pb,
                         Eigen::VectorXd& r) {
        for (int i = 0; i < n; ++i)
            r(i) = counts[i] - model(delta_hz[i], ps, pg, pa, pb);
    };
    Eigen::VectorXd r(n), rtry(n);
    residuals(s, gamma, amp, bg, r);
    double chi2 = r.squaredNorm();
    bool converged = false;

    for (int it = 0; it < 200; ++it) {
        Eigen::MatrixXd jac(n, npar);
        const double hs = 1e-6 * std::max(1.0, std::abs(s));
        const double hg = 1e-6 * std::max(1.0, std::abs(gamma));
        for (int i = 0; i < n; ++i) {
            const double d = delta_hz[i];
            int c = 0;
            jac(i, c++) = (model(d, s + hs, gamma, amp, bg) -
                           model(d, s - hs, gamma, amp, bg)) / (2 * hs);
            jac(i, c++) = (model(d, s, gamma + hg, amp, bg) -
                           model(d, s, gamma - hg, amp, bg)) / (2 * hg);
            if (fit_amp) jac(i, c++) = lineshape(s, d, gamma);
            if (fit_bg) jac(i, c++) = 1.0;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        Eigen::MatrixXd damped = jtj;
        damped.diagonal() += lambda * jtj.diagonal();
        const Eigen::VectorXd step = damped.ldlt().solve(jtr);
        int c = 0;
        const double s_try = s + step(c++);
        const double g_try = gamma + step(c++);
        const double a_try = fit_amp ? amp + step(c++) : amp;
        const double b_try = fit_bg ? bg + step(c++) : bg;
        if (s_try <= 0 || g_try <= 0) {
            lambda *= 10;
            continue;
        }
        residuals(s_try, g_try, a_try, b_try, rtry);
        const double chi2_try = rtry.squaredNorm();
        if (chi2_try < chi2) {
            const double rel = (chi2 - chi2_try) / std::max(chi2, 1e-300);
            s = s_try;
            gamma = g_try;
            amp = a_try;
            bg = b_try;
            r = rtry;
            chi2 = chi2_try;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-12) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10;
            if (lambda > 1e12) break;
        }
    }

    LineshapeFit out;
    out.s = s;
    out.gamma_hz = gamma;
    out.amplitude = amp;
    out.background = bg;
    out.rms_residual = std::sqrt(chi2 / n);
    out.converged = converged || chi2 < 1e-20;
    if (!out.converged && out.rms_residual > 0.5 * std::abs(cmax - cmin))
        throw DomainError("lineshape fit diverged; rms residual " +
                          std::to_string(out.rms_residual));
    return out;
}

} // namespace iontrap
