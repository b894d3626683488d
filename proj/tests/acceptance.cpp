// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Heavier criteria print their runtime.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <vector>

#include "iontrap/basis.hpp"
#include "iontrap/bloch.hpp"
#include "iontrap/constants.hpp"
#include "iontrap/dynamics.hpp"
#include "iontrap/fields.hpp"
#include "iontrap/geometry.hpp"

using namespace iontrap;

namespace {

int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void report(int id, const char* name, bool ok, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %2d: %-28s (%s, %.1fs)\n", ok ? "PASS" : "FAIL",
                id, name, detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

const ElectrodeLayout& layout() {
    static const ElectrodeLayout l = six_wire_default();
    return l;
}

OperatingPoint base_op() {
    OperatingPoint op = OperatingPoint::ca40_default();
    op.v_rf = 175.0;
    return op;
}

PotentialBasis endcap_target() {
    PotentialBasis t;
    t.alpha = Vec3(-1.025e6, -1.025e6, 2.05e6);
    return t;
}
PotentialBasis tilt_target() {
    PotentialBasis t;
    t.frame = Frame::rotated45;
    t.alpha = Vec3(1.0e7, -1.0e7, 0);
    return t;
}

struct Solves {
    std::array<PotentialBasis, 6> bases;
    VoltageSolve endcap, tilt, xcomp, ycomp;
    Vec3 null;
};

const Solves& solves() {
    static const Solves s = [] {
        Solves out;
        out.null = find_rf_null(layout(), base_op());
        out.bases = fit_control_bases(layout(), out.null, out.null.y() / 10.0);
        out.endcap = solve_voltages(endcap_target(), out.bases, VoltageSetLabel::endcap);
        out.tilt = solve_voltages(tilt_target(), out.bases, VoltageSetLabel::tilt);
        PotentialBasis xt;
        xt.beta = Vec3(1, 0, 0);
        out.xcomp = solve_voltages(xt, out.bases, VoltageSetLabel::xcomp);
        PotentialBasis yt;
        yt.beta = Vec3(0, 1, 0);
        out.ycomp = solve_voltages(yt, out.bases, VoltageSetLabel::ycomp);
        return out;
    }();
    return s;
}

std::map<std::string, double> dc_at_tilt(double t) {
    std::map<std::string, double> dc;
    for (int i = 0; i < 6; ++i)
        dc["V" + std::to_string(i + 1)] =
            solves().endcap.set.v[i] + t * solves().tilt.set.v[i];
    return dc;
}

// ------------------------------------------------------------------ criteria

void criterion_1() {
    Timer tm;
    OperatingPoint op = base_op();
    op.dc_voltages = solves().endcap.set.as_map();
    const ModeAnalysis m = analyze_modes(layout(), op);
    const bool ok = std::abs(m.f_axial - 500e3) <= 0.01 * 500e3;
    report(1, "axial frequency 500 kHz", ok,
           fmt("f_axial = %.2f kHz, target 500 +- 1%%", m.f_axial / 1e3),
           tm.seconds());
}

double fitted_vrf() {
    static const double v = [] {
        OperatingPoint op = base_op();
        op.dc_voltages = dc_at_tilt(0.0);
        return infer_rf_amplitude(3.135e6, layout(), op);
    }();
    return v;
}

void criterion_2() {
    Timer tm;
    const double table3[6][2] = {{3.12, 3.15}, {3.10, 3.16}, {3.08, 3.19},
                                 {3.03, 3.24}, {2.92, 3.33}, {2.70, 3.52}};
    const double factors[6] = {0, 0.125, 0.25, 0.5, 1, 2};

    OperatingPoint op = base_op();
    op.v_rf = fitted_vrf();
    bool ok = true;
    double worst = 0, theta1 = -1;
    for (int i = 0; i < 6; ++i) {
        op.dc_voltages = dc_at_tilt(factors[i]);
        const ModeAnalysis m = analyze_modes(layout(), op);
        const double rl = std::abs(m.f_radial[0] / 1e6 - table3[i][0]) / table3[i][0];
        const double rh = std::abs(m.f_radial[1] / 1e6 - table3[i][1]) / table3[i][1];
        worst = std::max({worst, rl, rh});
        if (rl > 0.02 || rh > 0.02) ok = false;
        if (factors[i] == 1.0) theta1 = m.tilt_angle_deg;
    }
    const bool theta_ok = std::abs(theta1 - 42.0) <= 4.0;
    report(2, "Table III model column", ok && theta_ok,
           fmt("V_rf(fit) = %.1f V, worst df = %.2f%%, theta(1) = %.1f deg",
               fitted_vrf(), 100 * worst, theta1),
           tm.seconds());
}

void criterion_3() {
    Timer tm;
    // quadrupole closure: f_high^2 - f_low^2 = 4 t Q alpha' / (m (2 pi)^2),
    // equivalently 2 t f_t^2 with f_t = sqrt(2 Q alpha'/m)/2pi = 1.106 MHz.
    // (The per-mode shift is +- t f_t^2; the spread is twice that.)
    const double alpha = 1.0e7;
    const double m = ca40::mass, q = ca40::charge;
    const double ft2 = 2 * q * alpha / (m * std::pow(2 * consts::pi, 2));

    bool ok = true;
    std::string detail;
    // ideal synthetic quadrupole
    for (double t : {0.125, 0.5, 1.0, 2.0}) {
        Mat3 h = Mat3::Zero();
        const double k0 = m * std::pow(2 * consts::pi * 3.135e6, 2);
        h(0, 0) = h(1, 1) = k0;
        h(2, 2) = 0.2 * k0;
        h(0, 1) = h(1, 0) = 2 * q * alpha * t;
        const ModeAnalysis res = analyze_quadratic(h, m);
        const double spread =
            res.f_radial[1] * res.f_radial[1] - res.f_radial[0] * res.f_radial[0];
        if (std::abs(spread - 2 * t * ft2) > 0.02 * 2 * t * ft2) ok = false;
    }
    // full trap model: baseline-corrected spread (the rf background adds in
    // quadrature since the tilt axes sit at 45 degrees to the baseline split)
    OperatingPoint op = base_op();
    op.v_rf = fitted_vrf();
    op.dc_voltages = dc_at_tilt(0.0);
    const ModeAnalysis m0 = analyze_modes(layout(), op);
    const double d0 = m0.f_radial[1] * m0.f_radial[1] - m0.f_radial[0] * m0.f_radial[0];
    double worst = 0;
    for (double t : {0.5, 1.0, 2.0}) {
        op.dc_voltages = dc_at_tilt(t);
        const ModeAnalysis mt = analyze_modes(layout(), op);
        const double dt =
            mt.f_radial[1] * mt.f_radial[1] - mt.f_radial[0] * mt.f_radial[0];
        const double pure = std::sqrt(std::max(dt * dt - d0 * d0, 0.0));
        const double rel = std::abs(pure - 2 * t * ft2) / (2 * t * ft2);
        worst = std::max(worst, rel);
        if (rel > 0.02) ok = false;
    }
    report(3, "quadrupole closure", ok,
           fmt("f_t = %.4f MHz, worst closure error %.2f%%", std::sqrt(ft2) / 1e6,
               100 * worst),
           tm.seconds());
}

void criterion_4() {
    Timer tm;
    OperatingPoint op = base_op();
    op.v_rf = fitted_vrf();
    op.dc_voltages = dc_at_tilt(0.0);
    const ModeAnalysis m = analyze_modes(layout(), op);
    const bool ok = std::abs(m.q - 0.34) <= 0.10 * 0.34;
    report(4, "q-consistency", ok,
           fmt("inferred V_rf = %.1f V gives q = %.4f, target 0.34 +- 10%%",
               op.v_rf, m.q),
           tm.seconds());
}

void criterion_5() {
    Timer tm;
    OperatingPoint op = base_op();
    op.v_rf = 223.0;
    const double d223 = trap_depth(layout(), op).depth_ev;
    op.v_rf = 112.0;
    const double d112 = trap_depth(layout(), op).depth_ev;
    op.v_rf = 175.0;
    const double d175 = trap_depth(layout(), op).depth_ev;
    const double ratio = d223 / d112;
    const bool ok_ratio = std::abs(ratio - 3.96) <= 0.05;
    const bool ok_abs = std::abs(d175 * 1e3 - 115.0) <= 0.30 * 115.0;
    report(5, "depth scaling and magnitude", ok_ratio && ok_abs,
           fmt("depth(223)/depth(112) = %.4f; depth(175 V) = %.1f meV", ratio,
               d175 * 1e3),
           tm.seconds());
}

void criterion_6() {
    Timer tm;
    const auto& s = solves();

    const bool sym_ok =
        s.endcap.set.v[0] == s.endcap.set.v[1] &&
        s.endcap.set.v[2] == s.endcap.set.v[3] &&
        s.endcap.set.v[4] == s.endcap.set.v[5] && s.xcomp.set.v[0] == 0.0 &&
        s.xcomp.set.v[1] == 0.0 && s.xcomp.set.v[3] == -s.xcomp.set.v[2] &&
        s.xcomp.set.v[5] == -s.xcomp.set.v[4];

    const bool resid_ok =
        s.endcap.beta_residual < 1e-3 && s.endcap.alpha_residual_rel < 1e-3 &&
        s.xcomp.beta_residual < 1e-3 && s.ycomp.beta_residual < 1e-3 &&
        s.ycomp.alpha_residual_rel < 1e-3 && s.tilt.beta_residual < 1e-3 &&
        s.tilt.alpha_residual_rel < 1e-3;

    const double table2[4][6] = {
        {-1040, -1040, -3152, -3152, -235, -235}, // endcap
        {0, 0, -0.95, 0.95, -0.95, 0.95},         // xcomp
        {0.92, 0.92, 1.86, 1.86, 5.02, 5.02},     // ycomp
        {-886, 929, 1117, -1030, 1117, -1030}};   // tilt
    const VoltageSolve* sets[4] = {&s.endcap, &s.xcomp, &s.ycomp, &s.tilt};
    const char* names[4] = {"endcap", "xcomp", "ycomp", "tilt"};

    bool mag_ok = true;
    std::string mag_detail;
    for (int b = 0; b < 4; ++b) {
        // global sign convention per basis (mirror handedness is arbitrary)
        double dot = 0;
        for (int i = 0; i < 6; ++i) dot += sets[b]->set.v[i] * 1e3 * table2[b][i];
        const double sgn = dot < 0 ? -1.0 : 1.0;
        double worst = 0;
        for (int i = 0; i < 6; ++i) {
            if (table2[b][i] == 0.0) continue;
            const double mv = sgn * sets[b]->set.v[i] * 1e3;
            worst = std::max(worst, std::abs(mv - table2[b][i]) /
                                        std::abs(table2[b][i]));
        }
        if (worst > 0.30) mag_ok = false;
        mag_detail += fmt("%s%s %.0f%%", b ? ", " : "", names[b], 100 * worst);
    }

    report(6, "Table II reproduction", sym_ok && resid_ok && mag_ok,
           fmt("signatures %s, residuals %s, magnitudes within 30%%: %s [%s]",
               sym_ok ? "ok" : "VIOLATED", resid_ok ? "<1e-3" : "EXCEEDED",
               mag_ok ? "yes" : "NO", mag_detail.c_str()),
           tm.seconds());
}

void criterion_7() {
    Timer tm;
    OperatingPoint op = base_op();
    const double depth = trap_depth(layout(), op).depth_ev;
    std::vector<double> grid;
    for (double f : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0, 1.5, 2.0})
        grid.push_back(f * depth);
    const int trials = 1000;
    const LossCurve curve = loss_probability(layout(), op, grid, trials, 20100524);

    bool ok_zero = true;
    for (const auto& p : curve.points)
        if (p.e0_ev <= 0.2 * depth && p.p_loss > 0.0) ok_zero = false;
    double onset = -1;
    for (const auto& p : curve.points)
        if (p.p_loss > 0.0) {
            onset = p.e0_ev;
            break;
        }
    const bool ok_onset = onset > 0 && std::abs(onset - 0.5 * depth) <= 0.2 * depth;
    const double p2 = curve.points.back().p_loss;
    const bool ok_half = p2 >= 0.5;

    report(7, "collision-loss curve", ok_zero && ok_onset && ok_half,
           fmt("depth = %.1f meV; onset at %.2f x depth; p(2 x depth) = %.2f",
               depth * 1e3, onset / depth, p2),
           tm.seconds());
}

void criterion_8() {
    Timer tm;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ui(0.05, 80.0), ud(-60e6, 30e6),
        ub(0.5, 6.0), uv(0.0, 0.3);
    bool ok = true;
    int n_checked = 0;
    for (int k = 0; k < 1000; ++k) {
        LaserParams lp;
        lp.i_c = ui(rng);
        lp.i_r = ui(rng);
        lp.delta_c_hz = ud(rng);
        lp.delta_r_hz = ud(rng);
        lp.b_field_gauss = ub(rng);
        const ModulationModel model = build_liouvillian(lp);
        const ModulatedSteadyState st = solve_modulated(model, uv(rng));
        ++n_checked;
        if (std::abs(std::real(st.rho0.trace()) - 1.0) > 1e-9) ok = false;
        if ((st.rho0 - Mat8(st.rho0.adjoint())).cwiseAbs().maxCoeff() > 1e-9)
            ok = false;
        Eigen::SelfAdjointEigenSolver<Mat8> eig(st.rho0);
        if (eig.eigenvalues().minCoeff() < -1e-9) ok = false;
        if ((st.rho_minus1 - Mat8(st.rho_plus1.adjoint())).cwiseAbs().maxCoeff() >
            1e-9)
            ok = false;
        if (std::real(st.rho0(2, 2) + st.rho0(3, 3)) > 0.25 + 1e-6) ok = false;
        if (!ok) break;
    }
    report(8, "Bloch physicality suite", ok,
           fmt("%d random draws: trace/hermiticity/positivity/sidebands/P<=1/4",
               n_checked),
           tm.seconds());
}

void criterion_9() {
    Timer tm;
    LaserParams lp;
    lp.i_c = 1.7;
    lp.delta_c_hz = -14e6;
    lp.i_r = 95.0;
    lp.delta_r_hz = -28.7e6;
    const ModulationModel m = build_liouvillian(lp);

    const double v_ref = 0.05 * m.omega_rf * m.lambda_r / (2 * consts::pi);
    bool ok = true;
    double r0 = 0;
    for (double v0 = 0.1 * v_ref; v0 <= v_ref * 1.0001; v0 *= std::sqrt(10.0)) {
        const ModulatedSteadyState st = solve_modulated(m, v0);
        const double r = st.mod_rel / v0;
        if (r0 == 0)
            r0 = r;
        else if (std::abs(r - r0) > 0.01 * r0)
            ok = false;
    }
    const ModulatedSteadyState n1 = solve_modulated(m, v_ref, {1});
    const ModulatedSteadyState n2 = solve_modulated(m, v_ref, {2});
    const double truncation = std::abs(n1.mod_rel - n2.mod_rel) / n1.mod_rel;
    if (truncation > 0.01) ok = false;
    report(9, "modulation linearity", ok,
           fmt("mod_rel/v0 flat to 1%% over a decade; n1-vs-n2 diff %.3g",
               truncation),
           tm.seconds());
}

void criterion_10() {
    Timer tm;
    OperatingPoint op = base_op();
    LaserParams lp;
    lp.i_c = 1.5;

    const int n_dc = 20, n_ir = 20;
    std::vector<double> dcs, irs;
    for (int i = 0; i < n_dc; ++i) dcs.push_back((-35e6) + i * (30e6) / (n_dc - 1));
    for (int i = 0; i < n_ir; ++i)
        irs.push_back(10.0 * std::pow(30.0, static_cast<double>(i) / (n_ir - 1)));
    const SensitivityMap map =
        sensitivity_map(lp, op, 2 * consts::pi * 3.33e6, dcs, irs);

    int interior = 0, in_band = 0;
    for (std::size_t idc = 1; idc + 1 < static_cast<std::size_t>(n_dc); ++idc)
        for (std::size_t iir = 1; iir + 1 < static_cast<std::size_t>(n_ir); ++iir) {
            const auto& pt = map.points[idc * n_ir + iir];
            ++interior;
            const double off = pt.delta_r_opt_hz - pt.delta_c_hz;
            if (off >= -20e6 && off <= -10e6) ++in_band;
        }
    const double frac = static_cast<double>(in_band) / interior;

    LaserParams fig9;
    fig9.i_c = 1.7;
    fig9.delta_c_hz = -14e6;
    fig9.i_r = 95.0;
    fig9.delta_r_hz = -28.7e6;
    const Sensitivity s = sensitivity(fig9, op, 2 * consts::pi * 3.33e6);
    const bool sens_ok = s.mod_rel_per_v_m >= 0.005 && s.mod_rel_per_v_m <= 0.015;

    report(10, "Fig. 8 structure", frac >= 0.80 && sens_ok,
           fmt("optimal offset in [-20,-10] MHz for %.0f%% of interior; "
               "sens(Fig 9) = %.2f%%/(V/m)",
               100 * frac, 100 * s.mod_rel_per_v_m),
           tm.seconds());
}

void criterion_11() {
    Timer tm;
    const double s_true = 1.04, gamma_true = 25.5e6;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> deltas, counts;
    for (double d = -60e6; d <= 60e6; d += 1.2e6) {
        deltas.push_back(d);
        counts.push_back(lineshape(s_true, d, gamma_true) * (1 + noise(rng)));
    }
    const LineshapeFit fit = fit_lineshape(deltas, counts, 1.0, 0.0);
    const bool ok = fit.converged && std::abs(fit.s - s_true) <= 0.05 * s_true &&
                    std::abs(fit.gamma_hz - gamma_true) <= 0.05 * gamma_true;
    report(11, "lineshape round trip", ok,
           fmt("fit s = %.3f (true 1.04), Gamma = %.2f MHz (true 25.5)", fit.s,
               fit.gamma_hz / 1e6),
           tm.seconds());
}

void criterion_12() {
    Timer tm;
    const OperatingPoint op = base_op();
    const double se = heating_to_spectral_density(5e4, 467e3, op);
    const bool ok = std::abs(se - 1.6e-10) <= 0.02 * 1.6e-10;
    report(12, "S_E conversion", ok,
           fmt("S_E = %.3e V^2 m^-2 Hz^-1 (expect 1.6e-10, paper ~2e-10)", se),
           tm.seconds());
}

// quadrature oracle shared with the unit tests (reimplemented here verbatim
// so the acceptance binary stands alone)
double quadrature_potential(double x1, double x2, double z1, double z2,
                            double px, double py, double pz) {
    static const double gx[8] = {-0.9602898564975363, -0.7966664774136267,
                                 -0.5255324099163290, -0.1834346424956498,
                                 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
    static const double gw[8] = {0.1012285362903763, 0.2223810344533745,
                                 0.3137066458778873, 0.3626837833783620,
                                 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    const int panels = 24;
    double sum = 0.0;
    for (int pi_ = 0; pi_ < panels; ++pi_)
        for (int pj = 0; pj < panels; ++pj) {
            const double ax = x1 + (x2 - x1) * pi_ / panels;
            const double bx = x1 + (x2 - x1) * (pi_ + 1) / panels;
            const double az = z1 + (z2 - z1) * pj / panels;
            const double bz = z1 + (z2 - z1) * (pj + 1) / panels;
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) {
                    const double sx = 0.5 * (ax + bx) + 0.5 * (bx - ax) * gx[i];
                    const double sz = 0.5 * (az + bz) + 0.5 * (bz - az) * gx[j];
                    const double dx = px - sx, dz = pz - sz;
                    const double r2 = dx * dx + py * py + dz * dz;
                    sum += gw[i] * gw[j] * 0.25 * (bx - ax) * (bz - az) /
                           (r2 * std::sqrt(r2));
                }
        }
    return sum * py / (2 * consts::pi);
}

void criterion_13() {
    Timer tm;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> us(0.2, 2.0), uc(-1.0, 1.0),
        uy(0.4, 3.0);
    bool ok = true;
    double worst_q = 0, worst_fd = 0, worst_tr = 0;
    for (int k = 0; k < 100; ++k) {
        const double cx = uc(rng), cz = uc(rng), wx = us(rng), wz = us(rng);
        kernels::RectSoA r;
        r.push(cx - wx / 2, cx + wx / 2, cz - wz / 2, cz + wz / 2, 1.0);
        const double px = uc(rng), pz = uc(rng), py = uy(rng);

        double phi;
        kernels::active_impl().potential(r, &px, &py, &pz, 1, &phi);
        const double want = quadrature_potential(cx - wx / 2, cx + wx / 2,
                                                 cz - wz / 2, cz + wz / 2, px,
                                                 py, pz);
        const double qerr = std::abs(phi - want) / std::max(std::abs(want), 1e-12);
        worst_q = std::max(worst_q, qerr);
        if (qerr > 1e-6) ok = false;

        // gradient and Hessian vs central differences
        auto grad = [&](double ax, double ay, double az) {
            Vec3 g;
            kernels::active_impl().gradient(r, &ax, &ay, &az, 1, &g.x(), &g.y(),
                                            &g.z());
            return g;
        };
        const double h = 2e-6;
        const Vec3 g = grad(px, py, pz);
        Vec3 gfd;
        {
            double p1, p2;
            double xp = px + h, xm = px - h;
            kernels::active_impl().potential(r, &xp, &py, &pz, 1, &p1);
            kernels::active_impl().potential(r, &xm, &py, &pz, 1, &p2);
            gfd.x() = (p1 - p2) / (2 * h);
            double yp = py + h, ym = py - h;
            kernels::active_impl().potential(r, &px, &yp, &pz, 1, &p1);
            kernels::active_impl().potential(r, &px, &ym, &pz, 1, &p2);
            gfd.y() = (p1 - p2) / (2 * h);
            double zp = pz + h, zm = pz - h;
            kernels::active_impl().potential(r, &px, &py, &zp, 1, &p1);
            kernels::active_impl().potential(r, &px, &py, &zm, 1, &p2);
            gfd.z() = (p1 - p2) / (2 * h);
        }
        const double gs = g.cwiseAbs().maxCoeff();
        worst_fd = std::max(worst_fd, (g - gfd).cwiseAbs().maxCoeff() / gs);

        double hxx, hyy, hzz, hxy, hxz, hyz;
        kernels::HessOut out{&hxx, &hyy, &hzz, &hxy, &hxz, &hyz};
        kernels::active_impl().hessian(r, &px, &py, &pz, 1, out);
        const Vec3 gpx = grad(px + h, py, pz), gmx = grad(px - h, py, pz);
        const Vec3 gpy = grad(px, py + h, pz), gmy = grad(px, py - h, pz);
        const Vec3 gpz = grad(px, py, pz + h), gmz = grad(px, py, pz - h);
        const double hs = std::max({std::abs(hxx), std::abs(hyy), std::abs(hzz),
                                    std::abs(hxy), std::abs(hxz), std::abs(hyz)});
        const double errs[6] = {
            std::abs(hxx - (gpx.x() - gmx.x()) / (2 * h)),
            std::abs(hyy - (gpy.y() - gmy.y()) / (2 * h)),
            std::abs(hzz - (gpz.z() - gmz.z()) / (2 * h)),
            std::abs(hxy - (gpy.x() - gmy.x()) / (2 * h)),
            std::abs(hxz - (gpz.x() - gmz.x()) / (2 * h)),
            std::abs(hyz - (gpz.y() - gmz.y()) / (2 * h))};
        for (double e : errs) worst_fd = std::max(worst_fd, e / hs);
        worst_tr = std::max(worst_tr, std::abs(hxx + hyy + hzz) / std::max(hs, 1.0));
    }
    if (worst_fd > 1e-6 || worst_tr > 1e-9) ok = false;
    report(13, "field-engine oracle", ok,
           fmt("quadrature %.1e, finite-diff %.1e, |trace| %.1e (kernel: %s)",
               worst_q, worst_fd, worst_tr, kernels::active_name().c_str()),
           tm.seconds());
}

} // namespace

int main() {
    std::printf("acceptance suite, kernel implementation: %s\n",
                kernels::active_name().c_str());
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all criteria passed\n");
    return failures == 0 ? 0 : 1;
}
