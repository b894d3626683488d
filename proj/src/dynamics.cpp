#include "iontrap/dynamics.hpp"

#include <cmath>
#include <random>
#include <thread>

#include "iontrap/constants.hpp"

namespace iontrap {

namespace {

// Planar force evaluator at fixed z with precollected rectangle sets.
struct PlanarField {
    kernels::RectSoA rf;
    kernels::RectSoA dc;
    double z0;
    double qm;      // Q/m
    double q;       // C
    double omega;   // rad/s

    PlanarField(const ElectrodeLayout& layout, const OperatingPoint& op, double z)
        : rf(layout.rects_of_role(ElectrodeRole::rf)),
          dc(dc_rects(layout, op)),
          z0(z),
          qm(op.charge / op.mass),
          q(op.charge),
          omega(op.omega_rf) {}

    // acceleration = Q/m * (E_dc + E_rf cos(w t + phase)); E = -V grad(phi)
    void accel(double x, double y, double rf_cos, double v_rf, double& ax,
               double& ay) const {
        double gx = 0, gy = 0, gz = 0;
        kernels::active_impl().gradient(rf, &x, &y, &z0, 1, &gx, &gy, &gz);
        double ex = -v_rf * rf_cos * gx;
        double ey = -v_rf * rf_cos * gy;
        if (dc.size() > 0) {
            kernels::active_impl().gradient(dc, &x, &y, &z0, 1, &gx, &gy, &gz);
            ex -= gx;
            ey -= gy;
        }
        ax = qm * ex;
        ay = qm * ey;
    }
};

struct State {
    double x, y, vx, vy;
};

// classic fixed-step RK4 on 2-D phase space with explicit time dependence
inline void rk4_step(const PlanarField& f, double v_rf, double phase, double t,
                     double dt, State& s) {
    auto rfc = [&](double tt) { return std::cos(f.omega * tt + phase); };
    double ax1, ay1, ax2, ay2, ax3, ay3, ax4, ay4;
    f.accel(s.x, s.y, rfc(t), v_rf, ax1, ay1);
    const double hx2 = s.x + 0.5 * dt * s.vx, hy2 = s.y + 0.5 * dt * s.vy;
    f.accel(hx2, hy2, rfc(t + 0.5 * dt), v_rf, ax2, ay2);
    const double hx3 = s.x + 0.5 * dt * s.vx + 0.25 * dt * dt * ax1;
    const double hy3 = s.y + 0.5 * dt * s.vy + 0.25 * dt * dt * ay1;
    f.accel(hx3, hy3, rfc(t + 0.5 * dt), v_rf, ax3, ay3);
    const double hx4 = s.x + dt * s.vx + 0.5 * dt * dt * ax2;
    const double hy4 = s.y + dt * s.vy + 0.5 * dt * dt * ay2;
    f.accel(hx4, hy4, rfc(t + dt), v_rf, ax4, ay4);

    s.x += dt * s.vx + dt * dt / 6.0 * (ax1 + ax2 + ax3);
    s.y += dt * s.vy + dt * dt / 6.0 * (ay1 + ay2 + ay3);
    s.vx += dt / 6.0 * (ax1 + 2 * ax2 + 2 * ax3 + ax4);
    s.vy += dt / 6.0 * (ay1 + 2 * ay2 + 2 * ay3 + ay4);
}

} // namespace

Trajectory integrate_trajectory(const ElectrodeLayout& layout,
                                const OperatingPoint& op, const Vec3& r0,
                                const Vec3& v0, double t_end,
                                const IntegrationConfig& cfg) {
    if (cfg.steps_per_rf_cycle < 100)
        throw DomainError("integration must resolve the rf period (>= 100 steps/cycle)");
    const Vec3 null = find_rf_null(layout, op);
    PlanarField field(layout, op, r0.z());
    const double dt =
        2 * consts::pi / op.omega_rf / cfg.steps_per_rf_cycle;
    const double esc2 = std::pow(cfg.escape_radius_factor * null.y(), 2);

    State s{r0.x(), r0.y(), v0.x(), v0.y()};
    Trajectory out;
    const auto n_steps = static_cast<std::int64_t>(std::ceil(t_end / dt));
    out.samples.reserve(static_cast<std::size_t>(n_steps / cfg.sample_stride) + 2);
    double t = 0.0;
    for (std::int64_t k = 0; k < n_steps; ++k) {
        if (k % cfg.sample_stride == 0)
            out.samples.push_back({t, s.x, s.y, s.vx, s.vy});
        rk4_step(field, op.v_rf, cfg.rf_phase, t, dt, s);
        t += dt;
        if (!std::isfinite(s.x) || !std::isfinite(s.y))
            throw DomainError("trajectory integration diverged (step instability)");
        const double dx = s.x - null.x(), dy = s.y - null.y();
        if (s.y <= 0.0 || dx * dx + dy * dy > esc2) {
            out.escaped = true;
            out.t_escape = t;
            break;
        }
    }
    out.samples.push_back({t, s.x, s.y, s.vx, s.vy});
    return out;
}

LossCurve loss_probability(const ElectrodeLayout& layout, const OperatingPoint& op,
                           const std::vector<double>& e0_grid_ev, int n_trials,
                           std::uint64_t seed, int n_threads, double t_window,
                           const IntegrationConfig& cfg) {
    if (n_trials < 1) throw DomainError("loss_probability requires n_trials >= 1");
    const Vec3 null = find_rf_null(layout, op);

    // equilibrium with dc included
    Vec3 eq = null;
    {
        const auto dc = dc_rects(layout, op);
        for (int it = 0; it < 30 && dc.size() > 0; ++it) {
            Vec3 g = pseudo_gradient(layout, op, eq) + op.charge * gradient_of(dc, eq);
            Mat3 h = pseudo_hessian(layout, op, eq) + op.charge * hessian_of(dc, eq);
            const Vec3 step = h.ldlt().solve(-g);
            eq += step;
            if (step.norm() < 1e-14) break;
        }
    }

    PlanarField field(layout, op, eq.z());
    const double dt = 2 * consts::pi / op.omega_rf / cfg.steps_per_rf_cycle;
    const auto n_steps = static_cast<std::int64_t>(std::ceil(t_window / dt));
    const double esc2 = std::pow(cfg.escape_radius_factor * null.y(), 2);

    auto run_trial = [&](double e0_ev, std::uint64_t trial_seed) -> bool {
        std::mt19937_64 rng(trial_seed);
        std::uniform_real_distribution<double> uang(0.0, 2 * consts::pi);
        const double angle = uang(rng);
        const double phase = uang(rng);
        const double speed = std::sqrt(2.0 * e0_ev * consts::ev / op.mass);
        State s{eq.x(), eq.y(), speed * std::cos(angle), speed * std::sin(angle)};
        double t = 0.0;
        for (std::int64_t k = 0; k < n_steps; ++k) {
            rk4_step(field, op.v_rf, phase, t, dt, s);
            t += dt;
            const double dx = s.x - null.x(), dy = s.y - null.y();
            if (s.y <= 0.0 || dx * dx + dy * dy > esc2) return true;
        }
        return false;
    };

    LossCurve out;
    out.depth_ref_ev = trap_depth(layout, op).depth_ev;
    out.points.resize(e0_grid_ev.size());

    for (std::size_t ip = 0; ip < e0_grid_ev.size(); ++ip) {
        const double e0 = e0_grid_ev[ip];
        std::vector<int> lost_per_thread(std::max(1, n_threads), 0);
        auto work = [&](int tid, int lo, int hi) {
            int lost = 0;
            for (int k = lo; k < hi; ++k) {
                // per-trial stream: deterministic, order-independent
                std::seed_seq sseq{seed, static_cast<std::uint64_t>(ip),
                                   static_cast<std::uint64_t>(k)};
                std::uint64_t ts[2];
                sseq.generate(ts, ts + 2);
                if (run_trial(e0, ts[0] ^ (ts[1] << 32 >> 0))) ++lost;
            }
            lost_per_thread[tid] = lost;
        };
        if (n_threads <= 1) {
            work(0, 0, n_trials);
        } else {
            std::vector<std::thread> pool;
            const int chunk = (n_trials + n_threads - 1) / n_threads;
            for (int tth = 0; tth < n_threads; ++tth)
                pool.emplace_back(work, tth, tth * chunk,
                                  std::min(n_trials, (tth + 1) * chunk));
            for (auto& th : pool) th.join();
        }
        int lost = 0;
        for (int L : lost_per_thread) lost += L;
        const double p = static_cast<double>(lost) / n_trials;
        out.points[ip] = {e0, p, std::sqrt(std::max(p * (1 - p), 1e-12) / n_trials),
                          lost, n_trials};
    }
    return out;
}

TickleResponse tickle_scan(const ElectrodeLayout& layout, const OperatingPoint& op,
                           const std::vector<double>& f_grid_hz,
                           double drive_volts, double duration,
                           const IntegrationConfig& cfg) {
    const Vec3 null = find_rf_null(layout, op);
    PlanarField field(layout, op, null.z());
    kernels::RectSoA tickle = layout.rects_of("T");
    const double dt = 2 * consts::pi / op.omega_rf / cfg.steps_per_rf_cycle;
    const auto n_steps = static_cast<std::int64_t>(std::ceil(duration / dt));

    // equilibrium including dc
    Vec3 eq = null;
    {
        const auto dc = dc_rects(layout, op);
        for (int it = 0; it < 30 && dc.size() > 0; ++it) {
            Vec3 g = pseudo_gradient(layout, op, eq) + op.charge * gradient_of(dc, eq);
            Mat3 h = pseudo_hessian(layout, op, eq) + op.charge * hessian_of(dc, eq);
            const Vec3 step = h.ldlt().solve(-g);
            eq += step;
            if (step.norm() < 1e-14) break;
        }
    }
    const auto dc = dc_rects(layout, op);

    auto secular_energy = [&](const State& s) {
        const Vec3 p(s.x, s.y, eq.z());
        double u = pseudopotential(layout, op, p);
        if (dc.size() > 0)
            u += op.charge * (potential_of(dc, p) - potential_of(dc, eq));
        return u + 0.5 * op.mass * (s.vx * s.vx + s.vy * s.vy);
    };

    TickleResponse out;
    out.f_hz = f_grid_hz;
    out.energy_gain_ev.resize(f_grid_hz.size());
    for (std::size_t i = 0; i < f_grid_hz.size(); ++i) {
        const double wd = 2 * consts::pi * f_grid_hz[i];
        State s{eq.x(), eq.y(), 0.0, 0.0};
        double t = 0.0;
        const double e_start = secular_energy(s);
        double e_acc = 0.0;
        int e_cnt = 0;
        const std::int64_t avg_from = n_steps - cfg.steps_per_rf_cycle;
        for (std::int64_t k = 0; k < n_steps; ++k) {
            auto drive = [&](double tt, double x, double y, double& ax, double& ay) {
                field.accel(x, y, std::cos(op.omega_rf * tt + cfg.rf_phase),
                            op.v_rf, ax, ay);
                double gx = 0, gy = 0, gz = 0;
                kernels::active_impl().gradient(tickle, &x, &y, &null.z(), 1, &gx,
                                                &gy, &gz);
                const double vd = drive_volts * std::sin(wd * tt);
                ax += field.qm * (-vd * gx);
                ay += field.qm * (-vd * gy);
            };
            // RK4 with the tickle drive folded in
            double ax1, ay1, ax2, ay2, ax3, ay3, ax4, ay4;
            drive(t, s.x, s.y, ax1, ay1);
            drive(t + 0.5 * dt, s.x + 0.5 * dt * s.vx, s.y + 0.5 * dt * s.vy, ax2, ay2);
            drive(t + 0.5 * dt, s.x + 0.5 * dt * s.vx + 0.25 * dt * dt * ax1,
                  s.y + 0.5 * dt * s.vy + 0.25 * dt * dt * ay1, ax3, ay3);
            drive(t + dt, s.x + dt * s.vx + 0.5 * dt * dt * ax2,
                  s.y + dt * s.vy + 0.5 * dt * dt * ay2, ax4, ay4);
            s.x += dt * s.vx + dt * dt / 6.0 * (ax1 + ax2 + ax3);
            s.y += dt * s.vy + dt * dt / 6.0 * (ay1 + ay2 + ay3);
            s.vx += dt / 6.0 * (ax1 + 2 * ax2 + 2 * ax3 + ax4);
            s.vy += dt / 6.0 * (ay1 + 2 * ay2 + 2 * ay3 + ay4);
            t += dt;
            if (k >= avg_from) {
                e_acc += secular_energy(s);
                ++e_cnt;
            }
        }
        out.energy_gain_ev[i] = (e_acc / e_cnt - e_start) / consts::ev;
    }
    return out;
}

std::vector<double> response_peaks(const TickleResponse& r, std::size_t max_peaks) {
    std::vector<std::pair<double, double>> peaks; // energy, freq
    for (std::size_t i = 1; i + 1 < r.f_hz.size(); ++i) {
        if (r.energy_gain_ev[i] > r.energy_gain_ev[i - 1] &&
            r.energy_gain_ev[i] >= r.energy_gain_ev[i + 1]) {
            // quadratic interpolation of the apex
            const double ym = r.energy_gain_ev[i - 1], y0 = r.energy_gain_ev[i],
                         yp = r.energy_gain_ev[i + 1];
            const double denom = ym - 2 * y0 + yp;
            double df = 0.0;
            if (denom != 0.0) df = 0.5 * (ym - yp) / denom;
            const double f = r.f_hz[i] + df * (r.f_hz[1] - r.f_hz[0]);
            peaks.emplace_back(y0, f);
        }
    }
    std::sort(peaks.begin(), peaks.end(), std::greater<>());
    std::vector<double> out;
    for (std::size_t i = 0; i < std::min(max_peaks, peaks.size()); ++i)
        out.push_back(peaks[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

double heating_to_spectral_density(double ndot, double f_mode_hz,
                                   const OperatingPoint& op) {
    const double omega = 2 * consts::pi * f_mode_hz;
    return 4.0 * op.mass * consts::hbar * omega * ndot / (op.charge * op.charge);
}

} // namespace iontrap
