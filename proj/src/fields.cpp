#include "iontrap/fields.hpp"

#include <cmath>
#include <queue>
#include <vector>

#include "iontrap/constants.hpp"

namespace iontrap {

OperatingPoint OperatingPoint::ca40_default() {
    OperatingPoint op;
    op.mass = ca40::mass;
    op.charge = ca40::charge;
    return op;
}

namespace {

void require_above_plane(const Vec3& p) {
    if (!(p.y() > 0.0))
        throw DomainError("field evaluation requires y > 0 above the chip plane");
}

kernels::RectSoA electrode_rects(const Electrode& e) {
    kernels::RectSoA out;
    for (const auto& r : e.rects) out.push(r.x1, r.x2, r.z1, r.z2, 1.0);
    return out;
}

} // namespace

double potential_of(const kernels::RectSoA& rects, const Vec3& p) {
    require_above_plane(p);
    double phi = 0.0;
    kernels::active_impl().potential(rects, &p.x(), &p.y(), &p.z(), 1, &phi);
    return phi;
}

Vec3 gradient_of(const kernels::RectSoA& rects, const Vec3& p) {
    require_above_plane(p);
    Vec3 g;
    kernels::active_impl().gradient(rects, &p.x(), &p.y(), &p.z(), 1, &g.x(),
                                    &g.y(), &g.z());
    return g;
}

Mat3 hessian_of(const kernels::RectSoA& rects, const Vec3& p) {
    require_above_plane(p);
    double xx, yy, zz, xy, xz, yz;
    kernels::HessOut out{&xx, &yy, &zz, &xy, &xz, &yz};
    kernels::active_impl().hessian(rects, &p.x(), &p.y(), &p.z(), 1, out);
    Mat3 h;
    h << xx, xy, xz, xy, yy, yz, xz, yz, zz;
    return h;
}

double unit_potential(const Electrode& e, const Vec3& p) {
    return potential_of(electrode_rects(e), p);
}

Vec3 unit_gradient(const Electrode& e, const Vec3& p) {
    return gradient_of(electrode_rects(e), p);
}

Mat3 unit_hessian(const Electrode& e, const Vec3& p) {
    return hessian_of(electrode_rects(e), p);
}

kernels::RectSoA dc_rects(const ElectrodeLayout& layout, const OperatingPoint& op) {
    kernels::RectSoA out;
    for (const auto& [name, v] : op.dc_voltages) {
        if (v == 0.0) continue;
        for (const auto& r : layout.electrode(name).rects)
            out.push(r.x1, r.x2, r.z1, r.z2, v);
    }
    return out;
}

double pseudopotential(const ElectrodeLayout& layout, const OperatingPoint& op,
                       const Vec3& p) {
    const Vec3 g = gradient_of(layout.rects_of_role(ElectrodeRole::rf), p);
    const double e2 = op.v_rf * op.v_rf * g.squaredNorm();
    return op.charge * op.charge * e2 / (4.0 * op.mass * op.omega_rf * op.omega_rf);
}

Vec3 pseudo_gradient(const ElectrodeLayout& layout, const OperatingPoint& op,
                     const Vec3& p) {
    const auto rf = layout.rects_of_role(ElectrodeRole::rf);
    const Vec3 g = gradient_of(rf, p);
    const Mat3 h = hessian_of(rf, p);
    const double k = op.charge * op.charge * op.v_rf * op.v_rf /
                     (2.0 * op.mass * op.omega_rf * op.omega_rf);
    return k * (h * g);
}

Mat3 pseudo_hessian(const ElectrodeLayout& layout, const OperatingPoint& op,
                    const Vec3& p) {
    const auto rf = layout.rects_of_role(ElectrodeRole::rf);
    const Mat3 h = hessian_of(rf, p);
    const double k = op.charge * op.charge * op.v_rf * op.v_rf /
                     (2.0 * op.mass * op.omega_rf * op.omega_rf);
    return k * (h * h);
}

Vec3 find_rf_null(const ElectrodeLayout& layout, const OperatingPoint& op) {
    const auto rf = layout.rects_of_role(ElectrodeRole::rf);

    // bracket Ey = 0 on the symmetry axis
    auto gy = [&](double y) { return gradient_of(rf, Vec3(0, y, 0)).y(); };
    double lo = 0, hi = 0, flo = 0;
    double prev_y = 1e-6, prev_f = gy(prev_y);
    for (int i = 1; i <= 400; ++i) {
        const double y = 1e-6 + i * (2000e-6 - 1e-6) / 400.0;
        const double f = gy(y);
        if (prev_f * f <= 0.0) {
            lo = prev_y;
            hi = y;
            flo = prev_f;
            break;
        }
        prev_y = y;
        prev_f = f;
    }
    if (hi == 0.0) throw DomainError("no pseudopotential minimum found in search box");
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = gy(mid);
        if (flo * fm <= 0.0)
            hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
    }
    Vec3 p(0.0, 0.5 * (lo + hi), 0.0);

    // Gauss-Newton polish on grad(|grad phi|^2) = 2 H g; Jacobian ~ 2 H^2
    // near the null.
    const double scale = gradient_of(rf, p + Vec3(0, 0.1 * p.y(), 0)).norm();
    for (int it = 0; it < 60; ++it) {
        const Vec3 g = gradient_of(rf, p);
        if (g.norm() < 1e-6 * scale) break;
        const Mat3 h = hessian_of(rf, p);
        Vec3 step = (h * h).ldlt().solve(-(h * g));
        const double max_step = 0.2 * p.y();
        if (step.norm() > max_step) step *= max_step / step.norm();
        Vec3 cand = p + step;
        if (cand.y() <= 0) cand.y() = 0.5 * p.y();
        p = cand;
    }
    if (gradient_of(rf, p).norm() > 1e-6 * scale)
        throw DomainError("rf-null refinement did not converge");
    return p;
}

TrapDepthResult trap_depth(const ElectrodeLayout& layout, const OperatingPoint& op) {
    const Vec3 null = find_rf_null(layout, op);
    const double h = null.y();
    auto ps = [&](double x, double y) {
        return pseudopotential(layout, op, Vec3(x, y, null.z()));
    };

    // spill-level search on an x-y grid: lowest level at which the sublevel
    // set connects the null to the box boundary
    const int nx = 241, ny = 241;
    const double x0 = -5 * h, x1 = 5 * h;
    const double y0 = 0.02 * h, y1 = 8 * h;
    std::vector<double> grid(nx * ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            grid[iy * nx + ix] = ps(x0 + ix * (x1 - x0) / (nx - 1),
                                    y0 + iy * (y1 - y0) / (ny - 1));
    const int inull_x = static_cast<int>(std::lround((null.x() - x0) / (x1 - x0) * (nx - 1)));
    const int inull_y = static_cast<int>(std::lround((null.y() - y0) / (y1 - y0) * (ny - 1)));

    auto escapes = [&](double level) {
        std::vector<char> seen(nx * ny, 0);
        std::queue<int> q;
        const int start = inull_y * nx + inull_x;
        if (grid[start] >= level) return false;
        q.push(start);
        seen[start] = 1;
        while (!q.empty()) {
            const int c = q.front();
            q.pop();
            const int cx = c % nx, cy = c / nx;
            if (cx == 0 || cx == nx - 1 || cy == 0 || cy == ny - 1) return true;
            const int nbr[4] = {c - 1, c + 1, c - nx, c + nx};
            for (int nb : nbr)
                if (!seen[nb] && grid[nb] < level) {
                    seen[nb] = 1;
                    q.push(nb);
                }
        }
        return false;
    };

    double lo = grid[inull_y * nx + inull_x];
    double hi = *std::max_element(grid.begin(), grid.end());
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (escapes(mid))
            hi = mid;
        else
            lo = mid;
    }
    const double spill = 0.5 * (lo + hi);

    // the saddle on the symmetric escape path sits on the x = null.x axis;
    // refine the 1-D maximum along y there
    double ya = null.y(), yb = 8 * h;
    // golden-section on -ps along y to locate the barrier max
    const double gr = 0.6180339887498949;
    double a = ya, b = yb;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = ps(null.x(), c1), f2 = ps(null.x(), c2);
    for (int i = 0; i < 200; ++i) {
        if (f1 < f2) {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = ps(null.x(), c2);
        } else {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = ps(null.x(), c1);
        }
    }
    const double y_saddle = 0.5 * (a + b);
    const double axis_barrier = ps(null.x(), y_saddle) - ps(null.x(), null.y());

    // spill level from the grid guards against lower escape channels off-axis
    const double depth = std::min(axis_barrier, spill - grid[inull_y * nx + inull_x]);

    TrapDepthResult out;
    out.depth_j = depth;
    out.depth_ev = depth / consts::ev;
    out.saddle = Vec3(null.x(), y_saddle, null.z());
    return out;
}

SixWireParams tune_six_wire(SixWireParams start, double target_height,
                            double target_control_dist) {
    auto residual = [&](double wc, double wr) -> Eigen::Vector2d {
        SixWireParams p = start;
        p.center_width = wc;
        p.rail_width = wr;
        const auto layout = reconstruct_six_wire(p);
        OperatingPoint op = OperatingPoint::ca40_default();
        const Vec3 null = find_rf_null(layout, op);
        const double xc0 = p.gap_center / 2 + p.center_width + 2 * p.gap + p.rail_width;
        return {null.y() - target_height,
                std::hypot(xc0, null.y()) - target_control_dist};
    };

    double wc = start.center_width, wr = start.rail_width;
    Eigen::Vector2d f = residual(wc, wr);
    for (int it = 0; it < 40 && f.norm() > 1e-10; ++it) {
        const double dwc = std::max(1e-9, 1e-4 * wc);
        const double dwr = std::max(1e-9, 1e-4 * wr);
        Eigen::Matrix2d jac;
        jac.col(0) = (residual(wc + dwc, wr) - f) / dwc;
        jac.col(1) = (residual(wc, wr + dwr) - f) / dwr;
        const Eigen::Vector2d step = jac.fullPivLu().solve(-f);
        wc += step(0);
        wr += step(1);
        if (wc < 5e-6) wc = 5e-6;
        if (wr < 5e-6) wr = 5e-6;
        f = residual(wc, wr);
    }
    SixWireParams tuned = start;
    tuned.center_width = wc;
    tuned.rail_width = wr;
    return tuned;
}

} // namespace iontrap
