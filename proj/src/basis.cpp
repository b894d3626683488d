#include "iontrap/basis.hpp"

#include <cmath>

#include "iontrap/constants.hpp"

namespace iontrap {

namespace {

Mat3 rot45() {
    const double s = 1.0 / std::sqrt(2.0);
    Mat3 r;
    // columns are x', y', z' in cardinal coordinates
    r << s, s, 0, s, -s, 0, 0, 0, 1;
    return r;
}

} // namespace

Mat3 PotentialBasis::quad_matrix() const {
    Mat3 a;
    a << alpha.x(), cross.x() / 2, cross.y() / 2,
         cross.x() / 2, alpha.y(), cross.z() / 2,
         cross.y() / 2, cross.z() / 2, alpha.z();
    return a;
}

PotentialBasis PotentialBasis::in_frame(Frame f) const {
    if (f == frame) return *this;
    const Mat3 r = rot45(); // involution: the same matrix maps both ways
    const Mat3 a = r.transpose() * quad_matrix() * r;
    PotentialBasis out;
    out.frame = f;
    out.alpha = a.diagonal();
    out.cross = Vec3(2 * a(0, 1), 2 * a(0, 2), 2 * a(1, 2));
    out.beta = r.transpose() * beta;
    return out;
}

double PotentialBasis::laplace_residual_rel() const {
    const double s = alpha.cwiseAbs().maxCoeff();
    if (s == 0.0) return 0.0;
    return std::abs(alpha.sum()) / s;
}

std::map<std::string, double> VoltageSet::as_map() const {
    std::map<std::string, double> m;
    for (int i = 0; i < 6; ++i) m["V" + std::to_string(i + 1)] = v[i];
    return m;
}

PotentialBasis fit_quadratic(const kernels::RectSoA& rects, const Vec3& center,
                             double radius) {
    if (radius <= 0) throw DomainError("fit radius must be positive");
    constexpr int ngrid = 9;

    // monomial exponents up to total degree 4
    std::vector<std::array<int, 3>> mono;
    for (int d = 0; d <= 4; ++d)
        for (int i = 0; i <= d; ++i)
            for (int j = 0; j + i <= d; ++j) mono.push_back({i, j, d - i - j});
    const int ncoef = static_cast<int>(mono.size());

    const int npts = ngrid * ngrid * ngrid;
    std::vector<double> xs(npts), ys(npts), zs(npts), phis(npts);
    int idx = 0;
    for (int ix = 0; ix < ngrid; ++ix)
        for (int iy = 0; iy < ngrid; ++iy)
            for (int iz = 0; iz < ngrid; ++iz, ++idx) {
                xs[idx] = center.x() + radius * (2.0 * ix / (ngrid - 1) - 1.0);
                ys[idx] = center.y() + radius * (2.0 * iy / (ngrid - 1) - 1.0);
                zs[idx] = center.z() + radius * (2.0 * iz / (ngrid - 1) - 1.0);
            }
    kernels::active_impl().potential(rects, xs.data(), ys.data(), zs.data(),
                                     npts, phis.data());

    // scaled coordinates for conditioning
    Eigen::MatrixXd design(npts, ncoef);
    for (int p = 0; p < npts; ++p) {
        const double u = (xs[p] - center.x()) / radius;
        const double v = (ys[p] - center.y()) / radius;
        const double w = (zs[p] - center.z()) / radius;
        for (int c = 0; c < ncoef; ++c)
            design(p, c) = std::pow(u, mono[c][0]) * std::pow(v, mono[c][1]) *
                           std::pow(w, mono[c][2]);
    }
    Eigen::Map<Eigen::VectorXd> rhs(phis.data(), npts);
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
    if (!coef.allFinite()) throw DomainError("quadratic fit is ill-conditioned");

    auto get = [&](int i, int j, int k) {
        for (int c = 0; c < ncoef; ++c)
            if (mono[c][0] == i && mono[c][1] == j && mono[c][2] == k)
                return coef(c) / std::pow(radius, i + j + k);
        return 0.0;
    };

    PotentialBasis out;
    out.beta = Vec3(get(1, 0, 0), get(0, 1, 0), get(0, 0, 1));
    out.alpha = Vec3(get(2, 0, 0), get(0, 2, 0), get(0, 0, 2));
    out.cross = Vec3(get(1, 1, 0), get(1, 0, 1), get(0, 1, 1));
    return out;
}

PotentialBasis fit_quadratic(const Electrode& e, const Vec3& center, double radius) {
    kernels::RectSoA rects;
    for (const auto& r : e.rects) rects.push(r.x1, r.x2, r.z1, r.z2, 1.0);
    return fit_quadratic(rects, center, radius);
}

std::array<PotentialBasis, 6> fit_control_bases(const ElectrodeLayout& layout,
                                                const Vec3& center, double radius) {
    std::array<PotentialBasis, 6> out;
    for (int i = 0; i < 6; ++i)
        out[i] = fit_quadratic(layout.electrode("V" + std::to_string(i + 1)),
                               center, radius);
    return out;
}

VoltageSolve solve_voltages(const PotentialBasis& target,
                            const std::array<PotentialBasis, 6>& bases,
                            VoltageSetLabel label) {
    const Frame frame = target.frame;
    using Vec6 = Eigen::Matrix<double, 6, 1>;
    auto as6 = [&](const PotentialBasis& b) -> Vec6 {
        const PotentialBasis bf = b.in_frame(frame);
        Vec6 col;
        col << bf.beta, bf.alpha;
        return col;
    };

    // collapse voltages by symmetry class: columns of the reduced system and
    // the map back to V1..V6
    std::vector<Vec6> cols;
    std::vector<std::array<double, 6>> expand;
    switch (label) {
        case VoltageSetLabel::endcap:
        case VoltageSetLabel::ycomp:
            cols = {as6(bases[0]) + as6(bases[1]), as6(bases[2]) + as6(bases[3]),
                    as6(bases[4]) + as6(bases[5])};
            expand = {{1, 1, 0, 0, 0, 0}, {0, 0, 1, 1, 0, 0}, {0, 0, 0, 0, 1, 1}};
            break;
        case VoltageSetLabel::xcomp:
            cols = {as6(bases[2]) - as6(bases[3]) + as6(bases[4]) - as6(bases[5])};
            expand = {{0, 0, 1, -1, 1, -1}};
            break;
        case VoltageSetLabel::tilt:
            cols = {as6(bases[0]), as6(bases[1]), as6(bases[2]) + as6(bases[4]),
                    as6(bases[3]) + as6(bases[5])};
            expand = {{1, 0, 0, 0, 0, 0},
                      {0, 1, 0, 0, 0, 0},
                      {0, 0, 1, 0, 1, 0},
                      {0, 0, 0, 1, 0, 1}};
            break;
        case VoltageSetLabel::custom:
            for (int i = 0; i < 6; ++i) {
                cols.push_back(as6(bases[i]));
                std::array<double, 6> e{};
                e[i] = 1;
                expand.push_back(e);
            }
            break;
    }

    const int nvar = static_cast<int>(cols.size());
    Eigen::MatrixXd a(6, nvar);
    for (int c = 0; c < nvar; ++c) a.col(c) = cols[c];
    Vec6 t;
    t << target.beta, target.alpha;

    // balance rows so V/m and V/m^2 constraints carry equal weight. The
    // scales come from the unreduced electrode couplings, so rows that a
    // symmetry class zeroes out (numerical noise only) are never amplified.
    double beta_all = 0.0, alpha_all = 0.0;
    for (int i = 0; i < 6; ++i) {
        const Vec6 c = as6(bases[i]);
        beta_all = std::max(beta_all, c.head<3>().cwiseAbs().maxCoeff());
        alpha_all = std::max(alpha_all, c.tail<3>().cwiseAbs().maxCoeff());
    }
    Vec6 rs;
    for (int r = 0; r < 3; ++r) rs(r) = beta_all > 0 ? 1.0 / beta_all : 0.0;
    for (int r = 3; r < 6; ++r) rs(r) = alpha_all > 0 ? 1.0 / alpha_all : 0.0;
    const Eigen::MatrixXd aw = rs.asDiagonal() * a;
    const Vec6 tw = rs.asDiagonal() * t;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd u = svd.solve(tw);

    VoltageSolve out;
    out.set.label = label;
    out.set.v = {0, 0, 0, 0, 0, 0};
    for (int c = 0; c < nvar; ++c)
        for (int i = 0; i < 6; ++i) out.set.v[i] += expand[c][i] * u(c);
    out.achieved = a * u;
    out.target = t;
    out.beta_residual = (out.achieved.head<3>() - t.head<3>()).norm();
    // alpha residual relative to the larger of the requested curvature and
    // the curvature scale these voltages could produce
    const double ascale = std::max(t.tail<3>().cwiseAbs().maxCoeff(),
                                   alpha_all * u.cwiseAbs().maxCoeff());
    out.alpha_residual_rel =
        (ascale > 0) ? (out.achieved.tail<3>() - t.tail<3>()).norm() / ascale : 0.0;
    return out;
}

namespace {

ModeAnalysis modes_from_hessian(const Mat3& energy_hessian, double mass) {
    Eigen::SelfAdjointEigenSolver<Mat3> eig(energy_hessian);
    const Vec3 lam = eig.eigenvalues();
    const Mat3 vecs = eig.eigenvectors();

    ModeAnalysis out{};
    out.stable = lam.minCoeff() > 0.0;

    // axial mode = eigenvector with the largest |z| component
    int axial = 0;
    for (int k = 1; k < 3; ++k)
        if (std::abs(vecs(2, k)) > std::abs(vecs(2, axial))) axial = k;
    std::array<int, 2> radial{};
    int w = 0;
    for (int k = 0; k < 3; ++k)
        if (k != axial) radial[w++] = k;
    if (std::sqrt(std::abs(lam(radial[0]))) > std::sqrt(std::abs(lam(radial[1]))))
        std::swap(radial[0], radial[1]);

    auto freq = [&](int k) {
        return std::sqrt(std::abs(lam(k)) / mass) / (2 * consts::pi);
    };
    out.f_axial = freq(axial);
    out.f_radial = {freq(radial[0]), freq(radial[1])};
    out.mode_axes = {vecs.col(axial), vecs.col(radial[0]), vecs.col(radial[1])};

    // tilt angle of the initially-vertical radial mode: smallest angle any
    // radial axis makes with y-hat, measured in the x-y plane
    double tilt = 90.0;
    for (int k : radial) {
        const double vx = std::abs(vecs(0, k));
        const double vy = std::abs(vecs(1, k));
        tilt = std::min(tilt, std::atan2(vx, vy) * 180.0 / consts::pi);
    }
    out.tilt_angle_deg = tilt;
    return out;
}

} // namespace

ModeAnalysis analyze_quadratic(const Mat3& energy_hessian, double mass) {
    return modes_from_hessian(energy_hessian, mass);
}

ModeAnalysis analyze_modes(const ElectrodeLayout& layout, const OperatingPoint& op) {
    const Vec3 null = find_rf_null(layout, op);
    const auto dc = dc_rects(layout, op);
    const bool has_dc = dc.size() > 0;

    // equilibrium with dc shifts included
    Vec3 p = null;
    for (int it = 0; it < 50; ++it) {
        Vec3 g = pseudo_gradient(layout, op, p);
        Mat3 h = pseudo_hessian(layout, op, p);
        if (has_dc) {
            g += op.charge * gradient_of(dc, p);
            h += op.charge * hessian_of(dc, p);
        }
        const Vec3 step = h.ldlt().solve(-g);
        p += step;
        if (step.norm() < 1e-13) break;
    }

    Mat3 h_total = pseudo_hessian(layout, op, p);
    if (has_dc) h_total += op.charge * hessian_of(dc, p);

    ModeAnalysis out = modes_from_hessian(h_total, op.mass);
    out.equilibrium = p;

    // q from the rf-only radial curvature at the null
    const Mat3 h_rf = pseudo_hessian(layout, op, null);
    const ModeAnalysis rf_only = modes_from_hessian(h_rf, op.mass);
    const double f_r0 = 0.5 * (rf_only.f_radial[0] + rf_only.f_radial[1]);
    out.q = 2.0 * std::sqrt(2.0) * (2 * consts::pi * f_r0) / op.omega_rf;
    return out;
}

MicromotionResult micromotion(const OperatingPoint& op, double e_dc, double omega_r) {
    if (!(omega_r > 0)) throw DomainError("micromotion requires omega_r > 0");
    MicromotionResult out;
    out.x_d = op.charge * e_dc / (op.mass * omega_r * omega_r);
    out.x_mu = std::sqrt(2.0) * (omega_r / op.omega_rf) * out.x_d;
    out.v0 = out.x_mu * op.omega_rf;
    return out;
}

double infer_rf_amplitude(double measured_f_radial, const ElectrodeLayout& layout,
                          const OperatingPoint& op) {
    auto mean_radial = [&](double v) {
        OperatingPoint o = op;
        o.v_rf = v;
        const ModeAnalysis m = analyze_modes(layout, o);
        return 0.5 * (m.f_radial[0] + m.f_radial[1]);
    };
    // secular frequency is nearly linear in V_rf; secant converges fast
    double v0 = op.v_rf, f0 = mean_radial(v0);
    double v1 = v0 * measured_f_radial / f0;
    for (int it = 0; it < 30; ++it) {
        const double f1 = mean_radial(v1);
        if (std::abs(f1 - measured_f_radial) < 1e-7 * measured_f_radial) return v1;
        const double dv = (v1 - v0) / (f1 - f0) * (measured_f_radial - f1);
        v0 = v1;
        f0 = f1;
        v1 += dv;
    }
    return v1;
}

} // namespace iontrap
