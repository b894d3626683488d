#include "iontrap/kernels.hpp"

#include <cmath>

// Scalar reference kernels. The potential of a rectangle held at unit voltage
// in an otherwise grounded plane is its solid angle over 2 pi, written as four
// corner terms
//
//   phi = 1/(2 pi) * sum_{i,j} s_ij atan( a_i b_j / (y r_ij) ),
//
// with a_i = xi - x, b_j = zj - z, r_ij = sqrt(a_i^2 + y^2 + b_j^2) and sign
// s_ij = +1 for (x2,z2),(x1,z1) and -1 otherwise. The denominator y*r is
// strictly positive for y>0, so each term is smooth everywhere above the
// plane; no branch cuts cross the electrode's vertical boundary planes.
// Derivatives are closed-form (verified against symbolic differentiation):
//
//   d/dx  atan = -y b / (r u)             u = a^2 + y^2
//   d/dz  atan = -y a / (r w)             w = b^2 + y^2
//   d/dy  atan = -a b (r^2 + y^2)/(r u w)
//
//   d2/dx2   = -y a b (u + 2 r^2)/(r^3 u^2)
//   d2/dz2   = -y a b (w + 2 r^2)/(r^3 w^2)
//   d2/dxdz  =  y / r^3
//   d2/dxdy  = -b (u (a^2+b^2) - 2 y^2 r^2)/(r^3 u^2)
//   d2/dzdy  = -a (w (a^2+b^2) - 2 y^2 r^2)/(r^3 w^2)
//   d2/dy2   =  a b y (u^2 (w + 2 r^2) + w^2 (u + 2 r^2))/(r^3 u^2 w^2)

namespace iontrap::kernels {

namespace {

constexpr double inv_two_pi = 0.15915494309189533577;

void potential_scalar(const RectSoA& rects, const double* px, const double* py,
                      const double* pz, std::size_t n, double* phi) {
    const std::size_t nr = rects.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = px[i], y = py[i], z = pz[i];
        double acc = 0.0;
        for (std::size_t r = 0; r < nr; ++r) {
            const double a1 = rects.x1[r] - x, a2 = rects.x2[r] - x;
            const double b1 = rects.z1[r] - z, b2 = rects.z2[r] - z;
            const double y2 = y * y;
            const double r11 = std::sqrt(a1 * a1 + y2 + b1 * b1);
            const double r12 = std::sqrt(a1 * a1 + y2 + b2 * b2);
            const double r21 = std::sqrt(a2 * a2 + y2 + b1 * b1);
            const double r22 = std::sqrt(a2 * a2 + y2 + b2 * b2);
            const double s = std::atan(a2 * b2 / (y * r22)) -
                             std::atan(a1 * b2 / (y * r12)) -
                             std::atan(a2 * b1 / (y * r21)) +
                             std::atan(a1 * b1 / (y * r11));
            acc += rects.w[r] * s;
        }
        phi[i] = acc * inv_two_pi;
    }
}

inline void corner_grad(double a, double b, double y, double& gx, double& gy,
                        double& gz) {
    const double y2 = y * y;
    const double r2 = a * a + y2 + b * b;
    const double r = std::sqrt(r2);
    const double u = a * a + y2;
    const double w = b * b + y2;
    gx = -y * b / (r * u);
    gy = -a * b * (r2 + y2) / (r * u * w);
    gz = -y * a / (r * w);
}

void field_scalar(const RectSoA& rects, const double* px, const double* py,
                  const double* pz, std::size_t n, double* gxo, double* gyo,
                  double* gzo) {
    const std::size_t nr = rects.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = px[i], y = py[i], z = pz[i];
        double sx = 0.0, sy = 0.0, sz = 0.0;
        for (std::size_t r = 0; r < nr; ++r) {
            const double a1 = rects.x1[r] - x, a2 = rects.x2[r] - x;
            const double b1 = rects.z1[r] - z, b2 = rects.z2[r] - z;
            double gx, gy, gz, tx = 0.0, ty = 0.0, tz = 0.0;
            corner_grad(a2, b2, y, gx, gy, gz);
            tx += gx; ty += gy; tz += gz;
            corner_grad(a1, b2, y, gx, gy, gz);
            tx -= gx; ty -= gy; tz -= gz;
            corner_grad(a2, b1, y, gx, gy, gz);
            tx -= gx; ty -= gy; tz -= gz;
            corner_grad(a1, b1, y, gx, gy, gz);
            tx += gx; ty += gy; tz += gz;
            sx += rects.w[r] * tx;
            sy += rects.w[r] * ty;
            sz += rects.w[r] * tz;
        }
        gxo[i] = sx * inv_two_pi;
        gyo[i] = sy * inv_two_pi;
        gzo[i] = sz * inv_two_pi;
    }
}

struct Hess6 {
    double xx, yy, zz, xy, xz, yz;
};

inline Hess6 corner_hess(double a, double b, double y) {
    const double y2 = y * y;
    const double r2 = a * a + y2 + b * b;
    const double r = std::sqrt(r2);
    const double r3 = r * r2;
    const double u = a * a + y2;
    const double w = b * b + y2;
    const double ab = a * b;
    const double a2b2 = a * a + b * b;
    Hess6 h;
    h.xx = -y * ab * (u + 2.0 * r2) / (r3 * u * u);
    h.zz = -y * ab * (w + 2.0 * r2) / (r3 * w * w);
    h.xz = y / r3;
    h.xy = -b * (u * a2b2 - 2.0 * y2 * r2) / (r3 * u * u);
    h.yz = -a * (w * a2b2 - 2.0 * y2 * r2) / (r3 * w * w);
    h.yy = ab * y * (u * u * (w + 2.0 * r2) + w * w * (u + 2.0 * r2)) /
           (r3 * u * u * w * w);
    return h;
}

void hessian_scalar(const RectSoA& rects, const double* px, const double* py,
                    const double* pz, std::size_t n, const HessOut& out) {
    const std::size_t nr = rects.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = px[i], y = py[i], z = pz[i];
        Hess6 acc{0, 0, 0, 0, 0, 0};
        for (std::size_t r = 0; r < nr; ++r) {
            const double a1 = rects.x1[r] - x, a2 = rects.x2[r] - x;
            const double b1 = rects.z1[r] - z, b2 = rects.z2[r] - z;
            const Hess6 h22 = corner_hess(a2, b2, y);
            const Hess6 h12 = corner_hess(a1, b2, y);
            const Hess6 h21 = corner_hess(a2, b1, y);
            const Hess6 h11 = corner_hess(a1, b1, y);
            const double wv = rects.w[r];
            acc.xx += wv * (h22.xx - h12.xx - h21.xx + h11.xx);
            acc.yy += wv * (h22.yy - h12.yy - h21.yy + h11.yy);
            acc.zz += wv * (h22.zz - h12.zz - h21.zz + h11.zz);
            acc.xy += wv * (h22.xy - h12.xy - h21.xy + h11.xy);
            acc.xz += wv * (h22.xz - h12.xz - h21.xz + h11.xz);
            acc.yz += wv * (h22.yz - h12.yz - h21.yz + h11.yz);
        }
        out.xx[i] = acc.xx * inv_two_pi;
        out.yy[i] = acc.yy * inv_two_pi;
        out.zz[i] = acc.zz * inv_two_pi;
        out.xy[i] = acc.xy * inv_two_pi;
        out.xz[i] = acc.xz * inv_two_pi;
        out.yz[i] = acc.yz * inv_two_pi;
    }
}

} // namespace

const Impl& scalar_impl() {
    static const Impl impl{potential_scalar, field_scalar, hessian_scalar,
                           "scalar"};
    return impl;
}

} // namespace iontrap::kernels
