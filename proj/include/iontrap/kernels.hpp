#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Batch evaluation kernels for the potential of rectangular electrodes in a
// grounded plane (plane y=0, field points at y>0). Each rectangle
// [x1,x2]x[z1,z2] carries a voltage weight w; kernels accumulate the weighted
// sum over all rectangles at each field point.
//
// phi(p)   = sum_r w_r * solid_angle(rect_r, p) / (2 pi)      (dimensionless)
// grad(p)  = d phi / d(x,y,z)                                  (1/m)
// hess(p)  = second derivatives, symmetric traceless           (1/m^2)
//
// A scalar reference implementation always exists; an AVX2+FMA variant is
// selected at runtime when the CPU supports it. Both produce results equal
// to ~1e-13 relative (equivalence-tested).

namespace iontrap::kernels {

struct RectSoA {
    std::vector<double> x1, x2, z1, z2, w;

    void push(double rx1, double rx2, double rz1, double rz2, double weight) {
        x1.push_back(rx1);
        x2.push_back(rx2);
        z1.push_back(rz1);
        z2.push_back(rz2);
        w.push_back(weight);
    }
    std::size_t size() const { return x1.size(); }
    void clear() {
        x1.clear(); x2.clear(); z1.clear(); z2.clear(); w.clear();
    }
};

// Symmetric 3x3 packed as xx, yy, zz, xy, xz, yz.
struct HessOut {
    double* xx;
    double* yy;
    double* zz;
    double* xy;
    double* xz;
    double* yz;
};

using PotentialFn = void (*)(const RectSoA&, const double* px, const double* py,
                             const double* pz, std::size_t n, double* phi);
using FieldFn = void (*)(const RectSoA&, const double* px, const double* py,
                         const double* pz, std::size_t n, double* gx, double* gy,
                         double* gz);
using HessianFn = void (*)(const RectSoA&, const double* px, const double* py,
                           const double* pz, std::size_t n, const HessOut& out);

struct Impl {
    PotentialFn potential;
    FieldFn gradient;
    HessianFn hessian;
    const char* name;
};

const Impl& scalar_impl();
#if defined(__x86_64__) || defined(_M_X64)
const Impl& avx2_impl();      // valid only if avx2_supported()
bool avx2_supported();
#endif

// Active implementation. Defaults to the best supported variant; the
// IONTRAP_SIMD environment variable ("scalar", "avx2", "auto") or
// set_active() override it.
const Impl& active_impl();
bool set_active(std::string_view name); // returns false if unavailable
std::string active_name();

} // namespace iontrap::kernels
