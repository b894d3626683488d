#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iontrap/kernels.hpp"

namespace iontrap {

enum class ElectrodeRole { rf, dc_control, ground };

// Axis-aligned rectangle in the chip plane y=0, coordinates in meters.
struct Rect {
    double x1, z1, x2, z2;

    bool valid() const { return x1 < x2 && z1 < z2; }
    bool overlaps(const Rect& o) const {
        return x1 < o.x2 && o.x1 < x2 && z1 < o.z2 && o.z1 < z2;
    }
};

struct Electrode {
    std::string name;
    ElectrodeRole role = ElectrodeRole::ground;
    std::vector<Rect> rects;
};

struct LayoutError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A planar electrode layout, mirror-symmetric about x=0 under the declared
// pairing. Immutable once validated; safe to share across threads.
class ElectrodeLayout {
public:
    ElectrodeLayout(std::vector<Electrode> electrodes,
                    std::vector<std::array<std::string, 2>> pairs,
                    std::vector<std::string> controlled_names);

    const std::vector<Electrode>& electrodes() const { return electrodes_; }
    const Electrode& electrode(const std::string& name) const;
    bool has_electrode(const std::string& name) const;
    const std::vector<std::array<std::string, 2>>& pairs() const { return pairs_; }

    // Ordered V1..V6 plus the tickle electrode T.
    const std::vector<std::string>& controlled_names() const {
        return controlled_names_;
    }

    // All rectangles of the given role as a weighted SoA (weight 1 per rect).
    kernels::RectSoA rects_of_role(ElectrodeRole role) const;
    kernels::RectSoA rects_of(const std::string& name) const;

    // Rescale every length by k (layouts are Laplace scale-covariant).
    ElectrodeLayout scaled(double k) const;

private:
    void validate() const;

    std::vector<Electrode> electrodes_;
    std::vector<std::array<std::string, 2>> pairs_;
    std::vector<std::string> controlled_names_;
};

// Layout file IO. Schema: JSON object with "electrodes": [{name, role,
// rects: [[x1,z1,x2,z2], ...]}, ...] in decimal micrometers, "pairs":
// [[nameA, nameB], ...], and "controlled": [names...].
ElectrodeLayout load_layout(const std::string& path);
void save_layout(const ElectrodeLayout& layout, const std::string& path);

// Parametric reconstruction of the six-wire trap: two center dc strips split
// by gap_center, flanked by rf rails, flanked by n_control_pairs pairs of
// segmented control electrodes of width control_width_z along z. V1/V2 are
// the center strips, V3/V4 the central three control segments per side,
// V5/V6 the adjacent ring, T the tickle segment beyond them.
struct SixWireParams {
    // Center-strip and rail widths from the published constraints (rf null
    // 150 um above the plane, ion 274 um from the control electrodes).
    double center_width = 90.9470932e-6;
    double rail_width = 115.8474770e-6;
    double gap_center = 5e-6;
    double gap = 10e-6;
    double control_width_z = 145e-6;
    int n_control_pairs = 11;
    double rail_length = 5000e-6;
    double control_extent_x = 2000e-6;
};

ElectrodeLayout reconstruct_six_wire(const SixWireParams& p = {});

// The shipped default reconstruction.
ElectrodeLayout six_wire_default();

} // namespace iontrap
