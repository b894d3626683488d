#include "iontrap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace iontrap {

namespace {

ElectrodeRole role_from_string(const std::string& s) {
    if (s == "rf") return ElectrodeRole::rf;
    if (s == "dc_control") return ElectrodeRole::dc_control;
    if (s == "ground") return ElectrodeRole::ground;
    throw LayoutError("unknown electrode role '" + s + "'");
}

const char* role_to_string(ElectrodeRole r) {
    switch (r) {
        case ElectrodeRole::rf: return "rf";
        case ElectrodeRole::dc_control: return "dc_control";
        case ElectrodeRole::ground: return "ground";
    }
    return "ground";
}

Rect mirrored(const Rect& r) { return Rect{-r.x2, r.z1, -r.x1, r.z2}; }

bool same_rect(const Rect& a, const Rect& b, double tol) {
    return std::abs(a.x1 - b.x1) < tol && std::abs(a.x2 - b.x2) < tol &&
           std::abs(a.z1 - b.z1) < tol && std::abs(a.z2 - b.z2) < tol;
}

} // namespace

ElectrodeLayout::ElectrodeLayout(std::vector<Electrode> electrodes,
                                 std::vector<std::array<std::string, 2>> pairs,
                                 std::vector<std::string> controlled_names)
    : electrodes_(std::move(electrodes)),
      pairs_(std::move(pairs)),
      controlled_names_(std::move(controlled_names)) {
    validate();
}

void ElectrodeLayout::validate() const {
    for (const auto& e : electrodes_) {
        for (const auto& r : e.rects)
            if (!r.valid())
                throw LayoutError("electrode '" + e.name +
                                  "' has a degenerate rectangle (x1<x2 and z1<z2 required)");
        for (std::size_t i = 0; i < e.rects.size(); ++i)
            for (std::size_t j = i + 1; j < e.rects.size(); ++j)
                if (e.rects[i].overlaps(e.rects[j]))
                    throw LayoutError("electrode '" + e.name +
                                      "' has overlapping rectangles");
    }
    for (std::size_t a = 0; a < electrodes_.size(); ++a)
        for (std::size_t b = a + 1; b < electrodes_.size(); ++b)
            for (const auto& ra : electrodes_[a].rects)
                for (const auto& rb : electrodes_[b].rects)
                    if (ra.overlaps(rb))
                        throw LayoutError("electrodes '" + electrodes_[a].name +
                                          "' and '" + electrodes_[b].name +
                                          "' overlap");

    // mirror symmetry under the declared pairing
    auto find = [&](const std::string& n) -> const Electrode* {
        for (const auto& e : electrodes_)
            if (e.name == n) return &e;
        return nullptr;
    };
    for (const auto& pr : pairs_) {
        const Electrode* ea = find(pr[0]);
        const Electrode* eb = find(pr[1]);
        if (!ea || !eb)
            throw LayoutError("pair references unknown electrode '" +
                              (ea ? pr[1] : pr[0]) + "'");
        if (ea->rects.size() != eb->rects.size())
            throw LayoutError("pair (" + pr[0] + "," + pr[1] +
                              ") is not mirror-symmetric");
        const double tol = 1e-12;
        for (const auto& ra : ea->rects) {
            const Rect rm = mirrored(ra);
            const bool found = std::any_of(
                eb->rects.begin(), eb->rects.end(),
                [&](const Rect& rb) { return same_rect(rm, rb, tol); });
            if (!found)
                throw LayoutError("pair (" + pr[0] + "," + pr[1] +
                                  ") is not mirror-symmetric about x=0");
        }
    }

    int n_tickle = 0;
    for (const auto& e : electrodes_)
        if (e.name == "T") ++n_tickle;
    if (n_tickle != 1)
        throw LayoutError("layout must contain exactly one electrode named 'T'");
}

const Electrode& ElectrodeLayout::electrode(const std::string& name) const {
    for (const auto& e : electrodes_)
        if (e.name == name) return e;
    throw LayoutError("no electrode named '" + name + "'");
}

bool ElectrodeLayout::has_electrode(const std::string& name) const {
    for (const auto& e : electrodes_)
        if (e.name == name) return true;
    return false;
}

kernels::RectSoA ElectrodeLayout::rects_of_role(ElectrodeRole role) const {
    kernels::RectSoA out;
    for (const auto& e : electrodes_)
        if (e.role == role)
            for (const auto& r : e.rects) out.push(r.x1, r.x2, r.z1, r.z2, 1.0);
    return out;
}

kernels::RectSoA ElectrodeLayout::rects_of(const std::string& name) const {
    kernels::RectSoA out;
    for (const auto& r : electrode(name).rects) out.push(r.x1, r.x2, r.z1, r.z2, 1.0);
    return out;
}

ElectrodeLayout ElectrodeLayout::scaled(double k) const {
    std::vector<Electrode> es = electrodes_;
    for (auto& e : es)
        for (auto& r : e.rects) {
            r.x1 *= k;
            r.x2 *= k;
            r.z1 *= k;
            r.z2 *= k;
        }
    return ElectrodeLayout(std::move(es), pairs_, controlled_names_);
}

ElectrodeLayout load_layout(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LayoutError("cannot open layout file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw LayoutError("parse error in '" + path + "': " + e.what());
    }
    std::vector<Electrode> es;
    for (const auto& je : j.at("electrodes")) {
        Electrode e;
        e.name = je.at("name").get<std::string>();
        e.role = role_from_string(je.at("role").get<std::string>());
        for (const auto& jr : je.at("rects")) {
            if (jr.size() != 4)
                throw LayoutError("electrode '" + e.name +
                                  "': rects entries must be [x1,z1,x2,z2]");
            // file stores micrometers
            e.rects.push_back(Rect{jr[0].get<double>() * 1e-6,
                                   jr[1].get<double>() * 1e-6,
                                   jr[2].get<double>() * 1e-6,
                                   jr[3].get<double>() * 1e-6});
        }
        es.push_back(std::move(e));
    }
    std::vector<std::array<std::string, 2>> pairs;
    if (j.contains("pairs"))
        for (const auto& jp : j["pairs"])
            pairs.push_back({jp[0].get<std::string>(), jp[1].get<std::string>()});
    std::vector<std::string> controlled;
    if (j.contains("controlled"))
        for (const auto& jc : j["controlled"]) controlled.push_back(jc.get<std::string>());
    return ElectrodeLayout(std::move(es), std::move(pairs), std::move(controlled));
}

void save_layout(const ElectrodeLayout& layout, const std::string& path) {
    nlohmann::json j;
    j["electrodes"] = nlohmann::json::array();
    for (const auto& e : layout.electrodes()) {
        nlohmann::json je;
        je["name"] = e.name;
        je["role"] = role_to_string(e.role);
        je["rects"] = nlohmann::json::array();
        for (const auto& r : e.rects)
            je["rects"].push_back({r.x1 * 1e6, r.z1 * 1e6, r.x2 * 1e6, r.z2 * 1e6});
        j["electrodes"].push_back(je);
    }
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : layout.pairs()) j["pairs"].push_back({p[0], p[1]});
    j["controlled"] = layout.controlled_names();
    std::ofstream out(path);
    if (!out) throw LayoutError("cannot write layout file '" + path + "'");
    out << j.dump(1) << "\n";
}

ElectrodeLayout reconstruct_six_wire(const SixWireParams& p) {
    if (p.center_width <= 0 || p.rail_width <= 0 || p.gap_center <= 0 ||
        p.gap <= 0 || p.control_width_z <= 0 || p.rail_length <= 0 ||
        p.control_extent_x <= 0 || p.n_control_pairs < 5)
        throw LayoutError("six-wire parameters must be positive (n_control_pairs >= 5)");

    const double a_in = p.gap_center / 2 + p.center_width + p.gap;
    const double a_out = a_in + p.rail_width;
    const double xc0 = a_out + p.gap;
    const double xc1 = xc0 + p.control_extent_x;
    const double hl = p.rail_length / 2;
    const double pitch = p.control_width_z + p.gap;

    std::vector<Electrode> es;
    es.push_back({"rf",
                  ElectrodeRole::rf,
                  {Rect{-a_out, -hl, -a_in, hl}, Rect{a_in, -hl, a_out, hl}}});
    es.push_back({"V1", ElectrodeRole::dc_control,
                  {Rect{-p.gap_center / 2 - p.center_width, -hl, -p.gap_center / 2, hl}}});
    es.push_back({"V2", ElectrodeRole::dc_control,
                  {Rect{p.gap_center / 2, -hl, p.gap_center / 2 + p.center_width, hl}}});

    auto seg = [&](int k) {
        return std::array<double, 2>{k * pitch - p.control_width_z / 2,
                                     k * pitch + p.control_width_z / 2};
    };
    auto seg_rect = [&](int k, bool left) {
        auto zz = seg(k);
        return left ? Rect{-xc1, zz[0], -xc0, zz[1]} : Rect{xc0, zz[0], xc1, zz[1]};
    };

    // V3/V4: central three segments; V5/V6: the +-2 ring; T: +3 segment.
    es.push_back({"V3", ElectrodeRole::dc_control,
                  {seg_rect(-1, true), seg_rect(0, true), seg_rect(1, true)}});
    es.push_back({"V4", ElectrodeRole::dc_control,
                  {seg_rect(-1, false), seg_rect(0, false), seg_rect(1, false)}});
    es.push_back({"V5", ElectrodeRole::dc_control,
                  {seg_rect(-2, true), seg_rect(2, true)}});
    es.push_back({"V6", ElectrodeRole::dc_control,
                  {seg_rect(-2, false), seg_rect(2, false)}});
    es.push_back({"T", ElectrodeRole::dc_control, {seg_rect(3, false)}});

    const int kmax = (p.n_control_pairs - 1) / 2;
    for (int k = -kmax; k <= kmax; ++k) {
        if (k >= -2 && k <= 2) continue; // carried by V3..V6
        if (k == 3) {
            es.push_back({"G_L3", ElectrodeRole::ground, {seg_rect(3, true)}});
            continue; // right side is T
        }
        std::ostringstream ln, rn;
        ln << "G_L" << k;
        rn << "G_R" << k;
        es.push_back({ln.str(), ElectrodeRole::ground, {seg_rect(k, true)}});
        es.push_back({rn.str(), ElectrodeRole::ground, {seg_rect(k, false)}});
    }

    for (const auto& e : es)
        for (const auto& r : e.rects)
            if (!r.valid())
                throw LayoutError("six-wire assembly produced a degenerate rectangle in '" +
                                  e.name + "'");

    std::vector<std::array<std::string, 2>> pairs = {
        {"rf", "rf"}, {"V1", "V2"}, {"V3", "V4"}, {"V5", "V6"}};
    std::vector<std::string> controlled = {"V1", "V2", "V3", "V4", "V5", "V6", "T"};
    return ElectrodeLayout(std::move(es), std::move(pairs), std::move(controlled));
}

ElectrodeLayout six_wire_default() { return reconstruct_six_wire(SixWireParams{}); }

} // namespace iontrap
