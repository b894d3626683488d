#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "iontrap/basis.hpp"
#include "iontrap/bloch.hpp"
#include "iontrap/constants.hpp"
#include "iontrap/csv.hpp"
#include "iontrap/dynamics.hpp"
#include "iontrap/fields.hpp"
#include "iontrap/geometry.hpp"

namespace {

using namespace iontrap;

struct CommonOpts {
    std::string layout_path;
    double v_rf = 175.0;
    double f_rf_mhz = 25.8;
    std::string out_path;
    std::uint64_t seed = 1;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--layout", c.layout_path,
                    "layout JSON file (default: built-in six-wire reconstruction)");
    cmd->add_option("--vrf", c.v_rf, "rf amplitude in volts");
    cmd->add_option("--frf", c.f_rf_mhz, "rf drive frequency in MHz");
    cmd->add_option("--out", c.out_path, "output CSV path (default: stdout)");
    cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--threads", c.threads, "worker threads for sweeps");
}

ElectrodeLayout get_layout(const CommonOpts& c) {
    if (c.layout_path.empty()) return six_wire_default();
    return load_layout(c.layout_path);
}

OperatingPoint get_op(const CommonOpts& c) {
    OperatingPoint op = OperatingPoint::ca40_default();
    op.v_rf = c.v_rf;
    op.omega_rf = 2 * consts::pi * c.f_rf_mhz * 1e6;
    return op;
}

std::ofstream open_out(const CommonOpts& c, std::ostream*& os) {
    std::ofstream f;
    if (c.out_path.empty()) {
        os = &std::cout;
    } else {
        f.open(c.out_path);
        if (!f) throw std::runtime_error("cannot open output file " + c.out_path);
        os = &f;
    }
    return f;
}

// the Table-I target potentials
PotentialBasis endcap_target() {
    PotentialBasis t;
    t.alpha = Vec3(-1.025e6, -1.025e6, 2.05e6);
    return t;
}
PotentialBasis xcomp_target() {
    PotentialBasis t;
    t.beta = Vec3(1, 0, 0);
    return t;
}
PotentialBasis ycomp_target() {
    PotentialBasis t;
    t.beta = Vec3(0, 1, 0);
    return t;
}
PotentialBasis tilt_target() {
    PotentialBasis t;
    t.frame = Frame::rotated45;
    t.alpha = Vec3(1.0e7, -1.0e7, 0);
    return t;
}

std::map<std::string, double> combine_sets(const VoltageSet& endcap,
                                           const VoltageSet& tilt,
                                           double tilt_factor) {
    std::map<std::string, double> dc;
    for (int i = 0; i < 6; ++i)
        dc["V" + std::to_string(i + 1)] =
            endcap.v[i] + tilt_factor * tilt.v[i];
    return dc;
}

int cmd_bases(const CommonOpts& c) {
    const auto layout = get_layout(c);
    const auto op = get_op(c);
    const Vec3 null = find_rf_null(layout, op);
    const auto bases = fit_control_bases(layout, null, null.y() / 10.0);

    struct Row {
        const char* name;
        PotentialBasis target;
        VoltageSetLabel label;
    };
    const Row rows[] = {{"endcap", endcap_target(), VoltageSetLabel::endcap},
                        {"xcomp", xcomp_target(), VoltageSetLabel::xcomp},
                        {"ycomp", ycomp_target(), VoltageSetLabel::ycomp},
                        {"tilt", tilt_target(), VoltageSetLabel::tilt}};

    std::ostream* os;
    auto f = open_out(c, os);
    CsvWriter csv(*os, {"basis", "V1_mV", "V2_mV", "V3_mV", "V4_mV", "V5_mV",
                        "V6_mV", "beta_residual_V_per_m", "alpha_residual_rel"});
    for (const auto& row : rows) {
        const VoltageSolve s = solve_voltages(row.target, bases, row.label);
        csv.row(std::string(row.name), s.set.v[0] * 1e3, s.set.v[1] * 1e3,
                s.set.v[2] * 1e3, s.set.v[3] * 1e3, s.set.v[4] * 1e3,
                s.set.v[5] * 1e3, s.beta_residual, s.alpha_residual_rel);
    }
    return 0;
}

int cmd_modes(const CommonOpts& c, const std::vector<double>& tilt_factors,
              double fit_to_mhz) {
    const auto layout = get_layout(c);
    OperatingPoint op = get_op(c);
    const Vec3 null = find_rf_null(layout, op);
    const auto bases = fit_control_bases(layout, null, null.y() / 10.0);
    const VoltageSolve endcap =
        solve_voltages(endcap_target(), bases, VoltageSetLabel::endcap);
    const VoltageSolve tilt =
        solve_voltages(tilt_target(), bases, VoltageSetLabel::tilt);

    if (fit_to_mhz > 0) {
        op.dc_voltages = combine_sets(endcap.set, tilt.set, 0.0);
        op.v_rf = infer_rf_amplitude(fit_to_mhz * 1e6, layout, op);
        std::cerr << "# fitted V_rf = " << op.v_rf << " V\n";
    }

    std::ostream* os;
    auto f = open_out(c, os);
    CsvWriter csv(*os, {"tilt_factor", "f_low_MHz", "f_high_MHz", "theta_deg",
                        "f_axial_kHz", "q"});
    for (double t : tilt_factors) {
        op.dc_voltages = combine_sets(endcap.set, tilt.set, t);
        const ModeAnalysis m = analyze_modes(layout, op);
        csv.row(t, m.f_radial[0] / 1e6, m.f_radial[1] / 1e6, m.tilt_angle_deg,
                m.f_axial / 1e3, m.q);
    }
    return 0;
}

int cmd_loss(const CommonOpts& c, double e0_max_frac, int n_points, int trials) {
    if (n_points < 1 || trials < 1)
        throw std::runtime_error("loss needs --points >= 1 and --trials >= 1");
    const auto layout = get_layout(c);
    OperatingPoint op = get_op(c);
    const auto depth = trap_depth(layout, op);
    std::vector<double> grid;
    for (int i = 1; i <= n_points; ++i)
        grid.push_back(depth.depth_ev * e0_max_frac * i / n_points);
    const LossCurve curve =
        loss_probability(layout, op, grid, trials, c.seed, c.threads);

    std::ostream* os;
    auto f = open_out(c, os);
    *os << "# trap_depth_eV," << depth.depth_ev << "\n";
    CsvWriter csv(*os, {"E0_eV", "p_loss", "stderr"});
    for (const auto& p : curve.points) csv.row(p.e0_ev, p.p_loss, p.stderr_);
    return 0;
}

int cmd_scan(const CommonOpts& c, double ic, double ir, double dc_mhz,
             double from_mhz, double to_mhz, int n) {
    if (n < 2) throw std::runtime_error("scan needs --n >= 2 grid points");
    LaserParams lp;
    lp.i_c = ic;
    lp.i_r = ir;
    lp.delta_c_hz = dc_mhz * 1e6;
    std::vector<double> drs;
    for (int i = 0; i < n; ++i)
        drs.push_back((from_mhz + (to_mhz - from_mhz) * i / (n - 1)) * 1e6);
    const ScanResult r = repumper_scan(lp, drs);

    std::ostream* os;
    auto f = open_out(c, os);
    CsvWriter csv(*os, {"delta_r_MHz", "F0_per_s"});
    for (std::size_t i = 0; i < r.delta_r_hz.size(); ++i)
        csv.row(r.delta_r_hz[i] / 1e6, r.f0[i]);
    return 0;
}

int cmd_sensmap(const CommonOpts& c, double ic, double dc_from, double dc_to,
                int n_dc, double ir_from, double ir_to, int n_ir, double fr_mhz,
                double projection) {
    LaserParams lp;
    lp.i_c = ic;
    OperatingPoint op = get_op(c);
    std::vector<double> dcs, irs;
    for (int i = 0; i < n_dc; ++i)
        dcs.push_back((dc_from + (dc_to - dc_from) * i / std::max(1, n_dc - 1)) * 1e6);
    for (int i = 0; i < n_ir; ++i)
        irs.push_back(ir_from * std::pow(ir_to / ir_from,
                                         static_cast<double>(i) /
                                             std::max(1, n_ir - 1)));
    const SensitivityMap map = sensitivity_map(lp, op, 2 * consts::pi * fr_mhz * 1e6,
                                               dcs, irs, projection);

    std::ostream* os;
    auto f = open_out(c, os);
    CsvWriter csv(*os, {"delta_c_MHz", "I_r_Is", "sens_per_V_m",
                        "delta_r_opt_MHz", "phase_rad"});
    for (const auto& p : map.points)
        csv.row(p.delta_c_hz / 1e6, p.i_r, p.sensitivity, p.delta_r_opt_hz / 1e6,
                p.phase);
    return 0;
}

int cmd_fit_lineshape(const CommonOpts& c, const std::string& datafile,
                      double fixed_amplitude, bool amp_given) {
    std::ifstream in(datafile);
    if (!in) throw std::runtime_error("cannot open data file " + datafile);
    std::vector<double> deltas, counts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || std::isalpha(line[0])) continue;
        std::istringstream ls(line);
        double d, v;
        char comma;
        if (ls >> d >> comma >> v) {
            deltas.push_back(d * 1e6); // MHz columns
            counts.push_back(v);
        }
    }
    const auto fit = fit_lineshape(deltas, counts,
                                   amp_given ? std::optional<double>(fixed_amplitude)
                                             : std::nullopt);
    std::ostream* os;
    auto f = open_out(c, os);
    *os << "s," << fit.s << "\n"
        << "Gamma_MHz," << fit.gamma_hz / 1e6 << "\n"
        << "amplitude," << fit.amplitude << "\n"
        << "background," << fit.background << "\n"
        << "rms_residual," << fit.rms_residual << "\n"
        << "converged," << (fit.converged ? 1 : 0) << "\n";
    return fit.converged ? 0 : 3;
}

int cmd_heating(const CommonOpts& c, double ndot, double f_khz) {
    const auto op = get_op(c);
    const double se = heating_to_spectral_density(ndot, f_khz * 1e3, op);
    std::ostream* os;
    auto f = open_out(c, os);
    *os << "S_E_V2_per_m2_per_Hz," << se << "\n";
    return 0;
}

int cmd_emit_layout(const CommonOpts& c) {
    const auto layout = get_layout(c);
    if (c.out_path.empty()) throw std::runtime_error("emit-layout requires --out");
    save_layout(layout, c.out_path);
    return 0;
}

int cmd_field_grid(const CommonOpts& c, double x0, double x1, int nx, double y0,
                   double y1, int ny, double z_um, bool with_field) {
    const auto layout = get_layout(c);
    const auto op = get_op(c);
    const auto rf = layout.rects_of_role(ElectrodeRole::rf);

    std::ostream* os;
    auto f = open_out(c, os);
    std::vector<std::string> hdr = {"x_um", "y_um", "z_um", "potential_V"};
    if (with_field) {
        hdr.push_back("Ex_V_per_m");
        hdr.push_back("Ey_V_per_m");
        hdr.push_back("Ez_V_per_m");
    }
    CsvWriter csv(*os, hdr);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double x = (x0 + (x1 - x0) * ix / std::max(1, nx - 1)) * 1e-6;
            const double y = (y0 + (y1 - y0) * iy / std::max(1, ny - 1)) * 1e-6;
            const Vec3 p(x, y, z_um * 1e-6);
            const double phi = op.v_rf * potential_of(rf, p);
            if (with_field) {
                const Vec3 e = -op.v_rf * gradient_of(rf, p);
                csv.row(x * 1e6, y * 1e6, z_um, phi, e.x(), e.y(), e.z());
            } else {
                csv.row(x * 1e6, y * 1e6, z_um, phi);
            }
        }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"six-wire surface-electrode trap workbench"};
    app.require_subcommand(1);

    CommonOpts c;

    auto* bases = app.add_subcommand("bases", "solve the four voltage bases");
    add_common(bases, c);

    auto* modes = app.add_subcommand("modes", "radial modes vs tilt factor");
    add_common(modes, c);
    std::vector<double> tilt_factors{0, 0.125, 0.25, 0.5, 1, 2};
    double fit_to = 3.135;
    modes->add_option("--tilt-factors", tilt_factors, "tilt factors to sweep");
    modes->add_option("--fit-frequency", fit_to,
                      "fit V_rf to this mean radial frequency in MHz (0 = keep --vrf)");

    auto* loss = app.add_subcommand("loss", "collision-loss Monte Carlo");
    add_common(loss, c);
    double e0_max = 3.0;
    int loss_points = 12, trials = 200;
    loss->add_option("--e0-max", e0_max, "max collision energy in units of depth");
    loss->add_option("--points", loss_points, "number of energy grid points");
    loss->add_option("--trials", trials, "Monte Carlo trials per point");

    auto* scan = app.add_subcommand("scan", "repumper fluorescence scan");
    add_common(scan, c);
    double sc_ic = 1.7, sc_ir = 95.0, sc_dc = -14.0, sc_from = -60.0, sc_to = 20.0;
    int sc_n = 161;
    scan->add_option("--ic", sc_ic, "cooling intensity in I_s");
    scan->add_option("--ir", sc_ir, "repumper intensity in I_s");
    scan->add_option("--dc", sc_dc, "cooling detuning in MHz");
    scan->add_option("--from", sc_from, "repumper detuning start in MHz");
    scan->add_option("--to", sc_to, "repumper detuning end in MHz");
    scan->add_option("--n", sc_n, "number of scan points");

    auto* sensmap = app.add_subcommand("sensmap", "micromotion sensitivity map");
    add_common(sensmap, c);
    double sm_ic = 1.5, sm_dc0 = -35, sm_dc1 = -5, sm_ir0 = 10, sm_ir1 = 300;
    int sm_ndc = 20, sm_nir = 20;
    double sm_fr = 3.33, sm_proj = 0.70710678118654752440;
    sensmap->add_option("--ic", sm_ic, "cooling intensity in I_s");
    sensmap->add_option("--dc-from", sm_dc0, "cooling detuning start in MHz");
    sensmap->add_option("--dc-to", sm_dc1, "cooling detuning end in MHz");
    sensmap->add_option("--n-dc", sm_ndc, "detuning grid points");
    sensmap->add_option("--ir-from", sm_ir0, "repumper intensity start in I_s");
    sensmap->add_option("--ir-to", sm_ir1, "repumper intensity end in I_s");
    sensmap->add_option("--n-ir", sm_nir, "intensity grid points (log spaced)");
    sensmap->add_option("--fr", sm_fr, "radial mode frequency in MHz");
    sensmap->add_option("--projection", sm_proj, "beam projection onto the motion");

    auto* fitls = app.add_subcommand("fit-lineshape", "fit the two-level lineshape");
    add_common(fitls, c);
    std::string datafile;
    double fixed_amp = 1.0;
    fitls->add_option("data", datafile, "CSV with delta_MHz,counts")->required();
    auto* amp_opt = fitls->add_option("--amplitude", fixed_amp,
                                      "fix the amplitude (needed to identify s and Gamma)");

    auto* heating = app.add_subcommand("heating", "heating rate to field noise density");
    add_common(heating, c);
    double ndot = 5e4, f_khz = 467.0;
    heating->add_option("--ndot", ndot, "heating rate in quanta/s");
    heating->add_option("--f", f_khz, "mode frequency in kHz");

    auto* emit = app.add_subcommand("emit-layout", "write the layout as JSON");
    add_common(emit, c);

    auto* grid = app.add_subcommand("field-grid", "rf potential/field on a grid");
    add_common(grid, c);
    double gx0 = -500, gx1 = 500, gy0 = 10, gy1 = 600, gz = 0;
    int gnx = 51, gny = 51;
    bool with_field = false;
    grid->add_option("--x-from", gx0, "x start in um");
    grid->add_option("--x-to", gx1, "x end in um");
    grid->add_option("--nx", gnx, "x points");
    grid->add_option("--y-from", gy0, "y start in um");
    grid->add_option("--y-to", gy1, "y end in um");
    grid->add_option("--ny", gny, "y points");
    grid->add_option("--z", gz, "z plane in um");
    grid->add_flag("--field", with_field, "also emit E-field columns");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bases->parsed()) return cmd_bases(c);
        if (modes->parsed()) return cmd_modes(c, tilt_factors, fit_to);
        if (loss->parsed()) return cmd_loss(c, e0_max, loss_points, trials);
        if (scan->parsed()) return cmd_scan(c, sc_ic, sc_ir, sc_dc, sc_from, sc_to, sc_n);
        if (sensmap->parsed())
            return cmd_sensmap(c, sm_ic, sm_dc0, sm_dc1, sm_ndc, sm_ir0, sm_ir1,
                               sm_nir, sm_fr, sm_proj);
        if (fitls->parsed())
            return cmd_fit_lineshape(c, datafile, fixed_amp, amp_opt->count() > 0);
        if (heating->parsed()) return cmd_heating(c, ndot, f_khz);
        if (emit->parsed()) return cmd_emit_layout(c);
        if (grid->parsed())
            return cmd_field_grid(c, gx0, gx1, gnx, gy0, gy1, gny, gz, with_field);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
