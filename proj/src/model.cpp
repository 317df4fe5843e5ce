#include "ftparity/model.hpp"

#include "ftparity/hilbert.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>

namespace ftparity {

double extrapolated_chi_h(double chi_e, double chi_f) noexcept {
    return -3.0 * std::abs(chi_e) - std::abs(chi_f);
}

void validate(const SystemParams& p) {
    auto finite = [](double x) { return std::isfinite(x); };
    for (double x : {p.chi_e, p.chi_f, p.chi_h, p.kerr, p.omega_sb})
        if (!finite(x)) throw ConfigError("non-finite frequency parameter");
    const std::pair<const char*, double> times[] = {
        {"T1_cavity", p.T1_cavity}, {"T1_eg", p.T1_eg},   {"T1_fe", p.T1_fe}, {"Tphi_g", p.Tphi_g},
        {"Tphi_e", p.Tphi_e},       {"Tphi_f", p.Tphi_f}, {"t_ro", p.t_ro}};
    for (const auto& [name, t] : times)
        if (!(t > 0.0) || !finite(t)) throw ConfigError(std::string(name) + " must be a positive time");
    if (!(p.n_th >= 0.0 && p.n_th < 0.5)) throw ConfigError("n_th must lie in [0, 0.5)");
    if (!(p.omega_sb >= 0.0)) throw ConfigError("omega_sb must be nonnegative");
    if (!(p.drive_dephasing_factor >= 1.0) || !finite(p.drive_dephasing_factor))
        throw ConfigError("drive_dephasing_factor must be >= 1");
    for (const auto& row : p.assignment_error) {
        double s = 0.0;
        for (double v : row) {
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("assignment_error entries must lie in [0, 1]");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-12) throw ConfigError("assignment_error rows must sum to 1");
    }
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "chi_e",  "chi_f",  "chi_h", "kerr",     "T1_cavity", "T1_eg",
        "T1_fe",  "Tphi_g", "Tphi_e", "Tphi_f",  "n_th",      "omega_sb",
        "t_ro",   "assignment_error", "drive_dephasing_factor"};
    return keys;
}

double number_field(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

} // namespace

SystemParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("parameter file must hold a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known_keys().count(key)) throw ConfigError("unknown parameter '" + key + "'");

    SystemParams p;
    p.chi_e = number_field(j, "chi_e", p.chi_e);
    p.chi_f = number_field(j, "chi_f", p.chi_f);
    p.chi_h = number_field(j, "chi_h", extrapolated_chi_h(p.chi_e, p.chi_f));
    p.kerr = number_field(j, "kerr", p.kerr);
    p.T1_cavity = number_field(j, "T1_cavity", p.T1_cavity);
    p.T1_eg = number_field(j, "T1_eg", p.T1_eg);
    p.T1_fe = number_field(j, "T1_fe", p.T1_fe);
    p.Tphi_g = number_field(j, "Tphi_g", p.Tphi_g);
    p.Tphi_e = number_field(j, "Tphi_e", p.Tphi_e);
    p.Tphi_f = number_field(j, "Tphi_f", p.Tphi_f);
    p.n_th = number_field(j, "n_th", p.n_th);
    p.omega_sb = number_field(j, "omega_sb", p.omega_sb);
    p.t_ro = number_field(j, "t_ro", p.t_ro);
    p.drive_dephasing_factor = number_field(j, "drive_dephasing_factor", p.drive_dephasing_factor);
    if (j.contains("assignment_error")) {
        const auto& m = j.at("assignment_error");
        if (!m.is_array() || m.size() != 3) throw ConfigError("assignment_error must be a 3x3 array");
        for (int r = 0; r < 3; ++r) {
            if (!m[r].is_array() || m[r].size() != 3)
                throw ConfigError("assignment_error must be a 3x3 array");
            for (int c = 0; c < 3; ++c) {
                if (!m[r][c].is_number()) throw ConfigError("assignment_error entries must be numbers");
                p.assignment_error[r][c] = m[r][c].get<double>();
            }
        }
    }
    validate(p);
    return p;
}

nlohmann::json params_to_json(const SystemParams& p) {
    nlohmann::json j;
    j["chi_e"] = p.chi_e;
    j["chi_f"] = p.chi_f;
    j["chi_h"] = p.chi_h;
    j["kerr"] = p.kerr;
    j["T1_cavity"] = p.T1_cavity;
    j["T1_eg"] = p.T1_eg;
    j["T1_fe"] = p.T1_fe;
    j["Tphi_g"] = p.Tphi_g;
    j["Tphi_e"] = p.Tphi_e;
    j["Tphi_f"] = p.Tphi_f;
    j["n_th"] = p.n_th;
    j["omega_sb"] = p.omega_sb;
    j["t_ro"] = p.t_ro;
    j["assignment_error"] = p.assignment_error;
    j["drive_dephasing_factor"] = p.drive_dephasing_factor;
    return j;
}

SystemParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed parameter file '" + path + "': " + e.what());
    }
    return params_from_json(j);
}

const char* drive_mode_name(DriveMode m) noexcept {
    switch (m) {
    case DriveMode::off: return "off";
    case DriveMode::effective: return "effective";
    case DriveMode::time_dependent: return "time-dependent";
    }
    return "?";
}

CMatrix HamiltonianSpec::at(double t) const {
    if (!periodic) return static_part;
    const Complex ph = std::polar(1.0, periodic->angular_frequency * t);
    return static_part + ph * periodic->op + std::conj(ph) * periodic->op.adjoint();
}

double first_order_induced_chi(double omega_sb, double delta) {
    if (delta == 0.0) throw InvalidDrive("induced shift diverges at zero detuning");
    return omega_sb * omega_sb / (4.0 * delta);
}

double induced_chi(double omega_sb, double delta, int n) {
    if (delta == 0.0) throw InvalidDrive("induced_chi: resonant drive (delta = 0)");
    if (n < 1) throw std::invalid_argument("induced_chi: n must be >= 1");
    const double sign = delta > 0 ? 1.0 : -1.0;
    const double d = std::abs(delta);
    const double x = n * omega_sb * omega_sb;
    // √(Δ² + x) − |Δ| without cancellation
    const double split = x / (std::sqrt(d * d + x) + d);
    return 0.5 * sign * split / n;
}

double cancellation_detuning(const SystemParams& p, CancellationTarget target) {
    if (!(p.omega_sb > 0.0)) throw InvalidDrive("cancellation_detuning: omega_sb must be positive");
    // the induced shift adds to χ_e only, so it must cancel χ_e − χ_ref
    const double chi_target = (target == CancellationTarget::zero_chi_eg) ? p.chi_e : p.chi_e - p.chi_f;
    if (chi_target == 0.0) throw InvalidDrive("cancellation_detuning: shift already zero");
    return -p.omega_sb * p.omega_sb / (4.0 * chi_target);
}

DispersiveCoefficients dispersive_coefficients(const SystemParams& p, const DriveSpec& drive,
                                               bool ft_mode) {
    DispersiveCoefficients c;
    c.shift_n = {0.0, p.chi_e, p.chi_f, p.chi_h};
    double chi_ind = 0.0;
    if (drive.mode != DriveMode::off && drive.detuning != 0.0)
        chi_ind = first_order_induced_chi(p.omega_sb, drive.detuning);
    if (drive.mode == DriveMode::effective) {
        if (std::abs(drive.detuning) < p.omega_sb)
            throw InvalidDrive("effective drive requires |detuning| >= omega_sb");
        c.shift_n[1] += chi_ind;
        c.shift_n[3] -= chi_ind;
        c.offset[3] -= chi_ind;
    }
    if (ft_mode) {
        if (drive.mode == DriveMode::off) throw InvalidDrive("FT mode requires an active drive");
        const double chi_fe = p.chi_f - (p.chi_e + chi_ind);
        if (std::abs(chi_fe) > 1e-6 * std::abs(p.chi_f))
            throw InvalidDrive("FT mode: drive does not cancel chi_fe");
        // remove rounding so the FT interaction commutes exactly with |e><f|
        if (drive.mode == DriveMode::effective) c.shift_n[1] = p.chi_f;
    }
    return c;
}

HamiltonianSpec build_hamiltonian(const SystemParams& p, const DriveSpec& drive, int fock_dim,
                                  bool ft_mode) {
    const DispersiveCoefficients c = dispersive_coefficients(p, drive, ft_mode);
    const int D = fock_dim;
    HamiltonianSpec spec;
    spec.fock_dim = D;
    spec.static_part = CMatrix::Zero(kAncillaLevels * D, kAncillaLevels * D);
    for (int a = 0; a < kAncillaLevels; ++a) {
        for (int n = 0; n < D; ++n) {
            const double e = c.shift_n[a] * n + c.offset[a] + 0.5 * p.kerr * n * (n - 1.0);
            spec.static_part(a * D + n, a * D + n) = kTwoPi * e;
        }
    }
    if (drive.mode == DriveMode::time_dependent) {
        PeriodicTerm term;
        term.op = joint_op(ancilla_op(Level::e, Level::h), annihilation_op(D).adjoint()) *
                  Complex(kTwoPi * 0.5 * p.omega_sb);
        term.angular_frequency = kTwoPi * drive.detuning;
        spec.periodic = std::move(term);
    }
    return spec;
}

CMatrix ft_interaction(const SystemParams& p, int fock_dim) {
    const CMatrix anc = ancilla_op(Level::e, Level::e) + ancilla_op(Level::f, Level::f);
    return joint_op(anc, number_op(fock_dim)) * Complex(kTwoPi * p.chi_f);
}

CMatrix dispersive_interaction(const SystemParams& p, int fock_dim) {
    const CMatrix n = number_op(fock_dim);
    return kTwoPi * (p.chi_e * joint_op(ancilla_op(Level::e, Level::e), n) +
                     p.chi_f * joint_op(ancilla_op(Level::f, Level::f), n));
}

CMatrix CollapseChannel::op() const { return joint_op(ancilla, cavity); }

std::vector<CollapseChannel> collapse_channels(const SystemParams& p, int fock_dim, bool drive_on) {
    const int D = fock_dim;
    const CMatrix I4 = CMatrix::Identity(kAncillaLevels, kAncillaLevels);
    const CMatrix ID = identity_op(D);
    const double deph = drive_on ? p.drive_dephasing_factor : 1.0;
    std::vector<CollapseChannel> out;
    auto add = [&](double rate, CMatrix anc, CMatrix cav, const char* label) {
        if (rate > 0.0) out.push_back({rate, std::move(anc), std::move(cav), label});
    };
    add(1.0 / p.T1_cavity, I4, annihilation_op(D), "cavity_loss");
    add(1.0 / p.T1_eg, ancilla_op(Level::g, Level::e), ID, "decay_eg");
    add(1.0 / p.T1_fe, ancilla_op(Level::e, Level::f), ID, "decay_fe");
    add(deph * 2.0 / p.Tphi_g, ancilla_op(Level::g, Level::g), ID, "dephase_g");
    add(deph * 2.0 / p.Tphi_e, ancilla_op(Level::e, Level::e), ID, "dephase_e");
    add(deph * 2.0 / p.Tphi_f, ancilla_op(Level::f, Level::f), ID, "dephase_f");
    add(p.n_th / p.T1_eg, ancilla_op(Level::e, Level::g), ID, "excite_ge");
    add(3.0 * p.n_th / p.T1_eg, ancilla_op(Level::h, Level::f), ID, "excite_fh");
    return out;
}

} // namespace ftparity
