// model.hpp — system parameters, Hamiltonian assembly, induced dispersive
// shifts and Lindblad collapse channels.
//
// Parameters carry cyclic frequencies (Hz) and seconds. Everything returned as
// an operator is already in angular units (rad/s); the 2π factor is applied
// here and nowhere else.

#pragma once

#include "ftparity/types.hpp"

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ftparity {

using ConfusionMatrix = std::array<std::array<double, 3>, 3>;

struct SystemParams {
    double chi_e = -93e3;
    double chi_f = -236e3;
    double chi_h = -3.0 * 93e3 - 236e3;
    double kerr = -10.0;
    double T1_cavity = 1.07e-3;
    double T1_eg = 25e-6;
    double T1_fe = 23e-6;
    double Tphi_g = 81e-6;
    double Tphi_e = 17e-6;
    double Tphi_f = 12e-6;
    double n_th = 0.025;
    double omega_sb = 1.7e6;
    double t_ro = 1.2e-6;
    // rows: true level g, e, f; columns: reported g, e, f
    ConfusionMatrix assignment_error{{{0.9996, 0.0004, 0.0},
                                      {0.0001, 0.9997, 0.0002},
                                      {0.0, 0.0001, 0.9999}}};
    double drive_dephasing_factor = 1.15;

    double chi_eg0() const noexcept { return chi_e; }
    double chi_fg0() const noexcept { return chi_f; }
    double chi_fe0() const noexcept { return chi_f - chi_e; }
};

/// Throws ConfigError on any violated invariant.
void validate(const SystemParams& p);

/// Default χ_h extrapolated from χ_e and χ_f.
double extrapolated_chi_h(double chi_e, double chi_f) noexcept;

/// Flat JSON object; absent keys take defaults, unknown keys throw ConfigError.
SystemParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const SystemParams& p);
SystemParams load_params(const std::string& path);

enum class DriveMode { off, effective, time_dependent };

struct DriveSpec {
    DriveMode mode = DriveMode::off;
    double detuning = 0.0;  // Hz
    double t_on = 0.0;
    double t_off = std::numeric_limits<double>::infinity();
};

const char* drive_mode_name(DriveMode m) noexcept;

/// H(t) = H0 + op·e^{iωt} + op†·e^{−iωt}
struct PeriodicTerm {
    CMatrix op;
    double angular_frequency = 0.0;
};

struct HamiltonianSpec {
    CMatrix static_part;
    std::optional<PeriodicTerm> periodic;
    int fock_dim = 0;

    bool has_periodic() const noexcept { return periodic.has_value(); }
    CMatrix at(double t) const;
};

/// Per-level dispersive coefficients (Hz) of the static part: level i picks up
/// 2π·(shift_n[i]·n + offset[i]).
struct DispersiveCoefficients {
    std::array<double, kAncillaLevels> shift_n{};
    std::array<double, kAncillaLevels> offset{};
};

DispersiveCoefficients dispersive_coefficients(const SystemParams& p, const DriveSpec& drive,
                                               bool ft_mode = false);

/// Undriven dispersive Hamiltonian plus the requested drive. With ft_mode, the
/// assembled χ_fe must vanish (InvalidDrive otherwise).
HamiltonianSpec build_hamiltonian(const SystemParams& p, const DriveSpec& drive, int fock_dim,
                                  bool ft_mode = false);

/// 2π·χ_f·n̂·(|e><e| + |f><f|)
CMatrix ft_interaction(const SystemParams& p, int fock_dim);
/// 2π·(χ_e n̂|e><e| + χ_f n̂|f><f|)
CMatrix dispersive_interaction(const SystemParams& p, int fock_dim);

/// First-order sideband Stark shift Ω²/(4Δ) in Hz.
double first_order_induced_chi(double omega_sb, double delta);

/// Exact dressed shift of the {|e,n>, |h,n−1>} pair divided by n (Hz per photon).
double induced_chi(double omega_sb, double delta, int n);

enum class CancellationTarget { zero_chi_eg, zero_chi_fe };

/// Δ at which the first-order induced shift cancels the chosen undriven χ.
double cancellation_detuning(const SystemParams& p, CancellationTarget target);

struct CollapseChannel {
    double rate = 0.0;   // 1/s
    CMatrix ancilla;     // 4×4 factor
    CMatrix cavity;      // D×D factor
    std::string label;

    CMatrix op() const;
};

std::vector<CollapseChannel> collapse_channels(const SystemParams& p, int fock_dim, bool drive_on);

} // namespace ftparity
