// analytics.hpp — closed-form dephasing model, error budget, phase-kick
// Monte-Carlo and exponential decay fits.

#pragma once

#include "ftparity/protocols.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ftparity {

/// Cavity dephasing rate (1/s) from thermal ancilla jumps; chi in Hz, gamma in 1/s.
double thermal_dephasing_rate(double chi, double gamma, double n_th);

/// T1_eg / (2 n_th²)
double residual_dephasing_time(const SystemParams& p);

struct T2Point {
    double detuning = 0.0;  // Hz
    double chi_eg = 0.0;    // Hz, first-order dressed value
    double t2 = 0.0;        // s
};

/// 1/T2 = 1/(2 T1_c) + thermal rate at χ_eg(Δ) + 1/T_φ,res. The residual time
/// defaults to T1_eg / (2 n_th²).
std::vector<T2Point> t2_model_curve(const SystemParams& p, const std::vector<double>& detunings,
                                    std::optional<double> t_phi_res = std::nullopt);

/// 1 − mean of cat_overlap(α, 2π δχ t) over t ∈ [t0, t1]; pointwise when t0 = t1.
double kick_infidelity(double delta_chi, double t0, double t1, double alpha);

/// min(1, f / f_full) with f_full the full-rotation value.
double dephasing_per_occurrence(double delta_chi, double t0, double t1, double alpha);

struct ErrorEventSpec {
    std::string stage;   // "map", "readout", "assignment"
    std::string label;
    double probability = 0.0;
    double delta_chi = 0.0;  // Hz
    double t0 = 0.0;
    double t1 = 0.0;
    /// Kick drawn uniformly over a full rotation instead of the window.
    bool full_dephasing = false;
    double dephasing = 0.0;  // per occurrence
    double dephasing_probability() const noexcept { return probability * dephasing; }
};

struct ErrorTableOptions {
    double alpha = std::sqrt(2.0);
    /// NaN selects 1/(2|χ_fg|).
    double t_map = std::numeric_limits<double>::quiet_NaN();
    std::array<double, 3> final_populations{0.8, 0.12, 0.08};  // p_g, p_e, p_f
};

/// Higher-order ancilla errors of one pi_gf or pi_ft measurement.
std::vector<ErrorEventSpec> error_event_table(const SystemParams& p, ProtocolKind k,
                                              const ErrorTableOptions& opts = {});

double total_dephasing_probability(const std::vector<ErrorEventSpec>& events);

struct DecayPoint {
    int n = 0;
    double fidelity = 0.0;
    double std_error = 0.0;
};
using DecayCurve = std::vector<DecayPoint>;

/// For each N: multinomial event counts, uniform kicks per event, cat overlap of
/// the summed phase, averaged over trials. Trial t uses stream (seed, t).
DecayCurve phase_kick_monte_carlo(const std::vector<ErrorEventSpec>& events, int n_max, int trials, double alpha,
                                  std::uint64_t seed);

struct FitResult {
    double A = 0.0;
    double N0 = 0.0;
    double c = 0.0;
    bool infinite_n0 = false;
    bool converged = false;
    double rms = 0.0;
    std::array<double, 3> std_error{};  // from the Gauss-Newton covariance
};

/// Least-squares fit of F(N) = A e^{−N/N0} + c. With fixed_c the offset is held
/// at that value and only A, N0 are fitted (std_error[2] stays 0).
FitResult fit_decay(const DecayCurve& curve, std::optional<double> fixed_c = std::nullopt);

/// Σ p_n² of the even cat: the overlap left after complete phase randomization.
double dephased_floor(double alpha);

} // namespace ftparity
