// experiments.hpp — simulation drivers shared by the command-line runner and
// the acceptance checks: sideband chevron, simulated Stark shifts and the
// repeated-parity fidelity decay.

#pragma once

#include "ftparity/analytics.hpp"
#include "ftparity/tomography.hpp"

#include <cstdint>
#include <vector>

namespace ftparity {

struct ChevronTrace {
    std::vector<double> times;
    std::vector<double> p_e;
    std::vector<double> p_h;
};

/// |e,1> under the time-dependent sideband drive at the given detuning,
/// Hamiltonian only, sampled at the requested (sorted, nonnegative) times.
ChevronTrace chevron_trace(const SystemParams& p, double detuning, const std::vector<double>& times,
                           int fock_dim = 4);

/// Per-photon Stark shift of |e,n> (Hz) extracted from the phase of its
/// amplitude under the time-dependent drive, after removing the undriven
/// energy. Linear fit over `periods` drive periods.
double simulated_stark_shift(const SystemParams& p, double detuning, int n, int periods = 40);

/// Posterior record filter with the photon-loss flip probability of a cat of
/// amplitude alpha.
FilterConfig decay_filter(const SystemParams& p, ProtocolKind k, double alpha);

struct ParityDecayOptions {
    int n_max = 80;
    int trials = 2000;
    std::uint64_t seed = 0;
    double alpha = std::sqrt(2.0);
    FilterConfig filter;
};

struct ParityDecayResult {
    DecayCurve curve;            // N with at least two kept trials
    std::vector<int> kept;       // per N = 1..n_max
    std::vector<double> theta;   // alignment angle per curve point
    FitResult fit;               // free offset
    FitResult floor_fit;         // offset held at the dephased floor
};

/// Even cat ⊗ |g>, N rounds of parity map + readout per trajectory. At each N
/// the kept trajectories are averaged into a cavity density and scored by the
/// aligned cat fidelity; the standard error is that of the per-trajectory
/// fidelities at the same angle.
ParityDecayResult parity_decay(const ProtocolEngine& engine, ProtocolKind k, const ParityDecayOptions& opts);

} // namespace ftparity
