// protocols.hpp — ancilla pulses, the three parity-mapping sequences, noisy
// readout with reset, cat preparation and repeated parity measurement.

#pragma once

#include "ftparity/dynamics.hpp"

#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace ftparity {

enum class ProtocolKind { pi_ge, pi_gf, pi_ft };

/// "ge", "gf", "ft"
const char* protocol_name(ProtocolKind k) noexcept;
ProtocolKind parse_protocol(const std::string& s);

enum class RotationKind { ge_half, ge_half_inv, ef_full };

/// 4×4 ancilla unitary with real entries.
CMatrix rotation_unitary(RotationKind kind);
JointState ancilla_rotation(RotationKind kind, const JointState& s);
JointDensity ancilla_rotation(RotationKind kind, const JointDensity& r);

enum class Outcome { g = 0, e = 1, f = 2 };
char outcome_name(Outcome o) noexcept;

enum class EventClass { no_error, dephasing, relaxation, ambiguous };
const char* event_class_name(EventClass c) noexcept;
EventClass classify_event(Outcome o, ProtocolKind k) noexcept;

/// 1/(2|χ_eg|) for pi_ge, 1/(2|χ_fg|) for pi_gf and pi_ft.
double map_duration(const SystemParams& p, ProtocolKind k);

struct ProtocolOptions {
    int fock_dim = 20;
    /// Drive used in the pi_ft wait: effective (default) or time_dependent.
    DriveMode ft_drive = DriveMode::effective;
    /// NaN selects the first-order χ_fe cancellation detuning.
    double ft_detuning = std::numeric_limits<double>::quiet_NaN();
    /// Drive window inside the wait segment, seconds from its start.
    double drive_on = 0.0;
    double drive_off = std::numeric_limits<double>::infinity();
    /// false: Hamiltonian-only waits and no decay during readout.
    bool noise = true;
    EvolveOptions evolve;
};

struct ReadoutBranch {
    Outcome reported = Outcome::g;
    double probability = 0.0;
    JointDensity state;  // normalized, ancilla reset to |g>
};

class ProtocolEngine {
public:
    explicit ProtocolEngine(const SystemParams& p, ProtocolOptions opts = {});

    const SystemParams& params() const noexcept { return params_; }
    const ProtocolOptions& options() const noexcept { return opts_; }
    int fock_dim() const noexcept { return opts_.fock_dim; }
    double map_duration(ProtocolKind k) const { return ftparity::map_duration(params_, k); }
    double ft_detuning() const noexcept { return ft_detuning_; }

    /// Hamiltonian-only map; an injected error is applied inside the wait segment
    /// at its fraction of the wait duration.
    JointState parity_map(const JointState& s, ProtocolKind k, const InjectedError* injected = nullptr) const;

    /// Lindblad evolution of the full sequence (noise per options).
    JointDensity parity_map(const JointDensity& r, ProtocolKind k) const;

    /// One stochastic realization of the full sequence.
    JointState parity_map(const JointState& s, ProtocolKind k, CounterRng& rng, JumpRecord* record) const;

    /// Evolve for t_ro, measure {g,e,f,h} (h reported as f), apply the confusion
    /// matrix, reset the ancilla. One branch per reported outcome.
    std::vector<ReadoutBranch> readout_branches(const JointDensity& r) const;
    std::pair<Outcome, JointState> readout_and_reset(const JointState& s, CounterRng& rng,
                                                     JumpRecord* record = nullptr) const;

    /// Row n: probabilities of reporting (g, e, f) after the full sequence and
    /// readout, for the cavity in Fock state n and the ancilla in g. Computed in
    /// the photon-number-diagonal sector; needs a static Hamiltonian.
    RMatrix fock_response(ProtocolKind k) const;

private:
    struct Segment {
        const OpenSystem* system;
        double duration;
        double t_start;  // phase origin for a periodic drive
    };
    std::vector<Segment> wait_segments(ProtocolKind k, bool noisy) const;

    SystemParams params_;
    ProtocolOptions opts_;
    double ft_detuning_ = 0.0;
    std::unique_ptr<OpenSystem> idle_clean_, idle_noisy_, ft_clean_, ft_noisy_;
    std::unique_ptr<FockSectorSystem> idle_sector_, readout_sector_, ft_sector_;
};

/// Cavity phase 2π·χ_r·t_ro acquired while the ancilla sits in the reported level r
/// during readout; zero for g.
double readout_frame_phase(const SystemParams& p, Outcome r) noexcept;

/// Multiplies cavity amplitude n by e^{+i·phase·n}, undoing the rotation above.
JointState undo_readout_frame(const JointState& s, Outcome r, const SystemParams& p);

struct PrepareResult {
    JointDensity state;        // conditioned on success
    bool success = false;      // one sampled attempt
    double success_rate = 0.0;
    double parity = 0.0;       // final <P> of the cavity
    std::vector<double> round_pass;  // conditional pass probability of each round
};

/// Displace vacuum by α, then `rounds` pi_gf parity checks with readout; success
/// when every check reports g.
PrepareResult prepare_cat(const ProtocolEngine& engine, double alpha, CounterRng& rng, int rounds = 4);

struct MeasurementRecord {
    std::vector<Outcome> outcomes;
    bool kept = true;
    double likelihood = 1.0;
};

enum class FilterStrategy { product, posterior };

struct FilterConfig {
    FilterStrategy strategy = FilterStrategy::product;
    /// Parity assignment fidelity per protocol (ge, gf, ft).
    std::array<double, 3> assignment_fidelity{0.83, 0.865, 0.82};
    double threshold = 0.20;
    /// Per-measurement parity-flip probability used by the posterior strategy;
    /// zero here means "no photon loss" is a certainty under the product model.
    double flip_probability = 0.0;
};

double assignment_fidelity(const FilterConfig& f, ProtocolKind k) noexcept;

/// Probability used to accept or discard a record. A report other than g counts
/// as "odd". product: F^{#g}(1−F)^{#odd}. posterior: P(no parity flip | record)
/// for a two-state hidden Markov chain with flip probability q.
std::pair<double, bool> record_likelihood(const std::vector<Outcome>& record, ProtocolKind k,
                                          const FilterConfig& filter);

/// Photon-loss flip probability per measurement cycle for a cat of mean photon number nbar.
double cycle_flip_probability(const SystemParams& p, ProtocolKind k, double nbar);

struct RepeatedParityConfig {
    ProtocolKind protocol = ProtocolKind::pi_ft;
    int n_max = 1;
    int trials = 1;
    std::uint64_t seed = 0;
    FilterConfig filter;
    /// Undo the outcome-conditioned readout rotation after every measurement.
    bool track_readout_frame = true;
};

/// Called after each measurement of each trial with the post-reset state.
using ParityObserver = std::function<void(int trial, int n, const JointState& state, bool kept)>;

struct RepeatedParityResult {
    std::vector<MeasurementRecord> records;  // full-length record of each trial
    std::vector<JointState> final_states;
};

/// Trajectory mode. Trials are independent streams keyed by (seed, trial).
RepeatedParityResult repeated_parity(const ProtocolEngine& engine, const JointState& psi0,
                                     const RepeatedParityConfig& cfg, const ParityObserver& observer = {});

struct MasterParityResult {
    double all_g_probability = 0.0;
    JointDensity all_g_state;             // postselected on every report being g
    std::vector<double> outcome_probability;  // P(all g) after 1..N measurements
};

/// Density mode, small N only: throws ResourceError when N·dim² exceeds the budget.
MasterParityResult repeated_parity_master(const ProtocolEngine& engine, const JointDensity& rho0,
                                          ProtocolKind k, int n, double budget = 2.0e5);

} // namespace ftparity
