// dynamics.hpp — Lindblad master-equation integration, quantum-jump
// trajectories and deterministic error injection.

#pragma once

#include "ftparity/hilbert.hpp"
#include "ftparity/model.hpp"
#include "ftparity/rng.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <string>
#include <vector>

namespace ftparity {

using SpMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

struct EvolveOptions {
    double dt = 0.0;            // 0 selects the automatic step
    double tolerance = 1e-7;    // trace/norm renormalization bound
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

struct JumpEvent {
    double time = 0.0;
    int channel = -1;
    std::string label;
};

struct JumpRecord {
    std::vector<JumpEvent> events;
};

struct InjectedError {
    std::string label;
    CMatrix ancilla;          // 4×4 jump operator on the ancilla factor
    double fraction = 0.5;    // position inside the segment, in [0, 1]
};

/// Hamiltonian and channels compiled once and reused across many evolutions.
class OpenSystem {
public:
    OpenSystem(HamiltonianSpec h, std::vector<CollapseChannel> channels);

    int dim() const noexcept { return dim_; }
    int fock_dim() const noexcept { return fock_dim_; }
    const HamiltonianSpec& hamiltonian() const noexcept { return h_; }
    const std::vector<CollapseChannel>& channels() const noexcept { return channels_; }

    /// True when H and every L†L are diagonal and there is no periodic term.
    bool diagonal() const noexcept { return diagonal_; }

    /// ρ(t_start + T); t_start sets the phase of a periodic drive.
    JointDensity evolve_master(const JointDensity& rho0, double T, const EvolveOptions& opts = {},
                               double t_start = 0.0) const;

    /// One quantum-jump trajectory. rng supplies jump thresholds and channel choices.
    JointState run_trajectory(const JointState& psi0, double T, CounterRng& rng, JumpRecord* record,
                              const EvolveOptions& opts = {}, double t_start = 0.0) const;

    /// Hamiltonian-only evolution (channels ignored).
    JointState evolve_unitary(const JointState& psi0, double T, const EvolveOptions& opts = {},
                              double t_start = 0.0) const;

    /// Step used by the RK4 paths for a segment of length T.
    double auto_step(double T) const;

private:
    CMatrix lindblad_rhs(const CMatrix& rho, double t) const;
    CVector heff_apply(const CVector& psi, double t, bool with_damping) const;
    JointDensity evolve_master_diagonal(const JointDensity& rho0, double T, const EvolveOptions& opts) const;
    JointDensity evolve_master_rk4(const JointDensity& rho0, double T, const EvolveOptions& opts,
                                   double t_start) const;
    JointState trajectory_diagonal(const JointState& psi0, double T, CounterRng& rng, JumpRecord* rec) const;
    JointState trajectory_rk4(const JointState& psi0, double T, CounterRng& rng, JumpRecord* rec,
                              const EvolveOptions& opts, double t_start) const;
    int choose_channel(const CVector& psi, CounterRng& rng) const;

    HamiltonianSpec h_;
    std::vector<CollapseChannel> channels_;
    int dim_ = 0;
    int fock_dim_ = 0;
    bool diagonal_ = false;

    std::vector<SpMatrix> jump_ops_;      // √γ L
    std::vector<bool> jump_diagonal_;     // L diagonal (pure dephasing type)
    std::vector<SpMatrix> jump_adj_;
    CMatrix heff_static_;                 // H0 − (i/2) Σ γ L†L
    SpMatrix heff_sparse_;
    SpMatrix h0_sparse_;
    SpMatrix periodic_sparse_;
    SpMatrix periodic_adj_sparse_;
    CVector heff_diag_;                   // its diagonal when diagonal_
    RMatrix dephase_rate_;                // Σ over diagonal channels of elementwise sandwich weights
    double mixing_frequency_ = 0.0;       // largest frequency jump between coupled elements
    double mixing_rate_ = 0.0;            // largest γ|L_ij|² among off-diagonal jumps
    double max_frequency_ = 0.0;          // cyclic, for the RK4 step
};

JointDensity evolve_master(const JointDensity& rho0, const HamiltonianSpec& h,
                           const std::vector<CollapseChannel>& channels, double T,
                           const EvolveOptions& opts = {});

JointState run_trajectory(const JointState& psi0, const HamiltonianSpec& h,
                          const std::vector<CollapseChannel>& channels, double T,
                          const EvolveOptions& opts, JumpRecord* record);

/// Unitary evolution to fraction·T, the normalized jump, then unitary evolution to T.
JointState evolve_with_injected_error(const JointState& psi0, const HamiltonianSpec& h, double T,
                                      const InjectedError& injected, const EvolveOptions& opts = {});

/// Ancilla blocks σ_n = <·,n|ρ|·,n> of the photon-number-diagonal sector.
using FockBlocks = std::vector<CMatrix>;

FockBlocks fock_blocks(const JointDensity& rho);

/// Master equation restricted to the photon-number-diagonal sector. This sector
/// is closed when H is diagonal and every channel is ancilla ⊗ (operator moving
/// n by a fixed amount); anything else throws std::invalid_argument.
class FockSectorSystem {
public:
    FockSectorSystem(const HamiltonianSpec& h, const std::vector<CollapseChannel>& channels);

    int fock_dim() const noexcept { return fock_dim_; }
    FockBlocks evolve(const FockBlocks& sigma, double T, const EvolveOptions& opts = {}) const;

private:
    struct Term {
        CMatrix ancilla;       // √γ A
        RVector weight;        // |c_n|² for source level n
        int shift = 0;         // source n feeds n − shift
    };
    FockBlocks apply_jumps(const FockBlocks& sigma) const;

    int fock_dim_ = 0;
    std::vector<CMatrix> generator_;  // elementwise rate per block
    std::vector<Term> terms_;
    double mixing_frequency_ = 0.0;
    double mixing_rate_ = 0.0;
};

struct RamseyResult {
    double t2 = 0.0;             // seconds; infinity when no decay is resolved
    bool no_decay = false;
    double relative_residual = 0.0;
    std::vector<double> delays;
    std::vector<double> coherence;
};

/// (|0> + |1>)/√2 ⊗ |g>, evolved under the full channel set and static H;
/// exponential fit of |<0|ρ_c|1>|. Throws NumericError on a poor fit.
RamseyResult ramsey_t2(const SystemParams& p, const DriveSpec& drive, const std::vector<double>& delays,
                       const EvolveOptions& opts = {}, int fock_dim = 2);

/// Same experiment with an explicit channel list (used for the limiting cases).
RamseyResult ramsey_t2(const SystemParams& p, const DriveSpec& drive, const std::vector<double>& delays,
                       const std::vector<CollapseChannel>& channels, const EvolveOptions& opts,
                       int fock_dim = 2);

} // namespace ftparity
