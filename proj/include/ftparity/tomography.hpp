// tomography.hpp — Wigner scans (direct and through the simulated parity
// circuit), vacuum normalization, least-squares MLE and cat alignment.

#pragma once

#include "ftparity/protocols.hpp"

#include <complex>
#include <vector>

namespace ftparity {

struct WignerPoint {
    Complex beta;
    double value = 0.0;
    int shots = 0;  // 0 marks an exact value
};

struct WignerGrid {
    std::vector<WignerPoint> points;
    bool truncation_warning = false;
};

/// n×n square grid on |Re β|, |Im β| ≤ extent.
std::vector<Complex> square_grid(int n = 21, double extent = 2.5);

/// Exact W(β) = (2/π) Tr[D(β) P D†(β) ρ]. Flags points with |β|² > dim, where the
/// displaced state leaves the space ρ lives in.
WignerGrid wigner_scan(const CMatrix& rho_cavity, const std::vector<Complex>& betas);

struct TomographyOptions {
    int extended_dim = 60;   // Fock space used for displaced states
    bool noise = true;
    ProtocolOptions protocol;  // fock_dim is ignored
};

/// Simulated Wigner tomography with the pi_gf circuit. Every step after the
/// displacement keeps the photon-number-diagonal sector closed, so the
/// probability of a "g" report is Σ_n p_n(β) R(n) with a per-Fock response R
/// computed once from the full noisy sequence. Each shot is a Bernoulli draw.
class TomographySimulator {
public:
    explicit TomographySimulator(const SystemParams& p, TomographyOptions opts = {});

    /// P(report g | cavity Fock state n), n < extended_dim.
    const RVector& response() const noexcept { return response_; }
    /// Measured parity of vacuum, 2R(0) − 1.
    double vacuum_contrast() const noexcept { return 2.0 * response_(0) - 1.0; }

    /// (2/π)(2 P_g − 1) at β; the infinite-shot value.
    double expected_value(const CMatrix& rho_cavity, Complex beta) const;

    /// shots = 0 returns expected values.
    WignerGrid scan(const CMatrix& rho_cavity, const std::vector<Complex>& betas, int shots,
                    CounterRng& rng) const;

private:
    RVector displaced_populations(const CMatrix& rho_cavity, Complex beta, double* leak) const;

    TomographyOptions opts_;
    RVector response_;
};

WignerGrid simulate_tomography(const JointDensity& rho, const std::vector<Complex>& betas,
                               const SystemParams& p, int shots, CounterRng& rng,
                               const TomographyOptions& opts = {});

/// Divides every value by the vacuum contrast.
WignerGrid normalize_grid(WignerGrid grid, double contrast);

struct ReconstructionResult {
    CMatrix rho;
    double residual = 0.0;  // Σ (predicted − measured)²
    int iterations = 0;
    bool converged = false;
    bool rank_deficient = false;
    std::vector<double> residual_history;
};

struct MleOptions {
    int max_iterations = 20000;
    double tolerance = 1e-8;  // relative residual improvement
};

/// PSD, unit-trace ρ of dimension dim minimizing the squared Wigner residual.
ReconstructionResult mle_reconstruct(const WignerGrid& grid, int dim, const MleOptions& opts = {});

struct AlignedFidelity {
    double theta = 0.0;  // in [0, π)
    double fidelity = 0.0;
};

/// max over θ of <C_α^+| e^{iθn} ρ e^{−iθn} |C_α^+>.
AlignedFidelity aligned_cat_fidelity(const CMatrix& rho_cavity, double alpha);

/// Fidelity at a fixed rotation θ.
double rotated_cat_fidelity(const CMatrix& rho_cavity, double alpha, double theta);

} // namespace ftparity
