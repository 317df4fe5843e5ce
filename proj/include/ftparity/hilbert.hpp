// hilbert.hpp — Fock-space operators, ancilla projectors, coherent and cat states,
// joint (ancilla ⊗ cavity) containers, fidelities and Wigner kernels.
//
// Joint index ordering is ancilla-major: index = level * fock_dim + n.

#pragma once

#include "ftparity/types.hpp"

#include <cmath>

namespace ftparity {

class CavityBasis {
public:
    explicit CavityBasis(int dim);
    int dim() const noexcept { return dim_; }

private:
    int dim_;
};

struct CavityOperators {
    CMatrix annihilation;
    CMatrix creation;
    CMatrix number;
    CMatrix parity;
};

CavityOperators cavity_operators(const CavityBasis& basis);

CMatrix annihilation_op(int dim);
CMatrix number_op(int dim);
CMatrix parity_op(int dim);
CMatrix identity_op(int dim);

/// exp(β a† − β* a) of the truncated generator. Unitary only up to truncation.
CMatrix displacement(Complex beta, const CavityBasis& basis);

/// Exact matrix elements <m|D(γ)|n> for m < rows, n < cols (associated Laguerre form).
/// Independent of any truncation: each element equals the infinite-space value.
CMatrix displacement_elements(Complex gamma, int rows, int cols);

/// |i><j| on the ancilla.
CMatrix ancilla_op(Level i, Level j);

/// ancilla ⊗ cavity in the ancilla-major ordering.
CMatrix joint_op(const CMatrix& ancilla, const CMatrix& cavity);

/// Cavity ket together with the Fock weight it lost to truncation.
struct CavityKet {
    CVector amplitudes;
    double tail_weight = 0.0;
};

inline constexpr double kMaxTailWeight = 1e-8;

/// Normalized truncated coherent state. Requires |α|² ≤ dim/3.
CavityKet coherent_state(Complex alpha, const CavityBasis& basis);

struct CatParams {
    Complex alpha{std::sqrt(2.0), 0.0};
    int parity_sign = +1;
};

/// (|α> + s|−α>) normalized in the truncated space.
CavityKet cat_state(const CatParams& cat, const CavityBasis& basis);

/// |<C_α^+| C_{α e^{iθ}}^+>|² in closed form; alpha is the real amplitude.
double cat_overlap(double alpha, double theta);

/// (2/π) D(β) P D†(β) restricted to the first dim Fock levels (exact elements).
CMatrix displaced_parity_kernel(Complex beta, int dim);

/// W(β) = (2/π) Tr[D(β) P D†(β) ρ].
double wigner_point(const CMatrix& rho_cavity, Complex beta);

/// <ψ|ρ|ψ> for a pure target. Throws DimensionMismatch.
double state_fidelity(const CMatrix& rho, const CVector& psi);

class JointState {
public:
    JointState() = default;
    JointState(CVector amplitudes, int fock_dim);

    /// |level> ⊗ cavity
    static JointState product(Level level, const CVector& cavity);

    int fock_dim() const noexcept { return fock_dim_; }
    int dim() const noexcept { return static_cast<int>(amps_.size()); }
    const CVector& amplitudes() const noexcept { return amps_; }
    CVector& amplitudes() noexcept { return amps_; }

    double norm() const { return amps_.norm(); }
    void normalize();

    /// Unnormalized cavity amplitudes of the given ancilla level.
    CVector cavity_block(Level level) const;
    double level_population(Level level) const;
    CMatrix cavity_density() const;

private:
    CVector amps_;
    int fock_dim_ = 0;
};

class JointDensity {
public:
    JointDensity() = default;
    JointDensity(CMatrix matrix, int fock_dim);

    static JointDensity from_state(const JointState& psi);
    static JointDensity product(Level level, const CMatrix& rho_cavity);

    int fock_dim() const noexcept { return fock_dim_; }
    int dim() const noexcept { return static_cast<int>(rho_.rows()); }
    const CMatrix& matrix() const noexcept { return rho_; }
    CMatrix& matrix() noexcept { return rho_; }

    double trace() const { return rho_.trace().real(); }
    double level_population(Level level) const;
    /// Partial trace over the ancilla.
    CMatrix cavity_density() const;
    CMatrix ancilla_density() const;

    /// Hermitian within 1e-9, trace 1 within 1e-7, min eigenvalue ≥ −1e-7.
    bool is_valid(double herm_tol = 1e-9, double trace_tol = 1e-7, double eig_tol = 1e-7) const;

private:
    CMatrix rho_;
    int fock_dim_ = 0;
};

/// (ρ + ρ†)/2 rescaled to unit trace.
CMatrix hermitize_normalize(const CMatrix& rho);

/// ½ Σ|λ_i(ρ − σ)|.
double trace_distance(const CMatrix& rho, const CMatrix& sigma);

double purity(const CMatrix& rho);

} // namespace ftparity
