#include "ftparity/hilbert.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <boost/math/special_functions/laguerre.hpp>

#include <cmath>
#include <string>

namespace ftparity {

char level_name(Level l) noexcept {
    switch (l) {
    case Level::g: return 'g';
    case Level::e: return 'e';
    case Level::f: return 'f';
    case Level::h: return 'h';
    }
    return '?';
}

CavityBasis::CavityBasis(int dim) : dim_(dim) {
    if (dim < 2) throw std::invalid_argument("CavityBasis: dim must be >= 2");
}

CMatrix annihilation_op(int dim) {
    CMatrix a = CMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

CMatrix number_op(int dim) {
    CMatrix m = CMatrix::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) m(n, n) = static_cast<double>(n);
    return m;
}

CMatrix parity_op(int dim) {
    CMatrix m = CMatrix::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) m(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
    return m;
}

CMatrix identity_op(int dim) { return CMatrix::Identity(dim, dim); }

CavityOperators cavity_operators(const CavityBasis& basis) {
    CavityOperators ops;
    ops.annihilation = annihilation_op(basis.dim());
    ops.creation = ops.annihilation.adjoint();
    ops.number = number_op(basis.dim());
    ops.parity = parity_op(basis.dim());
    return ops;
}

CMatrix displacement(Complex beta, const CavityBasis& basis) {
    const CMatrix a = annihilation_op(basis.dim());
    const CMatrix gen = beta * a.adjoint() - std::conj(beta) * a;
    return gen.exp();
}

CMatrix displacement_elements(Complex gamma, int rows, int cols) {
    CMatrix out = CMatrix::Zero(rows, cols);
    const double r = std::abs(gamma);
    if (r == 0.0) {
        for (int k = 0; k < std::min(rows, cols); ++k) out(k, k) = 1.0;
        return out;
    }
    const double x = r * r;
    const double log_r = std::log(r);
    const Complex phase = gamma / r;
    for (int n = 0; n < cols; ++n) {
        for (int m = 0; m < rows; ++m) {
            // <m|D|n> = sqrt(lo!/hi!) * z^{hi-lo} * e^{-x/2} * L_lo^{(hi-lo)}(x)
            const int lo = std::min(m, n);
            const int hi = std::max(m, n);
            const unsigned k = static_cast<unsigned>(hi - lo);
            const double lag = boost::math::laguerre(static_cast<unsigned>(lo), k, x);
            const double log_mag =
                0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0)) + k * log_r - 0.5 * x;
            const Complex z = (m >= n) ? phase : -std::conj(phase);
            out(m, n) = std::exp(log_mag) * lag * std::pow(z, static_cast<int>(k));
        }
    }
    return out;
}

CMatrix ancilla_op(Level i, Level j) {
    CMatrix m = CMatrix::Zero(kAncillaLevels, kAncillaLevels);
    m(index_of(i), index_of(j)) = 1.0;
    return m;
}

CMatrix joint_op(const CMatrix& ancilla, const CMatrix& cavity) {
    return Eigen::kroneckerProduct(ancilla, cavity).eval();
}

namespace {

// Σ_{n ≥ start} e^{-x} x^n / n! summed forward from the first excluded term.
double poisson_tail(double x, int start) {
    if (x == 0.0) return start == 0 ? 1.0 : 0.0;
    double term = std::exp(-x + start * std::log(x) - std::lgamma(start + 1.0));
    double sum = 0.0;
    for (int n = start; n < start + 10000; ++n) {
        sum += term;
        term *= x / (n + 1);
        if (term < 1e-300 || (n > x && term < 1e-18 * sum)) break;
    }
    return sum;
}

CVector coherent_amplitudes(Complex alpha, int dim) {
    CVector c(dim);
    const double x = std::norm(alpha);
    Complex amp = std::exp(-0.5 * x);
    for (int n = 0; n < dim; ++n) {
        c(n) = amp;
        amp *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    return c;
}

void check_coherent_precondition(Complex alpha, const CavityBasis& basis) {
    if (std::norm(alpha) > basis.dim() / 3.0)
        throw std::invalid_argument("coherent_state: |alpha|^2 exceeds dim/3");
}

} // namespace

CavityKet coherent_state(Complex alpha, const CavityBasis& basis) {
    check_coherent_precondition(alpha, basis);
    CavityKet ket;
    ket.tail_weight = poisson_tail(std::norm(alpha), basis.dim());
    if (ket.tail_weight > kMaxTailWeight)
        throw TruncationError("coherent_state: tail weight " + std::to_string(ket.tail_weight) +
                              " beyond Fock cutoff");
    ket.amplitudes = coherent_amplitudes(alpha, basis.dim());
    ket.amplitudes.normalize();
    return ket;
}

CavityKet cat_state(const CatParams& cat, const CavityBasis& basis) {
    if (cat.parity_sign != 1 && cat.parity_sign != -1)
        throw std::invalid_argument("cat_state: parity_sign must be +1 or -1");
    check_coherent_precondition(cat.alpha, basis);
    const int dim = basis.dim();
    CVector c = coherent_amplitudes(cat.alpha, dim);
    for (int n = 0; n < dim; ++n) {
        const bool even = (n % 2 == 0);
        const bool keep = (cat.parity_sign > 0) ? even : !even;
        if (!keep) c(n) = 0.0;
    }
    const double kept = c.squaredNorm();
    if (kept == 0.0) throw std::invalid_argument("cat_state: odd cat undefined at alpha = 0");

    // Tail: the parity-selected part of the Poisson tail, relative to the full cat norm.
    const double x = std::norm(cat.alpha);
    double tail = 0.0;
    if (x > 0.0) {
        double term = std::exp(-x + dim * std::log(x) - std::lgamma(dim + 1.0));
        for (int n = dim; n < dim + 10000; ++n) {
            const bool even = (n % 2 == 0);
            if ((cat.parity_sign > 0) == even) tail += term;
            term *= x / (n + 1);
            if (term < 1e-300 || (n > x && term < 1e-18 * (tail + 1e-300))) break;
        }
    }
    CavityKet ket;
    ket.tail_weight = tail / (kept + tail);
    if (ket.tail_weight > kMaxTailWeight)
        throw TruncationError("cat_state: tail weight beyond Fock cutoff");
    ket.amplitudes = c / std::sqrt(kept);
    return ket;
}

double cat_overlap(double alpha, double theta) {
    const double a2 = alpha * alpha;
    const double norm = 2.0 * (1.0 + std::exp(-2.0 * a2));
    const Complex z = std::polar(1.0, -theta);
    const Complex s = std::exp(-a2 * (1.0 + z)) + std::exp(-a2 * (1.0 - z));
    return 4.0 / (norm * norm) * std::norm(s);
}

CMatrix displaced_parity_kernel(Complex beta, int dim) {
    // D(β) P D†(β) = D(2β) P
    CMatrix k = displacement_elements(2.0 * beta, dim, dim);
    for (int n = 1; n < dim; n += 2) k.col(n) *= -1.0;
    return (2.0 / std::numbers::pi) * k;
}

double wigner_point(const CMatrix& rho_cavity, Complex beta) {
    if (rho_cavity.rows() != rho_cavity.cols())
        throw DimensionMismatch("wigner_point: rho must be square");
    const CMatrix k = displaced_parity_kernel(beta, static_cast<int>(rho_cavity.rows()));
    return (k.cwiseProduct(rho_cavity.transpose())).sum().real();
}

double state_fidelity(const CMatrix& rho, const CVector& psi) {
    if (rho.rows() != psi.size() || rho.cols() != psi.size())
        throw DimensionMismatch("state_fidelity: dimension mismatch");
    return (psi.adjoint() * rho * psi)(0, 0).real();
}

// ---------------------------------------------------------------- JointState

JointState::JointState(CVector amplitudes, int fock_dim)
    : amps_(std::move(amplitudes)), fock_dim_(fock_dim) {
    if (fock_dim_ < 1 || amps_.size() != kAncillaLevels * fock_dim_)
        throw DimensionMismatch("JointState: amplitude length must be 4 * fock_dim");
}

JointState JointState::product(Level level, const CVector& cavity) {
    const int d = static_cast<int>(cavity.size());
    CVector v = CVector::Zero(kAncillaLevels * d);
    v.segment(index_of(level) * d, d) = cavity;
    return JointState(std::move(v), d);
}

void JointState::normalize() {
    const double n = amps_.norm();
    if (n == 0.0) throw NumericError("JointState::normalize: zero norm");
    amps_ /= n;
}

CVector JointState::cavity_block(Level level) const {
    return amps_.segment(index_of(level) * fock_dim_, fock_dim_);
}

double JointState::level_population(Level level) const {
    return amps_.segment(index_of(level) * fock_dim_, fock_dim_).squaredNorm();
}

CMatrix JointState::cavity_density() const {
    CMatrix rho = CMatrix::Zero(fock_dim_, fock_dim_);
    for (int a = 0; a < kAncillaLevels; ++a) {
        const auto blk = amps_.segment(a * fock_dim_, fock_dim_);
        rho.noalias() += blk * blk.adjoint();
    }
    return rho;
}

// -------------------------------------------------------------- JointDensity

JointDensity::JointDensity(CMatrix matrix, int fock_dim) : rho_(std::move(matrix)), fock_dim_(fock_dim) {
    if (fock_dim_ < 1 || rho_.rows() != kAncillaLevels * fock_dim_ || rho_.cols() != rho_.rows())
        throw DimensionMismatch("JointDensity: matrix must be 4*fock_dim square");
}

JointDensity JointDensity::from_state(const JointState& psi) {
    return JointDensity(psi.amplitudes() * psi.amplitudes().adjoint(), psi.fock_dim());
}

JointDensity JointDensity::product(Level level, const CMatrix& rho_cavity) {
    const int d = static_cast<int>(rho_cavity.rows());
    CMatrix m = CMatrix::Zero(kAncillaLevels * d, kAncillaLevels * d);
    m.block(index_of(level) * d, index_of(level) * d, d, d) = rho_cavity;
    return JointDensity(std::move(m), d);
}

double JointDensity::level_population(Level level) const {
    const int o = index_of(level) * fock_dim_;
    return rho_.block(o, o, fock_dim_, fock_dim_).trace().real();
}

CMatrix JointDensity::cavity_density() const {
    CMatrix out = CMatrix::Zero(fock_dim_, fock_dim_);
    for (int a = 0; a < kAncillaLevels; ++a)
        out += rho_.block(a * fock_dim_, a * fock_dim_, fock_dim_, fock_dim_);
    return out;
}

CMatrix JointDensity::ancilla_density() const {
    CMatrix out(kAncillaLevels, kAncillaLevels);
    for (int a = 0; a < kAncillaLevels; ++a)
        for (int b = 0; b < kAncillaLevels; ++b)
            out(a, b) = rho_.block(a * fock_dim_, b * fock_dim_, fock_dim_, fock_dim_).trace();
    return out;
}

bool JointDensity::is_valid(double herm_tol, double trace_tol, double eig_tol) const {
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > herm_tol) return false;
    if (std::abs(trace() - 1.0) > trace_tol) return false;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho_ + rho_.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -eig_tol;
}

CMatrix hermitize_normalize(const CMatrix& rho) {
    CMatrix h = 0.5 * (rho + rho.adjoint());
    const double tr = h.trace().real();
    if (tr <= 0.0) throw NumericError("hermitize_normalize: non-positive trace");
    return h / tr;
}

double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
    const CMatrix d = rho - sigma;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double purity(const CMatrix& rho) { return (rho * rho).trace().real(); }

} // namespace ftparity
