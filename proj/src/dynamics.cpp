#include "ftparity/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ftparity {

namespace {

SpMatrix to_sparse(const CMatrix& m) {
    SpMatrix s = m.sparseView(Complex(1.0), 0.0);
    s.makeCompressed();
    return s;
}

bool is_diagonal(const CMatrix& m) {
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i)
            if (i != j && m(i, j) != Complex(0.0)) return false;
    return true;
}

constexpr double kPositivityFloor = -1e-5;
constexpr double kTraceDrift = 1e-5;

JointDensity finalize_density(CMatrix rho, int fock_dim) {
    const double tr = rho.trace().real();
    if (!std::isfinite(tr) || std::abs(tr - 1.0) > kTraceDrift)
        throw NumericError("master equation: trace drifted to " + std::to_string(tr));
    CMatrix h = hermitize_normalize(rho);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kPositivityFloor)
        throw NumericError("master equation: positivity violated, reduce the step size");
    return JointDensity(std::move(h), fock_dim);
}

} // namespace

OpenSystem::OpenSystem(HamiltonianSpec h, std::vector<CollapseChannel> channels)
    : h_(std::move(h)), channels_(std::move(channels)) {
    dim_ = static_cast<int>(h_.static_part.rows());
    fock_dim_ = h_.fock_dim;
    if (h_.static_part.cols() != dim_ || dim_ != kAncillaLevels * fock_dim_)
        throw DimensionMismatch("OpenSystem: Hamiltonian does not match 4 * fock_dim");

    heff_static_ = h_.static_part;
    for (const auto& ch : channels_) {
        if (ch.rate < 0.0) throw std::invalid_argument("OpenSystem: negative collapse rate");
        const CMatrix L = ch.op();
        if (L.rows() != dim_) throw DimensionMismatch("OpenSystem: channel dimension mismatch");
        jump_ops_.push_back(to_sparse(std::sqrt(ch.rate) * L));
        jump_diagonal_.push_back(is_diagonal(L));
        heff_static_ -= Complex(0.0, 0.5 * ch.rate) * (L.adjoint() * L);
    }
    diagonal_ = !h_.periodic && is_diagonal(heff_static_);
    heff_sparse_ = to_sparse(heff_static_);
    h0_sparse_ = to_sparse(h_.static_part);
    for (const auto& L : jump_ops_) jump_adj_.push_back(L.adjoint());
    if (h_.periodic) {
        periodic_sparse_ = to_sparse(h_.periodic->op);
        periodic_adj_sparse_ = periodic_sparse_.adjoint();
    }

    double diag_max = 0.0;
    for (int k = 0; k < dim_; ++k) diag_max = std::max(diag_max, std::abs(h_.static_part(k, k)));
    max_frequency_ = diag_max / kTwoPi;
    if (h_.periodic) {
        double vmax = 0.0;
        for (int j = 0; j < dim_; ++j)
            vmax = std::max(vmax, h_.periodic->op.col(j).cwiseAbs().maxCoeff());
        max_frequency_ += std::abs(h_.periodic->angular_frequency) / kTwoPi + 2.0 * vmax / kTwoPi;
    }

    if (diagonal_) {
        heff_diag_ = heff_static_.diagonal();
        dephase_rate_ = RMatrix::Zero(dim_, dim_);
        for (std::size_t c = 0; c < jump_ops_.size(); ++c) {
            if (!jump_diagonal_[c]) continue;
            const CMatrix L = CMatrix(jump_ops_[c]);
            for (int k = 0; k < dim_; ++k)
                for (int j = 0; j < dim_; ++j)
                    dephase_rate_(j, k) += (L(j, j) * std::conj(L(k, k))).real();
        }
        // bound on how fast the interaction-picture coefficients rotate
        for (std::size_t c = 0; c < jump_ops_.size(); ++c) {
            if (jump_diagonal_[c]) continue;
            for (int k = 0; k < jump_ops_[c].outerSize(); ++k)
                for (SpMatrix::InnerIterator it(jump_ops_[c], k); it; ++it) {
                    const Complex d = heff_diag_(it.row()) - heff_diag_(it.col());
                    mixing_frequency_ = std::max(mixing_frequency_, 2.0 * std::abs(d));
                    mixing_rate_ = std::max(mixing_rate_, std::norm(it.value()));
                }
        }
    }
}

double OpenSystem::auto_step(double T) const {
    double dt = T / 2000.0;
    if (max_frequency_ > 0.0) dt = std::min(dt, 1.0 / (50.0 * max_frequency_));
    return dt;
}

CMatrix OpenSystem::lindblad_rhs(const CMatrix& rho, double t) const {
    CMatrix hr = heff_sparse_ * rho;
    if (h_.periodic) {
        const Complex ph = std::polar(1.0, h_.periodic->angular_frequency * t);
        hr += ph * (periodic_sparse_ * rho) + std::conj(ph) * (periodic_adj_sparse_ * rho);
    }
    // −i(H_eff ρ − ρ H_eff†) with ρ Hermitian equals −i·X + (−i·X)†, X = H_eff ρ
    CMatrix out = Complex(0.0, -1.0) * hr;
    out += CMatrix(out.adjoint());
    for (std::size_t c = 0; c < jump_ops_.size(); ++c) {
        const CMatrix lr = jump_ops_[c] * rho;
        out += lr * jump_adj_[c];
    }
    return out;
}

JointDensity OpenSystem::evolve_master(const JointDensity& rho0, double T, const EvolveOptions& opts,
                                       double t_start) const {
    if (rho0.dim() != dim_) throw DimensionMismatch("evolve_master: state dimension mismatch");
    if (T < 0.0) throw std::invalid_argument("evolve_master: negative duration");
    if (T == 0.0) return rho0;
    if (diagonal_) return evolve_master_diagonal(rho0, T, opts);
    return evolve_master_rk4(rho0, T, opts, t_start);
}

JointDensity OpenSystem::evolve_master_diagonal(const JointDensity& rho0, double T,
                                                const EvolveOptions& opts) const {
    // dρ/dt = G∘ρ + N(ρ): G carries H_eff and pure dephasing exactly; N holds
    // the off-diagonal jumps and is integrated by integrating-factor RK4.
    CMatrix G(dim_, dim_);
    for (int k = 0; k < dim_; ++k)
        for (int j = 0; j < dim_; ++j)
            G(j, k) = Complex(0.0, -1.0) * (heff_diag_(j) - std::conj(heff_diag_(k))) + dephase_rate_(j, k);

    std::vector<std::size_t> mixing;
    for (std::size_t c = 0; c < jump_ops_.size(); ++c)
        if (!jump_diagonal_[c]) mixing.push_back(c);

    if (mixing.empty()) {
        CMatrix rho = rho0.matrix().cwiseProduct((G * T).array().exp().matrix());
        return finalize_density(std::move(rho), fock_dim_);
    }

    std::vector<SpMatrix> adj;
    for (auto c : mixing) adj.push_back(jump_ops_[c].adjoint());
    auto N = [&](const CMatrix& r) {
        CMatrix out = CMatrix::Zero(dim_, dim_);
        for (std::size_t i = 0; i < mixing.size(); ++i) {
            const CMatrix lr = jump_ops_[mixing[i]] * r;
            out += lr * adj[i];
        }
        return out;
    };

    double dt = opts.dt;
    if (dt <= 0.0) {
        dt = T / 20.0;
        if (mixing_frequency_ > 0.0) dt = std::min(dt, 0.5 / mixing_frequency_);
        if (mixing_rate_ > 0.0) dt = std::min(dt, 0.05 / mixing_rate_);
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    const double h = T / steps;
    const CMatrix E = (G * (0.5 * h)).array().exp().matrix();
    const CMatrix E2 = E.cwiseProduct(E);

    CMatrix y = rho0.matrix();
    for (int s = 0; s < steps; ++s) {
        const CMatrix k1 = N(y);
        const CMatrix k2 = N(E.cwiseProduct(y + (0.5 * h) * k1));
        const CMatrix Ey = E.cwiseProduct(y);
        const CMatrix k3 = N(Ey + (0.5 * h) * k2);
        const CMatrix k4 = N(E2.cwiseProduct(y) + h * E.cwiseProduct(k3));
        y = E2.cwiseProduct(y) +
            (h / 6.0) * (E2.cwiseProduct(k1) + 2.0 * E.cwiseProduct(k2 + k3) + k4);
    }
    return finalize_density(std::move(y), fock_dim_);
}

JointDensity OpenSystem::evolve_master_rk4(const JointDensity& rho0, double T, const EvolveOptions& opts,
                                           double t_start) const {
    double dt = opts.dt > 0.0 ? opts.dt : auto_step(T);
    if (h_.periodic && opts.dt > 0.0) {
        const double f_drive = std::abs(h_.periodic->angular_frequency) / kTwoPi;
        if (f_drive > 0.0 && dt > (1.0 + 1e-9) / (50.0 * f_drive))
            throw NumericError("evolve_master: dt too large for the periodic drive");
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    const double h = T / steps;
    CMatrix y = rho0.matrix();
    double t = t_start;
    for (int s = 0; s < steps; ++s) {
        const CMatrix k1 = lindblad_rhs(y, t);
        const CMatrix k2 = lindblad_rhs(y + (0.5 * h) * k1, t + 0.5 * h);
        const CMatrix k3 = lindblad_rhs(y + (0.5 * h) * k2, t + 0.5 * h);
        const CMatrix k4 = lindblad_rhs(y + h * k3, t + h);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t_start + (s + 1) * h;
    }
    return finalize_density(std::move(y), fock_dim_);
}

CVector OpenSystem::heff_apply(const CVector& psi, double t, bool with_damping) const {
    CVector out = (with_damping ? heff_sparse_ : h0_sparse_) * psi;
    if (h_.periodic) {
        const Complex ph = std::polar(1.0, h_.periodic->angular_frequency * t);
        out += ph * (periodic_sparse_ * psi) + std::conj(ph) * (periodic_adj_sparse_ * psi);
    }
    return Complex(0.0, -1.0) * out;
}

int OpenSystem::choose_channel(const CVector& psi, CounterRng& rng) const {
    std::vector<double> w(jump_ops_.size());
    for (std::size_t c = 0; c < jump_ops_.size(); ++c) w[c] = (jump_ops_[c] * psi).squaredNorm();
    double total = 0.0;
    for (double x : w) total += x;
    if (!(total > 0.0)) throw NumericError("trajectory: jump requested with no active channel");
    return rng.categorical(w);
}

JointState OpenSystem::run_trajectory(const JointState& psi0, double T, CounterRng& rng, JumpRecord* record,
                                      const EvolveOptions& opts, double t_start) const {
    if (psi0.dim() != dim_) throw DimensionMismatch("run_trajectory: state dimension mismatch");
    if (T < 0.0) throw std::invalid_argument("run_trajectory: negative duration");
    if (channels_.empty()) return evolve_unitary(psi0, T, opts, t_start);
    if (diagonal_) return trajectory_diagonal(psi0, T, rng, record);
    return trajectory_rk4(psi0, T, rng, record, opts, t_start);
}

JointState OpenSystem::trajectory_diagonal(const JointState& psi0, double T, CounterRng& rng,
                                           JumpRecord* rec) const {
    CVector psi = psi0.amplitudes();
    psi.normalize();
    double t = 0.0;
    RVector kappa(dim_);
    for (int k = 0; k < dim_; ++k) kappa(k) = -2.0 * heff_diag_(k).imag();

    while (true) {
        const double r = rng.uniform_pos();
        const double remaining = T - t;
        RVector w = psi.cwiseAbs2();
        auto norm2 = [&](double s) { return (w.array() * (-kappa.array() * s).exp()).sum(); };
        const double end_norm = norm2(remaining);
        if (end_norm >= r) {
            for (int k = 0; k < dim_; ++k) psi(k) *= std::exp(Complex(0.0, -1.0) * heff_diag_(k) * remaining);
            psi /= std::sqrt(end_norm);
            break;
        }
        // Σ w e^{−κs} is convex and decreasing, so Newton from the left is monotone
        double s = 0.0;
        for (int it = 0; it < 200; ++it) {
            const RVector terms = (w.array() * (-kappa.array() * s).exp()).matrix();
            const double f = terms.sum() - r;
            const double fp = -(terms.array() * kappa.array()).sum();
            if (fp >= 0.0) break;
            const double step = -f / fp;
            s += step;
            if (std::abs(step) <= 1e-15 * std::max(s, 1e-300) || f <= 0.0) break;
        }
        s = std::clamp(s, 0.0, remaining);
        for (int k = 0; k < dim_; ++k) psi(k) *= std::exp(Complex(0.0, -1.0) * heff_diag_(k) * s);
        psi.normalize();
        t += s;
        const int c = choose_channel(psi, rng);
        psi = jump_ops_[c] * psi;
        psi.normalize();
        if (rec) rec->events.push_back({t, c, channels_[c].label});
    }
    return JointState(std::move(psi), fock_dim_);
}

JointState OpenSystem::trajectory_rk4(const JointState& psi0, double T, CounterRng& rng, JumpRecord* rec,
                                      const EvolveOptions& opts, double t_start) const {
    const double dt = opts.dt > 0.0 ? opts.dt : auto_step(T);
    const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    const double h = T / steps;
    CVector psi = psi0.amplitudes();
    psi.normalize();
    double r = rng.uniform_pos();
    for (int s = 0; s < steps; ++s) {
        const double t = t_start + s * h;
        const CVector k1 = heff_apply(psi, t, true);
        const CVector k2 = heff_apply(psi + (0.5 * h) * k1, t + 0.5 * h, true);
        const CVector k3 = heff_apply(psi + (0.5 * h) * k2, t + 0.5 * h, true);
        const CVector k4 = heff_apply(psi + h * k3, t + h, true);
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (psi.squaredNorm() < r) {
            psi.normalize();
            const int c = choose_channel(psi, rng);
            psi = jump_ops_[c] * psi;
            psi.normalize();
            if (rec) rec->events.push_back({(s + 1) * h, c, channels_[c].label});
            r = rng.uniform_pos();
        }
    }
    const double n = psi.norm();
    if (!(n > 0.0)) throw NumericError("trajectory: state norm vanished");
    psi /= n;
    return JointState(std::move(psi), fock_dim_);
}

JointState OpenSystem::evolve_unitary(const JointState& psi0, double T, const EvolveOptions& opts,
                                      double t_start) const {
    if (psi0.dim() != dim_) throw DimensionMismatch("evolve_unitary: state dimension mismatch");
    CVector psi = psi0.amplitudes();
    if (T == 0.0) return JointState(std::move(psi), fock_dim_);
    if (!h_.periodic && is_diagonal(h_.static_part)) {
        for (int k = 0; k < dim_; ++k) psi(k) *= std::exp(Complex(0.0, -T) * h_.static_part(k, k));
        return JointState(std::move(psi), fock_dim_);
    }
    const double n0 = psi.norm();
    const double dt = opts.dt > 0.0 ? opts.dt : auto_step(T);
    const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    const double h = T / steps;
    for (int s = 0; s < steps; ++s) {
        const double t = t_start + s * h;
        const CVector k1 = heff_apply(psi, t, false);
        const CVector k2 = heff_apply(psi + (0.5 * h) * k1, t + 0.5 * h, false);
        const CVector k3 = heff_apply(psi + (0.5 * h) * k2, t + 0.5 * h, false);
        const CVector k4 = heff_apply(psi + h * k3, t + h, false);
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double n1 = psi.norm();
    if (std::abs(n1 - n0) > 1e-6 * std::max(n0, 1e-300))
        throw NumericError("evolve_unitary: norm drift, reduce the step size");
    psi *= n0 / n1;
    return JointState(std::move(psi), fock_dim_);
}

JointDensity evolve_master(const JointDensity& rho0, const HamiltonianSpec& h,
                           const std::vector<CollapseChannel>& channels, double T, const EvolveOptions& opts) {
    return OpenSystem(h, channels).evolve_master(rho0, T, opts);
}

JointState run_trajectory(const JointState& psi0, const HamiltonianSpec& h,
                          const std::vector<CollapseChannel>& channels, double T, const EvolveOptions& opts,
                          JumpRecord* record) {
    CounterRng rng(opts.seed, opts.stream);
    return OpenSystem(h, channels).run_trajectory(psi0, T, rng, record, opts);
}

JointState evolve_with_injected_error(const JointState& psi0, const HamiltonianSpec& h, double T,
                                      const InjectedError& injected, const EvolveOptions& opts) {
    if (!(injected.fraction >= 0.0 && injected.fraction <= 1.0))
        throw std::invalid_argument("injected error time outside the segment");
    const OpenSystem sys(h, {});
    const double t1 = injected.fraction * T;
    JointState mid = sys.evolve_unitary(psi0, t1, opts, 0.0);
    const CMatrix L = joint_op(injected.ancilla, identity_op(h.fock_dim));
    CVector jumped = L * mid.amplitudes();
    const double n = jumped.norm();
    if (!(n > 1e-12)) throw NumericError("injected error annihilates the state");
    jumped /= n;
    return sys.evolve_unitary(JointState(std::move(jumped), h.fock_dim), T - t1, opts, t1);
}

// ---------------------------------------------------------------- Fock sector

FockBlocks fock_blocks(const JointDensity& rho) {
    const int D = rho.fock_dim();
    FockBlocks out(D, CMatrix(kAncillaLevels, kAncillaLevels));
    for (int n = 0; n < D; ++n)
        for (int a = 0; a < kAncillaLevels; ++a)
            for (int b = 0; b < kAncillaLevels; ++b) out[n](a, b) = rho.matrix()(a * D + n, b * D + n);
    return out;
}

FockSectorSystem::FockSectorSystem(const HamiltonianSpec& h, const std::vector<CollapseChannel>& channels)
    : fock_dim_(h.fock_dim) {
    const int D = fock_dim_;
    const CMatrix& H = h.static_part;
    if (h.periodic) throw std::invalid_argument("FockSectorSystem: periodic drive not supported");
    const double scale = std::max(H.cwiseAbs().maxCoeff(), 1.0);
    CMatrix off = H;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("FockSectorSystem: Hamiltonian must be diagonal");

    generator_.assign(D, CMatrix::Zero(kAncillaLevels, kAncillaLevels));
    for (int n = 0; n < D; ++n)
        for (int a = 0; a < kAncillaLevels; ++a)
            for (int b = 0; b < kAncillaLevels; ++b)
                generator_[n](a, b) = Complex(0.0, -1.0) * (H(a * D + n, a * D + n).real() - H(b * D + n, b * D + n).real());

    for (const auto& ch : channels) {
        if (ch.rate <= 0.0) continue;
        if (ch.cavity.rows() != D || ch.cavity.cols() != D)
            throw DimensionMismatch("FockSectorSystem: channel dimension mismatch");
        Term t;
        t.ancilla = std::sqrt(ch.rate) * ch.ancilla;
        t.weight = RVector::Zero(D);
        bool have_shift = false;
        for (int m = 0; m < D; ++m)
            for (int n = 0; n < D; ++n) {
                if (ch.cavity(m, n) == Complex(0.0)) continue;
                if (!have_shift) {
                    t.shift = n - m;
                    have_shift = true;
                } else if (n - m != t.shift) {
                    throw std::invalid_argument("FockSectorSystem: channel '" + ch.label + "' mixes photon numbers");
                }
                t.weight(n) = std::norm(ch.cavity(m, n));
            }
        if (!have_shift) continue;
        const CMatrix ada = t.ancilla.adjoint() * t.ancilla;
        CMatrix ada_off = ada;
        ada_off.diagonal().setZero();
        if (ada_off.cwiseAbs().maxCoeff() > 1e-12 * ada.cwiseAbs().maxCoeff())
            throw std::invalid_argument("FockSectorSystem: channel '" + ch.label + "' has non-diagonal A^dag A");
        for (int n = 0; n < D; ++n)
            for (int a = 0; a < kAncillaLevels; ++a)
                for (int b = 0; b < kAncillaLevels; ++b)
                    generator_[n](a, b) -= 0.5 * t.weight(n) * (ada(a, a).real() + ada(b, b).real());
        terms_.push_back(std::move(t));
    }

    for (const auto& t : terms_) {
        const double amax = t.ancilla.cwiseAbs2().maxCoeff();
        for (int n = 0; n < D; ++n) {
            const int target = n - t.shift;
            if (target < 0 || target >= D || t.weight(n) == 0.0) continue;
            mixing_rate_ = std::max(mixing_rate_, t.weight(n) * amax);
            for (int a = 0; a < kAncillaLevels; ++a)
                for (int b = 0; b < kAncillaLevels; ++b)
                    for (int a2 = 0; a2 < kAncillaLevels; ++a2)
                        for (int b2 = 0; b2 < kAncillaLevels; ++b2) {
                            if (t.ancilla(a2, a) == Complex(0.0) || t.ancilla(b2, b) == Complex(0.0)) continue;
                            const double w = std::abs(generator_[target](a2, b2).imag() - generator_[n](a, b).imag());
                            mixing_frequency_ = std::max(mixing_frequency_, w);
                        }
        }
    }
}

FockBlocks FockSectorSystem::apply_jumps(const FockBlocks& sigma) const {
    FockBlocks out(fock_dim_, CMatrix::Zero(kAncillaLevels, kAncillaLevels));
    for (const auto& t : terms_)
        for (int n = 0; n < fock_dim_; ++n) {
            const int target = n - t.shift;
            if (target < 0 || target >= fock_dim_ || t.weight(n) == 0.0) continue;
            out[target] += t.weight(n) * (t.ancilla * sigma[n] * t.ancilla.adjoint());
        }
    return out;
}

FockBlocks FockSectorSystem::evolve(const FockBlocks& sigma, double T, const EvolveOptions& opts) const {
    if (static_cast<int>(sigma.size()) != fock_dim_) throw DimensionMismatch("FockSectorSystem: block count");
    if (T < 0.0) throw std::invalid_argument("FockSectorSystem: negative duration");
    if (T == 0.0) return sigma;
    double dt = opts.dt;
    if (dt <= 0.0) {
        dt = T / 20.0;
        if (mixing_frequency_ > 0.0) dt = std::min(dt, 0.5 / mixing_frequency_);
        if (mixing_rate_ > 0.0) dt = std::min(dt, 0.05 / mixing_rate_);
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
    const double h = T / steps;
    std::vector<CMatrix> E(fock_dim_), E2(fock_dim_);
    for (int n = 0; n < fock_dim_; ++n) {
        E[n] = (generator_[n] * (0.5 * h)).array().exp().matrix();
        E2[n] = E[n].cwiseProduct(E[n]);
    }
    auto scale = [&](const std::vector<CMatrix>& f, const FockBlocks& x) {
        FockBlocks out(fock_dim_);
        for (int n = 0; n < fock_dim_; ++n) out[n] = f[n].cwiseProduct(x[n]);
        return out;
    };
    auto axpy = [&](const FockBlocks& x, double a, const FockBlocks& y) {
        FockBlocks out(fock_dim_);
        for (int n = 0; n < fock_dim_; ++n) out[n] = x[n] + a * y[n];
        return out;
    };
    FockBlocks y = sigma;
    for (int s = 0; s < steps; ++s) {
        const FockBlocks k1 = apply_jumps(y);
        const FockBlocks k2 = apply_jumps(scale(E, axpy(y, 0.5 * h, k1)));
        const FockBlocks k3 = apply_jumps(axpy(scale(E, y), 0.5 * h, k2));
        const FockBlocks k4 = apply_jumps(axpy(scale(E2, y), h, scale(E, k3)));
        for (int n = 0; n < fock_dim_; ++n)
            y[n] = E2[n].cwiseProduct(y[n]) +
                   (h / 6.0) * (E2[n].cwiseProduct(k1[n]) + 2.0 * E[n].cwiseProduct(k2[n] + k3[n]) + k4[n]);
    }
    return y;
}

RamseyResult ramsey_t2(const SystemParams& p, const DriveSpec& drive, const std::vector<double>& delays,
                       const EvolveOptions& opts, int fock_dim) {
    return ramsey_t2(p, drive, delays, collapse_channels(p, fock_dim, drive.mode != DriveMode::off), opts,
                     fock_dim);
}

RamseyResult ramsey_t2(const SystemParams& p, const DriveSpec& drive, const std::vector<double>& delays,
                       const std::vector<CollapseChannel>& channels, const EvolveOptions& opts, int fock_dim) {
    if (delays.size() < 3) throw std::invalid_argument("ramsey_t2: need at least three delays");
    const OpenSystem sys(build_hamiltonian(p, drive, fock_dim), channels);
    CVector cav = CVector::Zero(fock_dim);
    cav(0) = cav(1) = 1.0 / std::sqrt(2.0);
    JointDensity rho = JointDensity::from_state(JointState::product(Level::g, cav));

    RamseyResult res;
    std::vector<double> sorted = delays;
    std::sort(sorted.begin(), sorted.end());
    double t = 0.0;
    for (double d : sorted) {
        rho = sys.evolve_master(rho, d - t, opts);
        t = d;
        res.delays.push_back(d);
        res.coherence.push_back(std::abs(rho.cavity_density()(0, 1)));
    }

    // log-linear least squares: ln c = ln c0 − t/T2
    const std::size_t n = res.delays.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(res.coherence[i] > 0.0)) throw NumericError("ramsey_t2: coherence vanished");
        const double x = res.delays[i], y = std::log(res.coherence[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    double ss = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double model = std::exp(icpt + slope * res.delays[i]);
        ss += (model - res.coherence[i]) * (model - res.coherence[i]);
        norm += res.coherence[i] * res.coherence[i];
    }
    res.relative_residual = std::sqrt(ss / norm);
    const double rate = -slope;
    if (rate <= 1e-9 / std::max(sorted.back(), 1e-300)) {
        res.no_decay = true;
        res.t2 = std::numeric_limits<double>::infinity();
        return res;
    }
    if (res.relative_residual > 0.10) throw NumericError("ramsey_t2: exponential fit residual above 10%");
    res.t2 = 1.0 / rate;
    return res;
}

} // namespace ftparity
