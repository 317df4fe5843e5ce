#include "ftparity/tomography.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ftparity {

std::vector<Complex> square_grid(int n, double extent) {
    if (n < 1) throw std::invalid_argument("square_grid: n must be >= 1");
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double re = n == 1 ? 0.0 : -extent + 2.0 * extent * j / (n - 1);
            const double im = n == 1 ? 0.0 : -extent + 2.0 * extent * i / (n - 1);
            out.emplace_back(re, im);
        }
    return out;
}

WignerGrid wigner_scan(const CMatrix& rho, const std::vector<Complex>& betas) {
    if (rho.rows() != rho.cols()) throw DimensionMismatch("wigner_scan: rho must be square");
    const int dim = static_cast<int>(rho.rows());
    WignerGrid grid;
    grid.points.reserve(betas.size());
    for (const Complex& b : betas) {
        grid.points.push_back({b, wigner_point(rho, b), 0});
        if (std::norm(b) > dim) grid.truncation_warning = true;
    }
    return grid;
}

// ---------------------------------------------------------------- simulation

TomographySimulator::TomographySimulator(const SystemParams& p, TomographyOptions opts) : opts_(opts) {
    if (opts_.extended_dim < 2) throw ConfigError("extended_dim must be >= 2");
    ProtocolOptions po = opts_.protocol;
    po.noise = opts_.noise;
    po.fock_dim = opts_.extended_dim;
    const ProtocolEngine engine(p, po);
    response_ = engine.fock_response(ProtocolKind::pi_gf).col(static_cast<int>(Outcome::g));
}

RVector TomographySimulator::displaced_populations(const CMatrix& rho, Complex beta, double* leak) const {
    const int d = static_cast<int>(rho.rows());
    const CMatrix disp = displacement_elements(-beta, opts_.extended_dim, d);
    RVector pops = (disp * rho * disp.adjoint()).diagonal().real();
    if (leak) *leak = rho.trace().real() - pops.sum();
    return pops;
}

double TomographySimulator::expected_value(const CMatrix& rho, Complex beta) const {
    if (rho.rows() != rho.cols()) throw DimensionMismatch("tomography: rho must be square");
    const RVector pops = displaced_populations(rho, beta, nullptr);
    const double pg = pops.dot(response_) / rho.trace().real();
    return (2.0 / std::numbers::pi) * (2.0 * pg - 1.0);
}

WignerGrid TomographySimulator::scan(const CMatrix& rho, const std::vector<Complex>& betas, int shots,
                                     CounterRng& rng) const {
    if (rho.rows() != rho.cols()) throw DimensionMismatch("tomography: rho must be square");
    if (shots < 0) throw std::invalid_argument("tomography: shots must be >= 0");
    const double tr = rho.trace().real();
    WignerGrid grid;
    grid.points.reserve(betas.size());
    for (const Complex& b : betas) {
        double leak = 0.0;
        const RVector pops = displaced_populations(rho, b, &leak);
        if (leak > 1e-6 * tr) grid.truncation_warning = true;
        const double pg = std::clamp(pops.dot(response_) / tr, 0.0, 1.0);
        double mean;
        if (shots == 0) {
            mean = 2.0 * pg - 1.0;
        } else {
            int plus = 0;
            for (int s = 0; s < shots; ++s) plus += rng.uniform() < pg;
            mean = (2.0 * plus - shots) / shots;
        }
        grid.points.push_back({b, (2.0 / std::numbers::pi) * mean, shots});
    }
    return grid;
}

WignerGrid simulate_tomography(const JointDensity& rho, const std::vector<Complex>& betas, const SystemParams& p,
                               int shots, CounterRng& rng, const TomographyOptions& opts) {
    if (shots < 1) throw std::invalid_argument("simulate_tomography: shots must be >= 1");
    const TomographySimulator sim(p, opts);
    return sim.scan(rho.cavity_density(), betas, shots, rng);
}

WignerGrid normalize_grid(WignerGrid grid, double contrast) {
    if (!(contrast > 0.0)) throw NumericError("normalize_grid: non-positive contrast");
    for (auto& pt : grid.points) pt.value /= contrast;
    return grid;
}

// ---------------------------------------------------------------- MLE

namespace {

// Euclidean projection of a real vector onto the probability simplex.
RVector project_simplex(const RVector& v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) tau = t;
    }
    return (v.array() - tau).max(0.0);
}

CMatrix project_density(const CMatrix& m) {
    const CMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    const RVector lam = project_simplex(es.eigenvalues());
    return es.eigenvectors() * lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace

ReconstructionResult mle_reconstruct(const WignerGrid& grid, int dim, const MleOptions& opts) {
    if (dim < 1) throw std::invalid_argument("mle_reconstruct: dim must be >= 1");
    const int m = static_cast<int>(grid.points.size());
    if (m == 0) throw std::invalid_argument("mle_reconstruct: empty grid");
    const int d2 = dim * dim;

    // rows are vec(K_i)^H so that A vec(ρ) = Tr(K_i ρ)
    CMatrix A(m, d2);
    RVector w(m);
    for (int i = 0; i < m; ++i) {
        const CMatrix k = displaced_parity_kernel(grid.points[i].beta, dim);
        A.row(i) = Eigen::Map<const CVector>(k.data(), d2).adjoint();
        w(i) = grid.points[i].value;
    }

    ReconstructionResult res;
    Eigen::BDCSVD<CMatrix> svd(A);
    const RVector sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-10 * smax;
    res.rank_deficient = m < d2 || rank < d2;
    if (!(smax > 0.0)) throw NumericError("mle_reconstruct: grid carries no information");
    const double step = 1.0 / (2.0 * smax * smax);

    auto residual = [&](const CMatrix& rho) {
        const RVector pred = (A * Eigen::Map<const CVector>(rho.data(), d2)).real();
        return (pred - w).squaredNorm();
    };
    auto gradient = [&](const CMatrix& rho) {
        const RVector r = (A * Eigen::Map<const CVector>(rho.data(), d2)).real() - w;
        const CVector g = 2.0 * A.adjoint() * r.cast<Complex>();
        return CMatrix(Eigen::Map<const CMatrix>(g.data(), dim, dim));
    };

    CMatrix x = CMatrix::Identity(dim, dim) / static_cast<double>(dim);
    CMatrix y = x;
    double t = 1.0;
    double f = residual(x);
    res.residual_history.push_back(f);
    for (int it = 1; it <= opts.max_iterations; ++it) {
        CMatrix xn = project_density(y - step * gradient(y));
        double fn = residual(xn);
        if (fn > f) {
            // monotone safeguard: restart momentum from the last accepted iterate
            xn = project_density(x - step * gradient(x));
            fn = residual(xn);
            t = 1.0;
            if (fn > f) {
                // no descent left at working precision
                res.iterations = it;
                res.converged = true;
                break;
            }
        }
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = xn + ((t - 1.0) / tn) * (xn - x);
        t = tn;
        const double improvement = f - fn;
        x = std::move(xn);
        res.iterations = it;
        res.residual_history.push_back(fn);
        const bool small = improvement <= opts.tolerance * std::max(f, 1e-300);
        f = fn;
        if (small || f == 0.0) {
            res.converged = true;
            break;
        }
    }
    res.rho = hermitize_normalize(x);
    res.residual = residual(res.rho);
    return res;
}

// ---------------------------------------------------------------- alignment

double rotated_cat_fidelity(const CMatrix& rho, double alpha, double theta) {
    const int d = static_cast<int>(rho.rows());
    const CVector c = cat_state({Complex(alpha, 0.0), 1}, CavityBasis(d)).amplitudes;
    CVector v(d);
    for (int n = 0; n < d; ++n) v(n) = c(n) * std::polar(1.0, -theta * n);
    // <C| e^{iθn} ρ e^{−iθn} |C> = v^† ρ v with v = e^{−iθn}|C>
    return (v.adjoint() * rho * v)(0, 0).real();
}

AlignedFidelity aligned_cat_fidelity(const CMatrix& rho, double alpha) {
    if (rho.rows() != rho.cols()) throw DimensionMismatch("aligned_cat_fidelity: rho must be square");
    const int d = static_cast<int>(rho.rows());
    const CVector c = cat_state({Complex(alpha, 0.0), 1}, CavityBasis(d)).amplitudes;
    // F(θ) = Σ_mn c_m* c_n ρ_mn e^{iθ(m−n)}, collected by frequency m − n
    std::vector<Complex> coef(2 * d - 1, Complex(0.0));
    for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) coef[m - n + d - 1] += std::conj(c(m)) * c(n) * rho(m, n);
    auto F = [&](double th) {
        Complex s = 0.0;
        for (int k = 0; k < 2 * d - 1; ++k) s += coef[k] * std::polar(1.0, th * (k - d + 1));
        return s.real();
    };
    constexpr int kScan = 64;
    const double h = std::numbers::pi / kScan;
    int best = 0;
    double fbest = -1.0;
    for (int i = 0; i < kScan; ++i) {
        const double v = F(i * h);
        if (v > fbest) {
            fbest = v;
            best = i;
        }
    }
    // golden section on the bracket around the coarse maximum
    double a = (best - 1) * h, b = (best + 1) * h;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = F(x1), f2 = F(x2);
    while (b - a > 1e-12) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = F(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = F(x1);
        }
    }
    double th = 0.5 * (a + b);
    double fv = F(th);
    if (fbest > fv) {
        th = best * h;
        fv = fbest;
    }
    th = std::fmod(th, std::numbers::pi);
    if (th < 0.0) th += std::numbers::pi;
    if (std::numbers::pi - th < 1e-6) th = 0.0;
    return {th, fv};
}

} // namespace ftparity
