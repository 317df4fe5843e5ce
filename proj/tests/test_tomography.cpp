#include "ftparity/tomography.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace ftparity;

namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

CMatrix pure(const CVector& v) { return v * v.adjoint(); }

CVector cat(int D, Complex alpha = Complex(std::sqrt(2.0), 0.0)) {
    return cat_state({alpha, 1}, CavityBasis(D)).amplitudes;
}

// even cat Wigner function in closed form
double cat_wigner(Complex alpha, Complex beta) {
    const double n2 = 1.0 / (2.0 * (1.0 + std::exp(-2.0 * std::norm(alpha))));
    return kTwoOverPi * n2 *
           (std::exp(-2.0 * std::norm(beta - alpha)) + std::exp(-2.0 * std::norm(beta + alpha)) +
            2.0 * std::exp(-2.0 * std::norm(beta)) * std::cos(4.0 * std::imag(std::conj(alpha) * beta)));
}

SystemParams ideal_readout() {
    SystemParams p;
    p.assignment_error = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    return p;
}

CMatrix random_rank2(int dim, std::mt19937_64& gen) {
    std::normal_distribution<double> n01;
    CMatrix rho = CMatrix::Zero(dim, dim);
    const double w[2] = {0.7, 0.3};
    for (double wk : w) {
        CVector v(dim);
        for (int i = 0; i < dim; ++i) v(i) = Complex(n01(gen), n01(gen));
        v.normalize();
        rho += wk * pure(v);
    }
    return rho;
}

double fidelity_pure(const CMatrix& rho, const CVector& psi) { return state_fidelity(rho, psi); }

} // namespace

TEST(Wigner, VacuumOrigin) {
    CMatrix rho = CMatrix::Zero(8, 8);
    rho(0, 0) = 1.0;
    const auto g = wigner_scan(rho, {Complex(0.0)});
    EXPECT_NEAR(g.points[0].value, kTwoOverPi, 1e-15);
    EXPECT_EQ(g.points[0].shots, 0);
    EXPECT_FALSE(g.truncation_warning);
}

TEST(Wigner, CatFringesMatchClosedForm) {
    const Complex alpha(std::sqrt(2.0), 0.0);
    const CMatrix rho = pure(cat(20));
    std::vector<Complex> betas;
    for (int i = -8; i <= 8; ++i) betas.emplace_back(0.0, 0.15 * i);
    betas.emplace_back(1.2, 0.3);
    betas.emplace_back(-0.7, -1.1);
    const auto g = wigner_scan(rho, betas);
    for (const auto& pt : g.points) EXPECT_NEAR(pt.value, cat_wigner(alpha, pt.beta), 1e-7) << pt.beta;
    // the interference term, stripped of its Gaussian envelope, has period π/(2α)
    const double period = std::numbers::pi / (2.0 * alpha.real());
    const double n2 = 1.0 / (2.0 * (1.0 + std::exp(-4.0)));
    auto fringe = [&](double y) {
        const Complex b(0.0, y);
        const double lobes = kTwoOverPi * n2 * (std::exp(-2.0 * std::norm(b - alpha)) + std::exp(-2.0 * std::norm(b + alpha)));
        return (wigner_point(rho, b) - lobes) * std::exp(2.0 * y * y);
    };
    for (double y : {0.0, 0.1, 0.37})
        EXPECT_NEAR(fringe(y + period), fringe(y), 1e-6) << y;
    EXPECT_NEAR(fringe(period / 2), -fringe(0.0), 1e-6);
}

TEST(Wigner, IntegratesToTrace) {
    const CMatrix rho = pure(cat(20));
    const int n = 81;
    const double L = 4.0, h = 2 * L / (n - 1);
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sum += wigner_point(rho, Complex(-L + i * h, -L + j * h));
    EXPECT_NEAR(sum * h * h, 1.0, 0.02);
}

TEST(Wigner, TruncationWarning) {
    CMatrix rho = CMatrix::Zero(8, 8);
    rho(0, 0) = 1.0;
    EXPECT_TRUE(wigner_scan(rho, {Complex(3.0, 0.0)}).truncation_warning);
}

TEST(Tomography, NoiselessMatchesDirectScan) {
    TomographyOptions o;
    o.noise = false;
    o.extended_dim = 40;
    const TomographySimulator sim(ideal_readout(), o);
    const CMatrix rho = pure(cat(16));
    const auto betas = square_grid(7, 2.0);
    CounterRng rng(5, 0);
    const auto exact = sim.scan(rho, betas, 0, rng);
    const auto direct = wigner_scan(rho, betas);
    for (std::size_t i = 0; i < betas.size(); ++i)
        EXPECT_NEAR(exact.points[i].value, direct.points[i].value, 1e-6);
    const int shots = 2000;
    const auto sampled = sim.scan(rho, betas, shots, rng);
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const double p = std::clamp((direct.points[i].value / kTwoOverPi + 1.0) / 2.0, 0.0, 1.0);
        const double sd = 2.0 * kTwoOverPi * std::sqrt(p * (1 - p) / shots);
        EXPECT_NEAR(sampled.points[i].value, direct.points[i].value, 4.0 * sd + 1e-12);
        EXPECT_EQ(sampled.points[i].shots, shots);
    }
}

TEST(Tomography, VacuumContrastAtDefaults) {
    const TomographySimulator sim(SystemParams{});
    EXPECT_NEAR(sim.vacuum_contrast(), 0.735, 0.05);
    CMatrix vac = CMatrix::Zero(4, 4);
    vac(0, 0) = 1.0;
    EXPECT_NEAR(sim.expected_value(vac, 0.0), kTwoOverPi * sim.vacuum_contrast(), 1e-12);
}

TEST(Mle, ExactCatGrid) {
    const CVector c = cat(16);
    const auto grid = wigner_scan(pure(c), square_grid());
    const auto r = mle_reconstruct(grid, 16);
    EXPECT_GE(fidelity_pure(r.rho, c), 0.999);
    EXPECT_FALSE(r.rank_deficient);
    EXPECT_NEAR(r.rho.trace().real(), 1.0, 1e-9);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<CMatrix>(r.rho).eigenvalues().minCoeff(), -1e-9);
}

TEST(Mle, NormalizationInvariance) {
    const CVector c = cat(16);
    auto grid = wigner_scan(pure(c), square_grid(15, 2.5));
    const auto ref = mle_reconstruct(grid, 10);
    for (auto& pt : grid.points) pt.value *= 0.735;
    const auto again = mle_reconstruct(normalize_grid(grid, 0.735), 10);
    EXPECT_LT(trace_distance(ref.rho, again.rho), 1e-6);
}

TEST(Mle, RobustToNoise) {
    const CVector c = cat(16);
    auto grid = wigner_scan(pure(c), square_grid());
    ASSERT_EQ(grid.points.size(), 441u);
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (auto& pt : grid.points) pt.value *= 1.0 + noise(gen);
    const auto r = mle_reconstruct(grid, 16);
    EXPECT_GE(fidelity_pure(r.rho, c), 0.97);
}

TEST(Mle, IdempotentOnRandomRankTwo) {
    std::mt19937_64 gen(7);
    for (int dim : {4, 8, 12}) {
        const CMatrix truth = random_rank2(dim, gen);
        // the rank-2 target lives in Fock space, scaled to the grid's phase-space support
        const auto r = mle_reconstruct(wigner_scan(truth, square_grid(21, 3.0)), dim);
        const Eigen::SelfAdjointEigenSolver<CMatrix> es(truth);
        const CMatrix s = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal() *
                          es.eigenvectors().adjoint();
        const double fid = std::pow(Eigen::SelfAdjointEigenSolver<CMatrix>(s * r.rho * s)
                                        .eigenvalues()
                                        .cwiseMax(0.0)
                                        .cwiseSqrt()
                                        .sum(),
                                    2);
        EXPECT_GE(fid, 0.999) << dim;
    }
}

TEST(Mle, ResidualMonotone) {
    const auto grid = wigner_scan(pure(cat(16)), square_grid(15, 2.5));
    const auto r = mle_reconstruct(grid, 16);
    for (std::size_t i = 1; i < r.residual_history.size(); ++i)
        EXPECT_LE(r.residual_history[i], r.residual_history[i - 1] * (1 + 1e-12) + 1e-300);
    EXPECT_TRUE(r.converged);
}

TEST(Mle, FlagsRankDeficiency) {
    const auto grid = wigner_scan(pure(cat(16)), square_grid(5, 2.5));
    EXPECT_TRUE(mle_reconstruct(grid, 16).rank_deficient);
}

TEST(Alignment, EvenCat) {
    const auto a = aligned_cat_fidelity(pure(cat(16)), std::sqrt(2.0));
    EXPECT_NEAR(a.theta, 0.0, 1e-6);
    EXPECT_NEAR(a.fidelity, 1.0, 1e-12);
}

TEST(Alignment, RotatedCat) {
    for (double th0 : {0.4, 1.3, 2.9}) {
        const CMatrix rho = pure(cat(16, std::polar(std::sqrt(2.0), th0)));
        const auto a = aligned_cat_fidelity(rho, std::sqrt(2.0));
        const double expect = std::fmod(std::numbers::pi - std::fmod(th0, std::numbers::pi), std::numbers::pi);
        EXPECT_NEAR(a.theta, expect, 1e-6) << th0;
        EXPECT_NEAR(a.fidelity, 1.0, 1e-10);
        EXPECT_NEAR(rotated_cat_fidelity(rho, std::sqrt(2.0), a.theta), a.fidelity, 1e-12);
    }
}

TEST(Alignment, PhaseRandomizedFloor) {
    const CVector c = cat(16);
    const CMatrix rho = c.cwiseAbs2().cast<Complex>().asDiagonal();
    const double floor = c.cwiseAbs2().squaredNorm();
    for (double th : {0.0, 0.7, 2.0}) EXPECT_NEAR(rotated_cat_fidelity(rho, std::sqrt(2.0), th), floor, 1e-12);
    EXPECT_NEAR(aligned_cat_fidelity(rho, std::sqrt(2.0)).fidelity, floor, 1e-12);
    EXPECT_NEAR(floor, 0.37, 0.03);
}

TEST(Alignment, Invariances) {
    const CMatrix rho = pure(cat(16, std::polar(std::sqrt(2.0), 0.5))) * 0.6 + 0.4 * pure(cat(16));
    const auto a = aligned_cat_fidelity(rho, std::sqrt(2.0));
    const CVector rotated = cat(16, std::polar(std::sqrt(2.0), 0.5 + std::numbers::pi));
    const CMatrix rho_pi = pure(rotated) * 0.6 + 0.4 * pure(cat(16));
    EXPECT_NEAR(aligned_cat_fidelity(rho_pi, std::sqrt(2.0)).fidelity, a.fidelity, 1e-12);
    const CVector phased = cat(16, std::polar(std::sqrt(2.0), 0.5)) * std::polar(1.0, 0.8);
    const CMatrix rho_phase = pure(phased) * 0.6 + 0.4 * pure(cat(16));
    EXPECT_NEAR(aligned_cat_fidelity(rho_phase, std::sqrt(2.0)).fidelity, a.fidelity, 1e-12);
}
