#include "ftparity/analytics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ftparity;

namespace {

const double kAlpha = std::sqrt(2.0);

// even-cat photon distribution, summed to convergence
std::vector<double> cat_populations(double alpha) {
    const double a2 = alpha * alpha;
    std::vector<double> p;
    double term = std::exp(-a2);
    double norm = 0.0;
    for (int n = 0; n < 80; ++n) {
        p.push_back(n % 2 == 0 ? term : 0.0);
        norm += p.back();
        term *= a2 / (n + 1);
    }
    for (double& x : p) x /= norm;
    return p;
}

double floor_oracle(double alpha) {
    double s = 0.0;
    for (double x : cat_populations(alpha)) s += x * x;
    return s;
}

// overlap through the coherent-state expression, independent of cat_overlap
double overlap_oracle(double alpha, double theta) {
    const double a2 = alpha * alpha;
    const double N = 2.0 * (1.0 + std::exp(-2.0 * a2));
    const Complex z = std::polar(1.0, -theta);
    return 4.0 / (N * N) * std::norm(std::exp(-a2 * (1.0 + z)) + std::exp(-a2 * (1.0 - z)));
}

double simpson_infidelity(double dchi, double t0, double t1, double alpha) {
    const int n = 4000;
    const double h = (t1 - t0) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * overlap_oracle(alpha, 2.0 * std::numbers::pi * dchi * (t0 + i * h));
    }
    return 1.0 - s * h / 3.0 / (t1 - t0);
}

const ErrorEventSpec& row(const std::vector<ErrorEventSpec>& t, const std::string& stage, const std::string& label) {
    for (const auto& r : t)
        if (r.stage == stage && r.label == label) return r;
    throw std::runtime_error("missing row " + stage + " " + label);
}

} // namespace

TEST(ThermalDephasing, ZeroPopulation) { EXPECT_EQ(thermal_dephasing_rate(93e3, 1 / 25e-6, 0.0), 0.0); }

TEST(ThermalDephasing, Asymptotes) {
    const double gamma = 1 / 25e-6, n = 0.025;
    const double large = 20.0 * gamma / (2 * std::numbers::pi);
    EXPECT_NEAR(thermal_dephasing_rate(large, gamma, n) / (gamma * n), 1.0, 0.05);
    const double small = 0.05 * gamma / (2 * std::numbers::pi);
    const double xp = 2 * std::numbers::pi * small;
    EXPECT_NEAR(thermal_dephasing_rate(small, gamma, n) / (xp * xp * n / gamma), 1.0, 0.05);
    const double tenth = gamma / (2 * std::numbers::pi * 10);
    const double xt = 2 * std::numbers::pi * tenth;
    EXPECT_NEAR(thermal_dephasing_rate(tenth, gamma, n) / (xt * xt * n / gamma), 1.0, 0.05);
}

TEST(ThermalDephasing, DefaultShiftNearOneMillisecond) {
    const double r = thermal_dephasing_rate(-93e3, 1 / 25e-6, 0.025);
    EXPECT_NEAR(r, 1000.0, 50.0);
}

TEST(ThermalDephasing, EvenAndMonotone) {
    const double gamma = 1 / 25e-6;
    for (double chi : {1e3, 3e4, 2e5}) {
        EXPECT_NEAR(thermal_dephasing_rate(chi, gamma, 0.03), thermal_dephasing_rate(-chi, gamma, 0.03), 1e-9);
        double prev = 0.0;
        for (double n : {0.005, 0.01, 0.02, 0.05}) {
            const double r = thermal_dephasing_rate(chi, gamma, n);
            EXPECT_GT(r, prev);
            prev = r;
        }
    }
}

TEST(T2Model, FarDetunedBackground) {
    SystemParams p;
    const auto c = t2_model_curve(p, {1e12, -1e12});
    EXPECT_NEAR(c[0].t2, 0.7e-3, 0.05e-3);
    EXPECT_NEAR(c[1].t2, c[0].t2, 1e-9);
}

TEST(T2Model, PeakAtCancellation) {
    SystemParams p;
    const double d0 = cancellation_detuning(p, CancellationTarget::zero_chi_eg);
    const auto at = t2_model_curve(p, {d0}, 14e-3);
    EXPECT_NEAR(at[0].chi_eg, 0.0, 1e-6);
    EXPECT_NEAR(at[0].t2, 1.0 / (1.0 / (2 * 1.07e-3) + 1.0 / 14e-3), 1e-9);
    EXPECT_NEAR(at[0].t2, 1.9e-3, 0.05e-3);
    std::vector<double> sweep;
    for (int i = 0; i < 400; ++i) sweep.push_back(4e6 + i * 2.5e4);
    const auto curve = t2_model_curve(p, sweep, 14e-3);
    auto best = std::max_element(curve.begin(), curve.end(), [](auto& a, auto& b) { return a.t2 < b.t2; });
    EXPECT_NEAR(best->detuning, d0, 2.5e4);
    EXPECT_THROW(t2_model_curve(p, {0.0}), InvalidDrive);
}

TEST(T2Model, ResidualDephasingFormula) {
    SystemParams p;
    p.n_th = 0.0235;
    EXPECT_NEAR(residual_dephasing_time(p), 25e-6 / (2 * 0.0235 * 0.0235), 1e-12);
    EXPECT_NEAR(residual_dephasing_time(p), 22.6e-3, 0.05e-3);
}

TEST(KickInfidelity, ZeroShiftAndPointwise) {
    EXPECT_EQ(kick_infidelity(0.0, 0.0, 2e-6, kAlpha), 0.0);
    EXPECT_NEAR(kick_infidelity(93e3, 1.2e-6, 1.2e-6, kAlpha),
                1.0 - overlap_oracle(kAlpha, 2 * std::numbers::pi * 93e3 * 1.2e-6), 1e-14);
    EXPECT_THROW(kick_infidelity(1e3, 2.0, 1.0, kAlpha), std::invalid_argument);
}

TEST(KickInfidelity, QuadratureMatchesSimpson) {
    for (double dchi : {93e3, -143e3, 236e3})
        for (double t1 : {1.2e-6, 2.12e-6})
            EXPECT_NEAR(kick_infidelity(dchi, 0.0, t1, kAlpha), simpson_infidelity(dchi, 0.0, t1, kAlpha), 1e-6);
}

TEST(KickInfidelity, FullRotationIsDephasedFloor) {
    EXPECT_NEAR(kick_infidelity(143e3, 0.0, 1.0 / 143e3, kAlpha), 1.0 - floor_oracle(kAlpha), 1e-6);
    EXPECT_NEAR(dephasing_per_occurrence(143e3, 0.0, 1.0 / 143e3, kAlpha), 1.0, 1e-9);
}

TEST(DephasingPerOccurrence, TableRows) {
    EXPECT_NEAR(dephasing_per_occurrence(93e3, 0.0, 1.2e-6, kAlpha), 0.42, 0.03);
    EXPECT_NEAR(dephasing_per_occurrence(143e3, 0.0, 1.2e-6, kAlpha), 0.72, 0.03);
    EXPECT_NEAR(dephasing_per_occurrence(93e3, 0.0, 2.12e-6, kAlpha), 0.83, 0.03);
}

TEST(DephasingPerOccurrence, MapRelaxationSaturates) {
    // a 0.6π spread already exceeds the full-rotation infidelity
    const double f = simpson_infidelity(143e3, 0.0, 2.119e-6, kAlpha);
    EXPECT_GT(f, 1.0 - floor_oracle(kAlpha));
    EXPECT_EQ(dephasing_per_occurrence(143e3, 0.0, 2.119e-6, kAlpha), 1.0);
}

TEST(ErrorTable, OccurrenceProbabilities) {
    SystemParams p;
    const auto t = error_event_table(p, ProtocolKind::pi_gf);
    const double tm = 1.0 / (2 * 236e3);
    EXPECT_NEAR(row(t, "map", "f->e").probability, tm / (2 * 23e-6), 1e-15);
    EXPECT_NEAR(row(t, "map", "f->e").probability, 0.0477, 0.002);
    EXPECT_NEAR(row(t, "map", "f->e->g").probability, 0.0020, 0.002);
    EXPECT_NEAR(row(t, "map", "f->h").probability, 0.0038, 0.002);
    EXPECT_NEAR(row(t, "map", "g->e").probability, 0.0013, 0.002);
    EXPECT_NEAR(row(t, "readout", "g->e").probability, 0.0012, 0.002);
    EXPECT_NEAR(row(t, "readout", "e->g").probability, 0.0058, 0.002);
    EXPECT_NEAR(row(t, "readout", "e->g").probability, 0.12 * 1.2e-6 / 25e-6, 1e-15);
    EXPECT_NEAR(row(t, "readout", "f->e").probability, 0.0042, 0.002);
    EXPECT_EQ(row(t, "assignment", "g as e").probability, 0.0004);
    EXPECT_EQ(row(t, "assignment", "e as g").probability, 0.0001);
    EXPECT_EQ(row(t, "assignment", "e as f").probability, 0.0002);
    EXPECT_EQ(row(t, "assignment", "f as e").probability, 0.0001);
}

TEST(ErrorTable, FtRemovesMapRelaxation) {
    SystemParams p;
    const auto ft = error_event_table(p, ProtocolKind::pi_ft);
    EXPECT_EQ(row(ft, "map", "f->e").dephasing, 0.0);
    EXPECT_NEAR(total_dephasing_probability(ft), 0.0136, 0.0010);
    EXPECT_THROW(error_event_table(p, ProtocolKind::pi_ge), ConfigError);
}

TEST(ErrorTable, TotalsAreRowSums) {
    SystemParams p;
    for (auto k : {ProtocolKind::pi_gf, ProtocolKind::pi_ft}) {
        const auto t = error_event_table(p, k);
        double s = 0.0;
        for (const auto& r : t) s += r.probability * r.dephasing;
        EXPECT_NEAR(total_dephasing_probability(t), s, 1e-15);
    }
}

TEST(PhaseKick, NoEvents) {
    const auto c = phase_kick_monte_carlo({}, 10, 1000, kAlpha, 1);
    for (const auto& pt : c) EXPECT_NEAR(pt.fidelity, 1.0, 1e-12);
}

TEST(PhaseKick, FullDephasingFloor) {
    ErrorEventSpec e{"map", "x", 1.0, 93e3, 0.0, 1e-6, true, 1.0};
    const auto c = phase_kick_monte_carlo({e}, 5, 20000, kAlpha, 3);
    for (const auto& pt : c) EXPECT_NEAR(pt.fidelity, floor_oracle(kAlpha), 3.5 * pt.std_error);
}

TEST(PhaseKick, FirstOrderSingleEvent) {
    ErrorEventSpec e{"readout", "e->g", 0.01, 93e3, 0.0, 1.2e-6, false, 0.0};
    const int trials = 100000;
    const auto c = phase_kick_monte_carlo({e}, 1, trials, kAlpha, 9);
    const double expect = 1.0 - 0.01 * kick_infidelity(93e3, 0.0, 1.2e-6, kAlpha);
    EXPECT_NEAR(c[0].fidelity, expect, 3.0 * c[0].std_error + 1e-12);
}

TEST(PhaseKick, Reproducible) {
    SystemParams p;
    const auto t = error_event_table(p, ProtocolKind::pi_gf);
    const auto a = phase_kick_monte_carlo(t, 20, 1000, kAlpha, 42);
    const auto b = phase_kick_monte_carlo(t, 20, 1000, kAlpha, 42);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].fidelity, b[i].fidelity);
}

TEST(PhaseKick, FloorMatchesAsymptote) {
    SystemParams p;
    const auto t = error_event_table(p, ProtocolKind::pi_gf);
    const auto c = phase_kick_monte_carlo(t, 400, 4000, kAlpha, 5);
    EXPECT_NEAR(c.back().fidelity, floor_oracle(kAlpha), 4.0 * c.back().std_error + 0.01);
}

TEST(FitDecay, SyntheticRecovery) {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> noise(0.0, 0.005);
    DecayCurve c;
    for (int n = 1; n <= 80; ++n) c.push_back({n, 0.56 * std::exp(-n / 20.0) + 0.37 + noise(gen), 0.005});
    const auto f = fit_decay(c);
    EXPECT_TRUE(f.converged);
    EXPECT_NEAR(f.A, 0.56, 0.05 * 0.56);
    EXPECT_NEAR(f.N0, 20.0, 0.05 * 20.0);
    EXPECT_NEAR(f.c, 0.37, 0.05 * 0.37);
    EXPECT_FALSE(f.infinite_n0);
}

TEST(FitDecay, ConstantCurve) {
    DecayCurve c;
    for (int n = 1; n <= 10; ++n) c.push_back({n, 0.9, 0.0});
    const auto f = fit_decay(c);
    EXPECT_TRUE(f.infinite_n0);
    EXPECT_TRUE(std::isinf(f.N0));
    EXPECT_NEAR(f.c, 0.9, 1e-15);
}

TEST(FitDecay, RejectsShortCurves) {
    DecayCurve c{{1, 0.9, 0}, {2, 0.8, 0}, {3, 0.7, 0}};
    EXPECT_THROW(fit_decay(c), std::invalid_argument);
}

TEST(FitDecay, FixedOffset) {
    DecayCurve c;
    for (int n = 1; n <= 80; ++n) c.push_back({n, 0.56 * std::exp(-n / 150.0) + 0.37, 0.0});
    const auto f = fit_decay(c, 0.37);
    EXPECT_NEAR(f.N0, 150.0, 1e-4);
    EXPECT_NEAR(f.A, 0.56, 1e-6);
    EXPECT_EQ(f.c, 0.37);
}

TEST(FitDecay, DephasedFloorMatchesOracle) { EXPECT_NEAR(dephased_floor(kAlpha), floor_oracle(kAlpha), 1e-14); }
