#include "ftparity/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ftparity;

TEST(Chevron, ResonantRabiFrequency) {
    SystemParams p;
    std::vector<double> ts;
    for (int i = 0; i <= 400; ++i) ts.push_back(i * 2.5e-9);
    const auto tr = chevron_trace(p, 0.0, ts);
    // generalized Rabi frequency including the |e,1>-|h,0> dispersive offset χ_e
    const double omega = std::hypot(p.omega_sb, p.chi_e);
    const double contrast = p.omega_sb * p.omega_sb / (omega * omega);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double s = std::sin(std::numbers::pi * omega * ts[i]);
        EXPECT_NEAR(tr.p_h[i], contrast * s * s, 1e-6) << ts[i];
        EXPECT_NEAR(tr.p_e[i] + tr.p_h[i], 1.0, 1e-9);
    }
}

TEST(Chevron, DetunedContrastDrops) {
    SystemParams p;
    std::vector<double> ts;
    for (int i = 0; i <= 200; ++i) ts.push_back(i * 5e-9);
    const auto tr = chevron_trace(p, 4e6, ts);
    const double mx = *std::max_element(tr.p_h.begin(), tr.p_h.end());
    EXPECT_LT(mx, 0.3);
    EXPECT_GT(mx, 0.05);
}

TEST(StarkShift, MatchesDressedShiftFarDetuned) {
    SystemParams p;
    for (double d : {10e6, -10e6, 20e6})
        for (int n : {1, 2})
            EXPECT_NEAR(simulated_stark_shift(p, d, n) / induced_chi(p.omega_sb, d, n), 1.0, 0.1) << d << " " << n;
}

TEST(StarkShift, RejectsBadInput) {
    SystemParams p;
    EXPECT_THROW(simulated_stark_shift(p, 0.0, 1), InvalidDrive);
    EXPECT_THROW(simulated_stark_shift(p, 1e7, 0), std::invalid_argument);
}

TEST(ParityDecay, NoiselessIsFlat) {
    SystemParams p;
    p.kerr = 0.0;
    p.assignment_error = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    ProtocolOptions po;
    po.noise = false;
    po.fock_dim = 16;
    const ProtocolEngine eng(p, po);
    ParityDecayOptions o;
    o.n_max = 5;
    o.trials = 4;
    o.filter = decay_filter(p, ProtocolKind::pi_gf, o.alpha);
    const auto r = parity_decay(eng, ProtocolKind::pi_gf, o);
    ASSERT_EQ(r.curve.size(), 5u);
    for (const auto& pt : r.curve) {
        EXPECT_NEAR(pt.fidelity, 1.0, 1e-6);
        EXPECT_NEAR(pt.std_error, 0.0, 1e-9);
    }
    for (int k : r.kept) EXPECT_EQ(k, 4);
}

TEST(ParityDecay, ReproducibleAndDecaying) {
    SystemParams p;
    ProtocolOptions po;
    po.fock_dim = 16;
    const ProtocolEngine eng(p, po);
    ParityDecayOptions o;
    o.n_max = 12;
    o.trials = 60;
    o.seed = 5;
    o.filter = decay_filter(p, ProtocolKind::pi_ge, o.alpha);
    const auto a = parity_decay(eng, ProtocolKind::pi_ge, o);
    const auto b = parity_decay(eng, ProtocolKind::pi_ge, o);
    ASSERT_EQ(a.curve.size(), b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) EXPECT_EQ(a.curve[i].fidelity, b.curve[i].fidelity);
    EXPECT_LT(a.curve.back().fidelity, a.curve.front().fidelity);
    EXPECT_GT(a.curve.back().fidelity, dephased_floor(o.alpha) - 0.1);
}

TEST(DecayFilter, FlipProbability) {
    SystemParams p;
    const auto f = decay_filter(p, ProtocolKind::pi_gf, std::sqrt(2.0));
    EXPECT_EQ(f.strategy, FilterStrategy::posterior);
    const double t = 1.0 / (2 * 236e3) + 1.2e-6;
    EXPECT_NEAR(f.flip_probability, 1.0 - std::exp(-2.0 * t / 1.07e-3), 1e-15);
}
