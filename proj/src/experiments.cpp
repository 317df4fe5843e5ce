#include "ftparity/experiments.hpp"

#include <algorithm>
#include <cmath>

namespace ftparity {

ChevronTrace chevron_trace(const SystemParams& p, double detuning, const std::vector<double>& times, int fock_dim) {
    if (fock_dim < 3) throw ConfigError("chevron_trace: fock_dim must be >= 3");
    const OpenSystem sys(build_hamiltonian(p, {DriveMode::time_dependent, detuning}, fock_dim), {});
    CVector cav = CVector::Zero(fock_dim);
    cav(1) = 1.0;
    JointState psi = JointState::product(Level::e, cav);
    ChevronTrace out;
    double t = 0.0;
    for (double ti : times) {
        if (ti < t) throw std::invalid_argument("chevron_trace: times must be sorted and nonnegative");
        psi = sys.evolve_unitary(psi, ti - t, {}, t);
        t = ti;
        out.times.push_back(ti);
        out.p_e.push_back(psi.level_population(Level::e));
        out.p_h.push_back(psi.level_population(Level::h));
    }
    return out;
}

double simulated_stark_shift(const SystemParams& p, double detuning, int n, int periods) {
    if (n < 1) throw std::invalid_argument("simulated_stark_shift: n must be >= 1");
    if (detuning == 0.0) throw InvalidDrive("simulated_stark_shift: zero detuning");
    if (periods < 4) throw std::invalid_argument("simulated_stark_shift: need at least 4 periods");
    const int D = n + 3;
    const OpenSystem sys(build_hamiltonian(p, {DriveMode::time_dependent, detuning}, D), {});
    CVector cav = CVector::Zero(D);
    cav(n) = 1.0;
    JointState psi = JointState::product(Level::e, cav);
    const int idx = index_of(Level::e) * D + n;
    const double period = 1.0 / std::abs(detuning);

    // unwrapped phase sampled once per drive period, then a straight-line fit
    std::vector<double> ts{0.0}, phase{0.0};
    double last = 0.0;
    for (int k = 1; k <= periods; ++k) {
        psi = sys.evolve_unitary(psi, period, {}, (k - 1) * period);
        double ph = std::arg(psi.amplitudes()(idx));
        ph += kTwoPi * std::round((last - ph) / kTwoPi);
        last = ph;
        ts.push_back(k * period);
        phase.push_back(ph);
    }
    const double m = static_cast<double>(ts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sx += ts[i];
        sy += phase[i];
        sxx += ts[i] * ts[i];
        sxy += ts[i] * phase[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double energy = -slope / kTwoPi;
    const double bare = p.chi_e * n + 0.5 * p.kerr * n * (n - 1.0);
    return (energy - bare) / n;
}

FilterConfig decay_filter(const SystemParams& p, ProtocolKind k, double alpha) {
    FilterConfig f;
    f.strategy = FilterStrategy::posterior;
    f.flip_probability = cycle_flip_probability(p, k, alpha * alpha);
    return f;
}

ParityDecayResult parity_decay(const ProtocolEngine& engine, ProtocolKind k, const ParityDecayOptions& o) {
    if (o.n_max < 1) throw ConfigError("parity_decay: n_max must be >= 1");
    if (o.trials < 2) throw ConfigError("parity_decay: need at least two trials");
    const int D = engine.fock_dim();
    const CVector cat = cat_state({Complex(o.alpha, 0.0), 1}, CavityBasis(D)).amplitudes;
    const JointState psi0 = JointState::product(Level::g, cat);

    std::vector<std::vector<CVector>> kept_states(o.n_max);
    RepeatedParityConfig cfg;
    cfg.protocol = k;
    cfg.n_max = o.n_max;
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.filter = o.filter;
    repeated_parity(engine, psi0, cfg, [&](int, int n, const JointState& s, bool keep) {
        if (!keep) return;
        CVector c = s.cavity_block(Level::g);
        c.normalize();
        kept_states[n - 1].push_back(std::move(c));
    });

    ParityDecayResult res;
    for (int n = 1; n <= o.n_max; ++n) {
        const auto& states = kept_states[n - 1];
        res.kept.push_back(static_cast<int>(states.size()));
        if (states.size() < 2) continue;
        CMatrix rho = CMatrix::Zero(D, D);
        for (const auto& c : states) rho += c * c.adjoint();
        rho /= static_cast<double>(states.size());
        const AlignedFidelity a = aligned_cat_fidelity(rho, o.alpha);
        CVector target(D);
        for (int m = 0; m < D; ++m) target(m) = cat(m) * std::polar(1.0, -a.theta * m);
        double s = 0.0, s2 = 0.0;
        for (const auto& c : states) {
            const double f = std::norm(target.dot(c));
            s += f;
            s2 += f * f;
        }
        const double cnt = static_cast<double>(states.size());
        const double mean = s / cnt;
        const double var = std::max(0.0, (s2 - cnt * mean * mean) / (cnt - 1.0));
        res.curve.push_back({n, a.fidelity, std::sqrt(var / cnt)});
        res.theta.push_back(a.theta);
    }
    if (res.curve.size() >= 5) {
        res.fit = fit_decay(res.curve);
        res.floor_fit = fit_decay(res.curve, dephased_floor(o.alpha));
    }
    return res;
}

} // namespace ftparity
