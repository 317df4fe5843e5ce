#include "cli.hpp"

#include "ftparity/experiments.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace ftparity::cli {

namespace {

using Int = std::int64_t;

const double kAlpha = std::sqrt(2.0);

std::vector<ProtocolKind> protocols(const RunConfig& cfg, std::vector<ProtocolKind> all) {
    if (!cfg.protocol) return all;
    return {*cfg.protocol};
}

ProtocolOptions engine_options(const RunConfig& cfg, const std::vector<ProtocolKind>& used) {
    ProtocolOptions po;
    po.fock_dim = cfg.fock_dim;
    for (auto k : used)
        if (k == ProtocolKind::pi_ft && cfg.drive == DriveMode::off)
            throw ConfigError("the ft protocol needs --drive effective or time-dependent");
    po.ft_drive = cfg.drive == DriveMode::off ? DriveMode::effective : cfg.drive;
    return po;
}

std::vector<double> span(double lo, double hi, double step) {
    std::vector<double> v;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) v.push_back(lo + i * step);
    return v;
}

Cell b(bool x) { return Int{x ? 1 : 0}; }

// ------------------------------------------------------------ t2-sweep

Report t2_sweep(const RunConfig& cfg, const SystemParams& p) {
    if (cfg.drive == DriveMode::time_dependent)
        throw ConfigError("t2-sweep simulates Ramsey decay over milliseconds with the effective drive only");
    const double d0 = cancellation_detuning(p, CancellationTarget::zero_chi_eg);
    std::vector<double> dets = span(2e6, 20e6, 1e5);
    dets.push_back(d0);
    std::sort(dets.begin(), dets.end());

    Table model("model", {"detuning_hz", "chi_eg_hz", "t2_s"});
    double best = 0.0, best_det = 0.0;
    for (const auto& pt : t2_model_curve(p, dets)) {
        model.add({pt.detuning, pt.chi_eg, pt.t2});
        if (pt.t2 > best) {
            best = pt.t2;
            best_det = pt.detuning;
        }
    }
    const double background = t2_model_curve(p, {INFINITY})[0].t2;

    std::vector<double> delays;
    for (int i = 0; i <= 10; ++i) delays.push_back(i * 0.3e-3);
    Table sim("simulated", {"detuning_hz", "t2_s", "model_t2_s", "fit_residual"});
    const std::vector<double> points =
        cfg.drive == DriveMode::off ? std::vector<double>{} : std::vector<double>{3e6, 5e6, d0, 10e6, 15e6};
    const auto off = ramsey_t2(p, {}, delays);
    sim.add({0.0, off.t2, background, off.relative_residual});
    for (double d : points) {
        const auto r = ramsey_t2(p, {DriveMode::effective, d}, delays);
        sim.add({d, r.t2, t2_model_curve(p, {d})[0].t2, r.relative_residual});
    }

    Table summary("summary", {"no_drive_t2_s", "peak_t2_s", "peak_detuning_hz", "cancellation_detuning_hz",
                              "residual_dephasing_time_s"});
    summary.add({background, best, best_det, d0, residual_dephasing_time(p)});
    return {model, sim, summary};
}

// ------------------------------------------------------------ chevron

Report chevron(const RunConfig&, const SystemParams& p) {
    const std::vector<double> times = span(0.0, 2e-6, 2e-8);
    Table map("map", {"detuning_hz", "time_s", "p_e", "p_h"});
    for (double d : span(-5e6, 5e6, 2.5e5)) {
        const ChevronTrace tr = chevron_trace(p, d, times, 3);
        for (std::size_t i = 0; i < times.size(); ++i) map.add({d, times[i], tr.p_e[i], tr.p_h[i]});
    }
    return {map};
}

// ------------------------------------------------------------ stark-shift

Report stark_shift(const RunConfig&, const SystemParams& p) {
    Table vs_det("vs_detuning", {"detuning_hz", "first_order_hz", "exact_n1_hz", "simulated_n1_hz"});
    for (double d : span(-20e6, 20e6, 1e6)) {
        if (std::abs(d) < p.omega_sb) continue;
        vs_det.add({d, first_order_induced_chi(p.omega_sb, d), induced_chi(p.omega_sb, d, 1),
                    simulated_stark_shift(p, d, 1)});
    }
    const double dfe = cancellation_detuning(p, CancellationTarget::zero_chi_fe);
    Table vs_n("vs_photon", {"n", "detuning_hz", "first_order_hz", "exact_hz", "simulated_hz", "residual_chi_fe_hz"});
    for (int n = 1; n <= 6; ++n) {
        const double exact = induced_chi(p.omega_sb, dfe, n);
        vs_n.add({Int{n}, dfe, first_order_induced_chi(p.omega_sb, dfe), exact, simulated_stark_shift(p, dfe, n),
                  p.chi_f - (p.chi_e + exact)});
    }
    return {vs_det, vs_n};
}

// ------------------------------------------------------------ parity-once

CMatrix jump(Level to, Level from) {
    CMatrix m = CMatrix::Zero(kAncillaLevels, kAncillaLevels);
    m(index_of(to), index_of(from)) = 1.0;
    return m;
}

CMatrix phase_flip(Level l) {
    CMatrix m = CMatrix::Identity(kAncillaLevels, kAncillaLevels);
    m(index_of(l), index_of(l)) = -1.0;
    return m;
}

// Two noisy pi_gf checks, postselected on g both times.
std::pair<double, JointDensity> even_postcheck(const ProtocolEngine& gf, JointDensity rho) {
    double prob = 1.0;
    for (int i = 0; i < 2; ++i) {
        const auto br = gf.readout_branches(gf.parity_map(rho, ProtocolKind::pi_gf));
        const auto& pass = br[static_cast<int>(Outcome::g)];
        prob *= pass.probability;
        if (!(pass.probability > 0.0)) break;
        rho = pass.state;
    }
    return {prob, rho};
}

Report parity_once(const RunConfig& cfg, const SystemParams& p) {
    const auto used = protocols(cfg, {ProtocolKind::pi_ge, ProtocolKind::pi_gf, ProtocolKind::pi_ft});
    ProtocolOptions po = engine_options(cfg, used);
    const ProtocolEngine noisy(p, po);
    po.noise = false;
    const ProtocolEngine clean(p, po);
    const int D = cfg.fock_dim;
    const CVector cat = cat_state({Complex(kAlpha, 0.0), 1}, CavityBasis(D)).amplitudes;
    const JointState psi = JointState::product(Level::g, cat);
    const auto grid = square_grid(21, 2.5);

    Table injected("injected", {"protocol", "error", "outcome", "probability", "event_class", "fidelity",
                                "aligned_fidelity", "theta"});
    Table wigner("wigner", {"protocol", "error", "re", "im", "w"});
    Table branches("noisy", {"protocol", "outcome", "probability", "event_class", "aligned_fidelity", "theta",
                             "postcheck_probability", "postcheck_aligned_fidelity"});
    for (auto k : used) {
        const Level ex = k == ProtocolKind::pi_ge ? Level::e : Level::f;
        const Level down = k == ProtocolKind::pi_ge ? Level::g : Level::e;
        const std::vector<InjectedError> errors{{"none", CMatrix::Identity(kAncillaLevels, kAncillaLevels), 0.5},
                                                {"dephasing", phase_flip(ex), 0.5},
                                                {"relaxation", jump(down, ex), 0.5}};
        for (const auto& e : errors) {
            JointState out = clean.parity_map(psi, k, &e);
            out.normalize();
            // most likely ancilla level after an ideal readout
            int best = 0;
            for (int a = 1; a < kAncillaLevels; ++a)
                if (out.level_population(static_cast<Level>(a)) > out.level_population(static_cast<Level>(best)))
                    best = a;
            CVector c = out.cavity_block(static_cast<Level>(best));
            c.normalize();
            const CMatrix rho = c * c.adjoint();
            const Outcome o = static_cast<Outcome>(std::min(best, 2));
            const AlignedFidelity a = aligned_cat_fidelity(rho, kAlpha);
            injected.add({protocol_name(k), e.label, std::string(1, outcome_name(o)),
                          out.level_population(static_cast<Level>(best)), event_class_name(classify_event(o, k)),
                          state_fidelity(rho, cat), a.fidelity, a.theta});
            for (const auto& pt : wigner_scan(rho, grid).points)
                wigner.add({protocol_name(k), e.label, pt.beta.real(), pt.beta.imag(), pt.value});
        }
        const auto br = noisy.readout_branches(noisy.parity_map(JointDensity::from_state(psi), k));
        for (const auto& r : br) {
            if (!(r.probability > 0.0)) {
                branches.add({protocol_name(k), std::string(1, outcome_name(r.reported)), 0.0,
                              event_class_name(classify_event(r.reported, k)), NAN, NAN, NAN, NAN});
                continue;
            }
            const AlignedFidelity a = aligned_cat_fidelity(r.state.cavity_density(), kAlpha);
            const auto [pp, post] = even_postcheck(noisy, r.state);
            const double pf = pp > 0.0 ? aligned_cat_fidelity(post.cavity_density(), kAlpha).fidelity : NAN;
            branches.add({protocol_name(k), std::string(1, outcome_name(r.reported)), r.probability,
                          event_class_name(classify_event(r.reported, k)), a.fidelity, a.theta, pp, pf});
        }
    }
    return {injected, branches, wigner};
}

// ------------------------------------------------------------ parity-decay

void add_fit(Table& t, const std::string& label, const FitResult& f, const FitResult& g) {
    t.add({label, f.A, f.N0, f.c, b(f.converged), g.A, g.N0, g.c, b(g.converged)});
}

Report parity_decay_run(const RunConfig& cfg, const SystemParams& p) {
    const auto used = protocols(cfg, {ProtocolKind::pi_ge, ProtocolKind::pi_gf, ProtocolKind::pi_ft});
    const ProtocolEngine engine(p, engine_options(cfg, used));
    Table curve("curve", {"protocol", "N", "fidelity", "stderr", "kept", "theta"});
    Table fits("fit", {"protocol", "A", "N0", "c", "converged", "A_floor", "N0_floor", "c_floor", "converged_floor"});
    std::map<ProtocolKind, double> n0;
    for (auto k : used) {
        ParityDecayOptions o;
        o.n_max = cfg.n_max;
        o.trials = cfg.trajectories;
        o.seed = cfg.seed;
        o.alpha = kAlpha;
        o.filter = decay_filter(p, k, kAlpha);
        const ParityDecayResult r = parity_decay(engine, k, o);
        for (std::size_t i = 0; i < r.curve.size(); ++i) {
            const auto& pt = r.curve[i];
            curve.add({protocol_name(k), Int{pt.n}, pt.fidelity, pt.std_error, Int{r.kept[pt.n - 1]}, r.theta[i]});
        }
        add_fit(fits, protocol_name(k), r.fit, r.floor_fit);
        n0[k] = r.floor_fit.N0;
    }
    Table ratios("ratios", {"numerator", "denominator", "n0_ratio_floor"});
    for (auto [num, den] : {std::pair{ProtocolKind::pi_gf, ProtocolKind::pi_ge},
                            std::pair{ProtocolKind::pi_ft, ProtocolKind::pi_ge},
                            std::pair{ProtocolKind::pi_ft, ProtocolKind::pi_gf}})
        if (n0.count(num) && n0.count(den)) ratios.add({protocol_name(num), protocol_name(den), n0[num] / n0[den]});
    return {curve, fits, ratios};
}

// ------------------------------------------------------------ error-budget

Report error_budget(const RunConfig& cfg, const SystemParams& p) {
    const auto used = protocols(cfg, {ProtocolKind::pi_gf, ProtocolKind::pi_ft});
    if (cfg.trajectories < 1000) throw ConfigError("error-budget needs --trajectories >= 1000");
    Table events("events", {"protocol", "stage", "label", "probability", "delta_chi_hz", "t0_s", "t1_s",
                            "dephasing"});
    Table totals("totals", {"protocol", "total_dephasing_probability"});
    Table curve("curve", {"protocol", "N", "fidelity", "stderr"});
    Table fits("fit", {"protocol", "A", "N0", "c", "converged", "A_floor", "N0_floor", "c_floor", "converged_floor"});
    for (auto k : used) {
        const auto table = error_event_table(p, k);
        for (const auto& e : table)
            events.add({protocol_name(k), e.stage, e.label, e.probability, e.delta_chi, e.t0, e.t1, e.dephasing});
        totals.add({protocol_name(k), total_dephasing_probability(table)});
        const DecayCurve c = phase_kick_monte_carlo(table, cfg.n_max, cfg.trajectories, kAlpha, cfg.seed);
        for (const auto& pt : c) curve.add({protocol_name(k), Int{pt.n}, pt.fidelity, pt.std_error});
        if (c.size() >= 5) add_fit(fits, protocol_name(k), fit_decay(c), fit_decay(c, dephased_floor(kAlpha)));
    }
    return {events, totals, curve, fits};
}

// ------------------------------------------------------------ prep-cat

Report prep_cat(const RunConfig& cfg, const SystemParams& p) {
    const ProtocolEngine engine(p, engine_options(cfg, {ProtocolKind::pi_gf}));
    CounterRng rng(cfg.seed, 0);
    const PrepareResult r = prepare_cat(engine, kAlpha, rng);
    Table rounds("rounds", {"round", "pass_probability", "cumulative_success"});
    double cum = 1.0;
    for (std::size_t i = 0; i < r.round_pass.size(); ++i) {
        cum *= r.round_pass[i];
        rounds.add({Int(i + 1), r.round_pass[i], cum});
    }
    Int successes = 0;
    for (int t = 0; t < cfg.trajectories; ++t) {
        CounterRng s(cfg.seed, static_cast<std::uint64_t>(t) + 1);
        successes += s.uniform() < r.success_rate;
    }
    const CMatrix cav = r.state.cavity_density();
    Table summary("summary", {"alpha", "success_rate", "parity", "attempts", "successes", "sampled_rate",
                              "aligned_fidelity", "mean_photon_number"});
    const double nbar = (cav.diagonal().real().array() * number_op(cfg.fock_dim).diagonal().real().array()).sum();
    summary.add({kAlpha, r.success_rate, r.parity, Int{cfg.trajectories}, successes,
                 static_cast<double>(successes) / cfg.trajectories, aligned_cat_fidelity(cav, kAlpha).fidelity, nbar});
    return {rounds, summary};
}

// ------------------------------------------------------------ wigner

Report wigner_run(const RunConfig& cfg, const SystemParams& p) {
    const ProtocolEngine engine(p, engine_options(cfg, {ProtocolKind::pi_gf}));
    CounterRng rng(cfg.seed, 0);
    const PrepareResult prep = prepare_cat(engine, kAlpha, rng);
    const CMatrix cav = prep.state.cavity_density();
    const auto betas = square_grid(21, 2.5);
    const WignerGrid exact = wigner_scan(cav, betas);

    TomographyOptions to;
    to.protocol.ft_drive = engine.options().ft_drive;
    const TomographySimulator sim(p, to);
    CounterRng shots_rng(cfg.seed, 1);
    const WignerGrid measured = normalize_grid(sim.scan(cav, betas, cfg.trajectories, shots_rng), sim.vacuum_contrast());
    const int dim = std::min(cfg.fock_dim, 16);
    const ReconstructionResult rec = mle_reconstruct(measured, dim);
    if (!rec.converged) throw NumericError("wigner: reconstruction did not converge");
    const AlignedFidelity a = aligned_cat_fidelity(rec.rho, kAlpha);

    Table grid("grid", {"re", "im", "w_exact", "w_measured"});
    for (std::size_t i = 0; i < betas.size(); ++i)
        grid.add({betas[i].real(), betas[i].imag(), exact.points[i].value, measured.points[i].value});
    Table summary("summary", {"shots", "vacuum_contrast", "prepared_aligned_fidelity", "reconstruction_dim",
                              "mle_aligned_fidelity", "mle_theta", "mle_iterations", "mle_residual",
                              "rank_deficient", "truncation_warning"});
    summary.add({Int{cfg.trajectories}, sim.vacuum_contrast(), aligned_cat_fidelity(cav, kAlpha).fidelity, Int{dim},
                 a.fidelity, a.theta, Int{rec.iterations}, rec.residual, b(rec.rank_deficient),
                 b(measured.truncation_warning || exact.truncation_warning)});
    return {grid, summary};
}

} // namespace

Report run_experiment(const RunConfig& cfg, const SystemParams& p) {
    static const std::map<std::string, std::function<Report(const RunConfig&, const SystemParams&)>> table{
        {"t2-sweep", t2_sweep},         {"chevron", chevron},          {"stark-shift", stark_shift},
        {"parity-once", parity_once},   {"parity-decay", parity_decay_run}, {"error-budget", error_budget},
        {"prep-cat", prep_cat},         {"wigner", wigner_run}};
    const auto it = table.find(cfg.experiment);
    if (it == table.end()) throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    return it->second(cfg, p);
}

} // namespace ftparity::cli
