#include "ftparity/protocols.hpp"

#include <algorithm>
#include <cmath>

namespace ftparity {

const char* protocol_name(ProtocolKind k) noexcept {
    switch (k) {
    case ProtocolKind::pi_ge: return "ge";
    case ProtocolKind::pi_gf: return "gf";
    case ProtocolKind::pi_ft: return "ft";
    }
    return "?";
}

ProtocolKind parse_protocol(const std::string& s) {
    if (s == "ge" || s == "pi_ge") return ProtocolKind::pi_ge;
    if (s == "gf" || s == "pi_gf") return ProtocolKind::pi_gf;
    if (s == "ft" || s == "pi_ft") return ProtocolKind::pi_ft;
    throw ConfigError("unknown protocol '" + s + "'");
}

CMatrix rotation_unitary(RotationKind kind) {
    CMatrix u = CMatrix::Identity(kAncillaLevels, kAncillaLevels);
    const double r = 1.0 / std::sqrt(2.0);
    const int g = index_of(Level::g), e = index_of(Level::e), f = index_of(Level::f);
    switch (kind) {
    case RotationKind::ge_half:
        u(g, g) = r; u(g, e) = -r;
        u(e, g) = r; u(e, e) = r;
        break;
    case RotationKind::ge_half_inv:
        u(g, g) = r; u(g, e) = r;
        u(e, g) = -r; u(e, e) = r;
        break;
    case RotationKind::ef_full:
        u(e, e) = 0.0; u(e, f) = -1.0;
        u(f, e) = 1.0; u(f, f) = 0.0;
        break;
    }
    return u;
}

namespace {

// U ⊗ 1 applied blockwise
CVector apply_ancilla(const CMatrix& u, const CVector& v, int D) {
    CVector out = CVector::Zero(v.size());
    for (int i = 0; i < kAncillaLevels; ++i)
        for (int j = 0; j < kAncillaLevels; ++j)
            if (u(i, j) != Complex(0.0)) out.segment(i * D, D) += u(i, j) * v.segment(j * D, D);
    return out;
}

CMatrix apply_ancilla_left(const CMatrix& u, const CMatrix& m, int D) {
    CMatrix out = CMatrix::Zero(m.rows(), m.cols());
    for (int i = 0; i < kAncillaLevels; ++i)
        for (int j = 0; j < kAncillaLevels; ++j)
            if (u(i, j) != Complex(0.0)) out.middleRows(i * D, D) += u(i, j) * m.middleRows(j * D, D);
    return out;
}

CMatrix conjugate_ancilla(const CMatrix& u, const CMatrix& rho, int D) {
    const CMatrix left = apply_ancilla_left(u, rho, D);
    // (U ρ) U† = (U (U ρ)†)†
    return apply_ancilla_left(u, left.adjoint(), D).adjoint();
}

std::vector<RotationKind> opening_pulses(ProtocolKind k) {
    if (k == ProtocolKind::pi_ge) return {RotationKind::ge_half};
    return {RotationKind::ge_half, RotationKind::ef_full};
}

std::vector<RotationKind> closing_pulses(ProtocolKind k) {
    if (k == ProtocolKind::pi_ge) return {RotationKind::ge_half_inv};
    return {RotationKind::ef_full, RotationKind::ge_half};
}

} // namespace

JointState ancilla_rotation(RotationKind kind, const JointState& s) {
    return JointState(apply_ancilla(rotation_unitary(kind), s.amplitudes(), s.fock_dim()), s.fock_dim());
}

JointDensity ancilla_rotation(RotationKind kind, const JointDensity& r) {
    return JointDensity(conjugate_ancilla(rotation_unitary(kind), r.matrix(), r.fock_dim()), r.fock_dim());
}

char outcome_name(Outcome o) noexcept {
    switch (o) {
    case Outcome::g: return 'g';
    case Outcome::e: return 'e';
    case Outcome::f: return 'f';
    }
    return '?';
}

const char* event_class_name(EventClass c) noexcept {
    switch (c) {
    case EventClass::no_error: return "no_error";
    case EventClass::dephasing: return "dephasing";
    case EventClass::relaxation: return "relaxation";
    case EventClass::ambiguous: return "ambiguous";
    }
    return "?";
}

EventClass classify_event(Outcome o, ProtocolKind k) noexcept {
    if (k == ProtocolKind::pi_ge) return EventClass::ambiguous;
    switch (o) {
    case Outcome::g: return EventClass::no_error;
    case Outcome::e: return EventClass::dephasing;
    case Outcome::f: return EventClass::relaxation;
    }
    return EventClass::ambiguous;
}

double map_duration(const SystemParams& p, ProtocolKind k) {
    const double chi = (k == ProtocolKind::pi_ge) ? p.chi_eg0() : p.chi_fg0();
    if (chi == 0.0) throw ConfigError("map_duration: zero dispersive shift");
    return 1.0 / (2.0 * std::abs(chi));
}

// ---------------------------------------------------------------- engine

ProtocolEngine::ProtocolEngine(const SystemParams& p, ProtocolOptions opts) : params_(p), opts_(opts) {
    validate(params_);
    if (opts_.fock_dim < 2) throw ConfigError("fock_dim must be >= 2");
    if (opts_.ft_drive == DriveMode::off) throw InvalidDrive("pi_ft requires an active drive");
    if (!(opts_.drive_off > opts_.drive_on) || opts_.drive_on < 0.0)
        throw InvalidDrive("empty drive window");
    ft_detuning_ = std::isnan(opts_.ft_detuning) ? cancellation_detuning(params_, CancellationTarget::zero_chi_fe)
                                                 : opts_.ft_detuning;
    const int D = opts_.fock_dim;
    const HamiltonianSpec idle = build_hamiltonian(params_, {}, D);
    const DriveSpec drive{opts_.ft_drive, ft_detuning_};
    const bool ft_assert = opts_.ft_drive == DriveMode::effective && std::isnan(opts_.ft_detuning);
    const HamiltonianSpec ft = build_hamiltonian(params_, drive, D, ft_assert);
    idle_clean_ = std::make_unique<OpenSystem>(idle, std::vector<CollapseChannel>{});
    idle_noisy_ = std::make_unique<OpenSystem>(idle, collapse_channels(params_, D, false));
    ft_clean_ = std::make_unique<OpenSystem>(ft, std::vector<CollapseChannel>{});
    ft_noisy_ = std::make_unique<OpenSystem>(ft, collapse_channels(params_, D, true));
    const auto no_channels = std::vector<CollapseChannel>{};
    idle_sector_ = std::make_unique<FockSectorSystem>(idle, opts_.noise ? idle_noisy_->channels() : no_channels);
    readout_sector_ = std::make_unique<FockSectorSystem>(idle, idle_noisy_->channels());
    if (!ft.periodic)
        ft_sector_ = std::make_unique<FockSectorSystem>(ft, opts_.noise ? ft_noisy_->channels() : no_channels);
}

std::vector<ProtocolEngine::Segment> ProtocolEngine::wait_segments(ProtocolKind k, bool noisy) const {
    const double T = map_duration(k);
    const OpenSystem* idle = noisy ? idle_noisy_.get() : idle_clean_.get();
    if (k != ProtocolKind::pi_ft) return {{idle, T, 0.0}};
    const OpenSystem* driven = noisy ? ft_noisy_.get() : ft_clean_.get();
    const double on = std::min(opts_.drive_on, T);
    const double off = std::min(opts_.drive_off, T);
    std::vector<Segment> segs;
    if (on > 0.0) segs.push_back({idle, on, 0.0});
    if (off > on) segs.push_back({driven, off - on, 0.0});
    if (T > off) segs.push_back({idle, T - off, 0.0});
    return segs;
}

JointState ProtocolEngine::parity_map(const JointState& s, ProtocolKind k, const InjectedError* injected) const {
    if (s.fock_dim() != fock_dim()) throw DimensionMismatch("parity_map: fock dimension mismatch");
    JointState cur = s;
    for (auto r : opening_pulses(k)) cur = ancilla_rotation(r, cur);
    const double T = map_duration(k);
    const double t_inject = injected ? injected->fraction * T : -1.0;
    if (injected && !(injected->fraction >= 0.0 && injected->fraction <= 1.0))
        throw std::invalid_argument("injected error time outside the wait segment");
    double t = 0.0;
    bool done = !injected;
    auto jump = [&]() {
        CVector v = apply_ancilla(injected->ancilla, cur.amplitudes(), fock_dim());
        const double n = v.norm();
        if (!(n > 1e-12)) throw NumericError("injected error annihilates the state");
        cur = JointState(v / n, fock_dim());
        done = true;
    };
    for (const auto& seg : wait_segments(k, false)) {
        const double end = t + seg.duration;
        if (!done && t_inject <= end) {
            const double first = t_inject - t;
            cur = seg.system->evolve_unitary(cur, first, opts_.evolve, seg.t_start);
            jump();
            cur = seg.system->evolve_unitary(cur, seg.duration - first, opts_.evolve, seg.t_start + first);
        } else {
            cur = seg.system->evolve_unitary(cur, seg.duration, opts_.evolve, seg.t_start);
        }
        t = end;
    }
    if (!done) jump();
    for (auto r : closing_pulses(k)) cur = ancilla_rotation(r, cur);
    return cur;
}

JointDensity ProtocolEngine::parity_map(const JointDensity& rho, ProtocolKind k) const {
    if (rho.fock_dim() != fock_dim()) throw DimensionMismatch("parity_map: fock dimension mismatch");
    JointDensity cur = rho;
    for (auto r : opening_pulses(k)) cur = ancilla_rotation(r, cur);
    for (const auto& seg : wait_segments(k, opts_.noise))
        cur = seg.system->evolve_master(cur, seg.duration, opts_.evolve, seg.t_start);
    for (auto r : closing_pulses(k)) cur = ancilla_rotation(r, cur);
    return cur;
}

JointState ProtocolEngine::parity_map(const JointState& s, ProtocolKind k, CounterRng& rng,
                                      JumpRecord* record) const {
    if (s.fock_dim() != fock_dim()) throw DimensionMismatch("parity_map: fock dimension mismatch");
    JointState cur = s;
    for (auto r : opening_pulses(k)) cur = ancilla_rotation(r, cur);
    for (const auto& seg : wait_segments(k, opts_.noise))
        cur = seg.system->run_trajectory(cur, seg.duration, rng, record, opts_.evolve, seg.t_start);
    for (auto r : closing_pulses(k)) cur = ancilla_rotation(r, cur);
    return cur;
}

namespace {

int reported_index(int true_level) { return std::min(true_level, 2); }

} // namespace

std::vector<ReadoutBranch> ProtocolEngine::readout_branches(const JointDensity& rho) const {
    const int D = fock_dim();
    const JointDensity after = opts_.noise ? idle_noisy_->evolve_master(rho, params_.t_ro, opts_.evolve) : rho;
    std::vector<ReadoutBranch> out;
    for (int r = 0; r < 3; ++r) {
        CMatrix cav = CMatrix::Zero(D, D);
        for (int a = 0; a < kAncillaLevels; ++a) {
            const double w = params_.assignment_error[reported_index(a)][r];
            if (w > 0.0) cav += w * after.matrix().block(a * D, a * D, D, D);
        }
        const double prob = cav.trace().real();
        ReadoutBranch b;
        b.reported = static_cast<Outcome>(r);
        b.probability = std::max(prob, 0.0);
        if (prob > 1e-300) b.state = JointDensity::product(Level::g, hermitize_normalize(cav));
        out.push_back(std::move(b));
    }
    return out;
}

std::pair<Outcome, JointState> ProtocolEngine::readout_and_reset(const JointState& s, CounterRng& rng,
                                                                 JumpRecord* record) const {
    const JointState after =
        opts_.noise ? idle_noisy_->run_trajectory(s, params_.t_ro, rng, record, opts_.evolve) : s;
    std::vector<double> pops(kAncillaLevels);
    for (int a = 0; a < kAncillaLevels; ++a) pops[a] = after.level_population(static_cast<Level>(a));
    const int level = rng.categorical(pops);
    const auto& row = params_.assignment_error[reported_index(level)];
    const int reported = rng.categorical({row[0], row[1], row[2]});
    CVector cav = after.cavity_block(static_cast<Level>(level));
    cav.normalize();
    return {static_cast<Outcome>(reported), JointState::product(Level::g, cav)};
}

double readout_frame_phase(const SystemParams& p, Outcome r) noexcept {
    switch (r) {
    case Outcome::e: return kTwoPi * p.chi_e * p.t_ro;
    case Outcome::f: return kTwoPi * p.chi_f * p.t_ro;
    default: return 0.0;
    }
}

JointState undo_readout_frame(const JointState& s, Outcome r, const SystemParams& p) {
    const double phase = readout_frame_phase(p, r);
    if (phase == 0.0) return s;
    JointState out = s;
    const int D = s.fock_dim();
    for (int a = 0; a < kAncillaLevels; ++a)
        for (int n = 0; n < D; ++n) out.amplitudes()(a * D + n) *= std::polar(1.0, phase * n);
    return out;
}

RMatrix ProtocolEngine::fock_response(ProtocolKind k) const {
    const int D = fock_dim();
    const double T = map_duration(k);
    if (k == ProtocolKind::pi_ft && !ft_sector_)
        throw std::invalid_argument("fock_response: needs a static drive Hamiltonian");
    struct Piece {
        const FockSectorSystem* system;
        double duration;
    };
    std::vector<Piece> waits;
    if (k != ProtocolKind::pi_ft) {
        waits.push_back({idle_sector_.get(), T});
    } else {
        const double on = std::min(opts_.drive_on, T), off = std::min(opts_.drive_off, T);
        if (on > 0.0) waits.push_back({idle_sector_.get(), on});
        if (off > on) waits.push_back({ft_sector_.get(), off - on});
        if (T > off) waits.push_back({idle_sector_.get(), T - off});
    }
    auto rotate = [](FockBlocks& s, RotationKind r) {
        const CMatrix u = rotation_unitary(r);
        for (auto& b : s) b = u * b * u.adjoint();
    };
    RMatrix out = RMatrix::Zero(D, 3);
    for (int n0 = 0; n0 < D; ++n0) {
        FockBlocks s(D, CMatrix::Zero(kAncillaLevels, kAncillaLevels));
        s[n0](index_of(Level::g), index_of(Level::g)) = 1.0;
        for (auto r : opening_pulses(k)) rotate(s, r);
        for (const auto& w : waits) s = w.system->evolve(s, w.duration, opts_.evolve);
        for (auto r : closing_pulses(k)) rotate(s, r);
        if (opts_.noise) s = readout_sector_->evolve(s, params_.t_ro, opts_.evolve);
        for (const auto& b : s)
            for (int a = 0; a < kAncillaLevels; ++a)
                for (int r = 0; r < 3; ++r) out(n0, r) += params_.assignment_error[reported_index(a)][r] * b(a, a).real();
    }
    return out;
}

// ---------------------------------------------------------------- preparation

PrepareResult prepare_cat(const ProtocolEngine& engine, double alpha, CounterRng& rng, int rounds) {
    const int D = engine.fock_dim();
    const CavityKet coh = coherent_state(alpha, CavityBasis(D));
    JointDensity rho = JointDensity::product(Level::g, coh.amplitudes * coh.amplitudes.adjoint());
    PrepareResult res;
    double rate = 1.0;
    for (int i = 0; i < rounds; ++i) {
        const auto branches = engine.readout_branches(engine.parity_map(rho, ProtocolKind::pi_gf));
        const auto& pass = branches[static_cast<int>(Outcome::g)];
        res.round_pass.push_back(pass.probability);
        rate *= pass.probability;
        if (!(pass.probability > 0.0)) break;
        rho = pass.state;
    }
    res.success_rate = rate;
    res.state = rho;
    const CMatrix cav = rho.cavity_density();
    res.parity = (cav.diagonal().real().array() * parity_op(D).diagonal().real().array()).sum();
    res.success = rng.uniform() < rate;
    return res;
}

// ---------------------------------------------------------------- filtering

double assignment_fidelity(const FilterConfig& f, ProtocolKind k) noexcept {
    return f.assignment_fidelity[static_cast<int>(k)];
}

std::pair<double, bool> record_likelihood(const std::vector<Outcome>& record, ProtocolKind k,
                                          const FilterConfig& filter) {
    if (record.empty()) throw std::invalid_argument("record_likelihood: empty record");
    const double F = assignment_fidelity(filter, k);
    double p = 1.0;
    if (filter.strategy == FilterStrategy::product) {
        for (Outcome o : record) p *= (o == Outcome::g) ? F : 1.0 - F;
    } else {
        // forward pass over (even, odd) with flip probability q; the joint
        // probability of "never flipped" and the record rides along
        const double q = filter.flip_probability;
        double even = 1.0, odd = 0.0, stay = 1.0;
        for (std::size_t i = 0; i < record.size(); ++i) {
            if (i > 0) {
                const double ne = even * (1 - q) + odd * q;
                const double no = odd * (1 - q) + even * q;
                even = ne;
                odd = no;
                stay *= (1 - q);
            }
            const bool g = record[i] == Outcome::g;
            const double pe = g ? F : 1.0 - F;
            const double po = g ? 1.0 - F : F;
            even *= pe;
            odd *= po;
            stay *= pe;
            // rescale to keep long records finite
            const double s = even + odd;
            even /= s;
            odd /= s;
            stay /= s;
        }
        p = std::clamp(stay, 0.0, 1.0);
    }
    return {p, p >= filter.threshold};
}

double cycle_flip_probability(const SystemParams& p, ProtocolKind k, double nbar) {
    const double t = map_duration(p, k) + p.t_ro;
    return -std::expm1(-nbar * t / p.T1_cavity);
}

// ---------------------------------------------------------------- repetition

RepeatedParityResult repeated_parity(const ProtocolEngine& engine, const JointState& psi0,
                                     const RepeatedParityConfig& cfg, const ParityObserver& observer) {
    if (cfg.n_max < 1) throw std::invalid_argument("repeated_parity: N must be >= 1");
    if (cfg.trials < 1) throw std::invalid_argument("repeated_parity: trials must be >= 1");
    RepeatedParityResult res;
    res.records.reserve(cfg.trials);
    for (int trial = 0; trial < cfg.trials; ++trial) {
        CounterRng rng(cfg.seed, static_cast<std::uint64_t>(trial));
        JointState cur = psi0;
        MeasurementRecord rec;
        for (int n = 1; n <= cfg.n_max; ++n) {
            cur = engine.parity_map(cur, cfg.protocol, rng, nullptr);
            auto [o, next] = engine.readout_and_reset(cur, rng);
            cur = cfg.track_readout_frame ? undo_readout_frame(next, o, engine.params()) : std::move(next);
            rec.outcomes.push_back(o);
            const auto [p, keep] = record_likelihood(rec.outcomes, cfg.protocol, cfg.filter);
            rec.likelihood = p;
            rec.kept = keep;
            if (observer) observer(trial, n, cur, keep);
        }
        res.records.push_back(std::move(rec));
        res.final_states.push_back(std::move(cur));
    }
    return res;
}

MasterParityResult repeated_parity_master(const ProtocolEngine& engine, const JointDensity& rho0, ProtocolKind k,
                                          int n, double budget) {
    if (n < 1) throw std::invalid_argument("repeated_parity_master: N must be >= 1");
    const double cost = static_cast<double>(n) * rho0.dim() * rho0.dim();
    if (cost > budget) throw ResourceError("master-mode repeated parity exceeds the configured budget");
    MasterParityResult res;
    JointDensity rho = rho0;
    double prob = 1.0;
    for (int i = 0; i < n; ++i) {
        const auto branches = engine.readout_branches(engine.parity_map(rho, k));
        const auto& pass = branches[static_cast<int>(Outcome::g)];
        prob *= pass.probability;
        res.outcome_probability.push_back(prob);
        if (!(pass.probability > 0.0)) break;
        rho = pass.state;
    }
    res.all_g_probability = prob;
    res.all_g_state = rho;
    return res;
}

} // namespace ftparity
