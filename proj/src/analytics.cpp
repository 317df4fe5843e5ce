#include "ftparity/analytics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <numbers>

namespace ftparity {

double thermal_dephasing_rate(double chi, double gamma, double n_th) {
    if (!(gamma > 0.0)) throw std::invalid_argument("thermal_dephasing_rate: gamma must be positive");
    if (n_th < 0.0) throw std::invalid_argument("thermal_dephasing_rate: n_th must be nonnegative");
    const double x = kTwoPi * chi / gamma;
    const Complex one_ix(1.0, x);
    const Complex root = std::sqrt(one_ix * one_ix + Complex(0.0, 4.0 * x * n_th));
    return std::max(0.0, 0.5 * gamma * (root.real() - 1.0));
}

double residual_dephasing_time(const SystemParams& p) {
    if (p.n_th <= 0.0) return std::numeric_limits<double>::infinity();
    return p.T1_eg / (2.0 * p.n_th * p.n_th);
}

std::vector<T2Point> t2_model_curve(const SystemParams& p, const std::vector<double>& detunings,
                                    std::optional<double> t_phi_res) {
    const double tres = t_phi_res.value_or(residual_dephasing_time(p));
    std::vector<T2Point> out;
    out.reserve(detunings.size());
    for (double d : detunings) {
        if (d == 0.0) throw InvalidDrive("t2_model_curve: zero detuning");
        const double chi = std::isinf(d) ? p.chi_e : p.chi_e + first_order_induced_chi(p.omega_sb, d);
        const double rate = 0.5 / p.T1_cavity + thermal_dephasing_rate(chi, 1.0 / p.T1_eg, p.n_th) + 1.0 / tres;
        out.push_back({d, chi, 1.0 / rate});
    }
    return out;
}

double kick_infidelity(double delta_chi, double t0, double t1, double alpha) {
    if (!(t0 <= t1)) throw std::invalid_argument("kick_infidelity: t0 must not exceed t1");
    if (delta_chi == 0.0) return 0.0;
    if (t1 == t0) return 1.0 - cat_overlap(alpha, kTwoPi * delta_chi * t0);
    // integrate over s ∈ [0, 1] so the tolerance is relative to an O(1) mean
    auto overlap = [&](double s) { return cat_overlap(alpha, kTwoPi * delta_chi * (t0 + s * (t1 - t0))); };
    double err = 0.0;
    const double mean = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(overlap, 0.0, 1.0, 15, 1e-10,
                                                                                      &err);
    return std::clamp(1.0 - mean, 0.0, 1.0);
}

double dephasing_per_occurrence(double delta_chi, double t0, double t1, double alpha) {
    if (delta_chi == 0.0) {
        if (!(t0 <= t1)) throw std::invalid_argument("dephasing_per_occurrence: t0 must not exceed t1");
        return 0.0;
    }
    const double full = kick_infidelity(delta_chi, 0.0, 1.0 / std::abs(delta_chi), alpha);
    return std::min(1.0, kick_infidelity(delta_chi, t0, t1, alpha) / full);
}

std::vector<ErrorEventSpec> error_event_table(const SystemParams& p, ProtocolKind k, const ErrorTableOptions& o) {
    if (k == ProtocolKind::pi_ge) throw ConfigError("error_event_table: defined for the gf and ft protocols only");
    validate(p);
    const double tm = std::isnan(o.t_map) ? map_duration(p, ProtocolKind::pi_gf) : o.t_map;
    const double tro = p.t_ro;
    const auto [pg, pe, pf] = o.final_populations;
    const double chi_ge = p.chi_e;
    const double chi_ef = p.chi_f - p.chi_e;
    const double chi_gf = p.chi_f;
    const double chi_fh = p.chi_h - p.chi_f;
    const auto& C = p.assignment_error;

    std::vector<ErrorEventSpec> rows = {
        {"map", "f->e", tm / (2.0 * p.T1_fe), k == ProtocolKind::pi_ft ? 0.0 : chi_ef, 0.0, tm, false},
        {"map", "f->e->g", 0.25 * tm * tm / (p.T1_fe * p.T1_eg), chi_gf, tm / 3.0, tm, true},
        {"map", "f->h", 1.5 * tm * p.n_th / p.T1_eg, chi_fh, 0.0, tm, true},
        {"map", "g->e", 0.5 * tm * p.n_th / p.T1_eg, chi_ge, 0.0, tm, false},
        {"readout", "g->e", pg * p.n_th * tro / p.T1_eg, chi_ge, 0.0, tro, false},
        {"readout", "e->g", pe * tro / p.T1_eg, chi_ge, 0.0, tro, false},
        {"readout", "f->e", pf * tro / p.T1_fe, chi_ef, 0.0, tro, false},
        {"assignment", "g as e", C[0][1], chi_ge, tro, tro, true},
        {"assignment", "e as g", C[1][0], chi_ge, tro, tro, true},
        {"assignment", "e as f", C[1][2], chi_ef, tro, tro, true},
        {"assignment", "f as e", C[2][1], chi_ef, tro, tro, true},
    };
    for (auto& r : rows)
        r.dephasing = r.full_dephasing ? 1.0 : dephasing_per_occurrence(r.delta_chi, r.t0, r.t1, o.alpha);
    return rows;
}

double total_dephasing_probability(const std::vector<ErrorEventSpec>& events) {
    double s = 0.0;
    for (const auto& e : events) s += e.dephasing_probability();
    return s;
}

DecayCurve phase_kick_monte_carlo(const std::vector<ErrorEventSpec>& events, int n_max, int trials, double alpha,
                                  std::uint64_t seed) {
    if (n_max < 1) throw std::invalid_argument("phase_kick_monte_carlo: n_max must be >= 1");
    if (trials < 1000) throw std::invalid_argument("phase_kick_monte_carlo: trials must be >= 1000");
    std::vector<double> probs;
    double total = 0.0;
    for (const auto& e : events) {
        if (e.probability < 0.0 || e.probability > 1.0 || e.t0 > e.t1)
            throw std::invalid_argument("phase_kick_monte_carlo: malformed event '" + e.label + "'");
        probs.push_back(e.probability);
        total += e.probability;
    }
    if (total > 1.0 + 1e-12) throw std::invalid_argument("phase_kick_monte_carlo: probabilities exceed 1");

    std::vector<double> sum(n_max, 0.0), sum2(n_max, 0.0);
    for (int t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        for (int n = 1; n <= n_max; ++n) {
            const std::vector<int> counts = rng.multinomial(n, probs);
            double theta = 0.0;
            for (std::size_t i = 0; i < events.size(); ++i) {
                const auto& e = events[i];
                for (int j = 0; j < counts[i]; ++j) {
                    if (e.full_dephasing)
                        theta += rng.uniform(0.0, kTwoPi);
                    else if (e.t1 > e.t0)
                        theta += kTwoPi * e.delta_chi * rng.uniform(e.t0, e.t1);
                    else
                        theta += kTwoPi * e.delta_chi * e.t0;
                }
            }
            const double f = cat_overlap(alpha, theta);
            sum[n - 1] += f;
            sum2[n - 1] += f * f;
        }
    }
    DecayCurve curve(n_max);
    for (int n = 1; n <= n_max; ++n) {
        const double mean = sum[n - 1] / trials;
        const double var = trials > 1 ? std::max(0.0, (sum2[n - 1] - trials * mean * mean) / (trials - 1)) : 0.0;
        curve[n - 1] = {n, mean, std::sqrt(var / trials)};
    }
    return curve;
}

namespace {

struct DecayFunctor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const DecayCurve* curve;
    std::optional<double> fixed_c;
    int inputs() const { return fixed_c ? 2 : 3; }
    int values() const { return static_cast<int>(curve->size()); }

    // x = (A, N0[, c])
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
        const double c = fixed_c ? *fixed_c : x(2);
        for (int i = 0; i < values(); ++i) {
            const auto& pt = (*curve)[i];
            r(i) = x(0) * std::exp(-pt.n / x(1)) + c - pt.fidelity;
        }
        return 0;
    }
};

} // namespace

FitResult fit_decay(const DecayCurve& curve, std::optional<double> fixed_c) {
    if (curve.size() < 5) throw std::invalid_argument("fit_decay: need at least 5 points");
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i].n <= curve[i - 1].n) throw std::invalid_argument("fit_decay: N must increase");

    FitResult res;
    double fmin = curve[0].fidelity, fmax = curve[0].fidelity;
    for (const auto& pt : curve) {
        fmin = std::min(fmin, pt.fidelity);
        fmax = std::max(fmax, pt.fidelity);
    }
    const double first = curve.front().fidelity;
    const double c0 = fixed_c.value_or(fmin);
    if (fmax - fmin < 1e-12 || first - c0 <= 1e-12) {
        res.infinite_n0 = true;
        res.converged = true;
        res.N0 = std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (const auto& pt : curve) s += pt.fidelity;
        res.c = fixed_c.value_or(s / curve.size());
        res.A = fixed_c ? s / curve.size() - res.c : 0.0;
        return res;
    }

    const double A0 = first - c0;
    double n_half = curve.back().n;
    for (const auto& pt : curve)
        if (pt.fidelity <= c0 + 0.5 * A0) {
            n_half = pt.n;
            break;
        }
    const int np = fixed_c ? 2 : 3;
    Eigen::VectorXd x(np);
    if (fixed_c)
        x << A0, n_half;
    else
        x << A0, n_half, c0;

    DecayFunctor f{&curve, fixed_c};
    Eigen::NumericalDiff<DecayFunctor> nd(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<DecayFunctor>> lm(nd);
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-14;
    lm.parameters.maxfev = 4000;
    const auto status = lm.minimize(x);
    res.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                    status == Eigen::LevenbergMarquardtSpace::FtolTooSmall;
    res.A = x(0);
    res.N0 = x(1);
    res.c = fixed_c ? *fixed_c : x(2);
    if (!(res.N0 > 0.0) || !std::isfinite(res.N0)) {
        res.converged = false;
        if (res.N0 > 1e6 * curve.back().n) res.infinite_n0 = true;
    }

    const int m = static_cast<int>(curve.size());
    Eigen::VectorXd r(m);
    f(x, r);
    res.rms = std::sqrt(r.squaredNorm() / m);
    Eigen::MatrixXd J(m, np);
    for (int i = 0; i < m; ++i) {
        const double e = std::exp(-curve[i].n / x(1));
        J(i, 0) = e;
        J(i, 1) = x(0) * e * curve[i].n / (x(1) * x(1));
        if (np == 3) J(i, 2) = 1.0;
    }
    if (m > np) {
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
        if (lu.isInvertible()) {
            const Eigen::MatrixXd cov = lu.inverse() * (r.squaredNorm() / (m - np));
            for (int i = 0; i < np; ++i) res.std_error[i] = std::sqrt(std::max(0.0, cov(i, i)));
        }
    }
    return res;
}

double dephased_floor(double alpha) {
    // even-cat weights e^{-a²} a^{2n}/n! on even n, renormalized
    const double a2 = alpha * alpha;
    double term = std::exp(-a2), norm = 0.0, sq = 0.0;
    for (int n = 0; n < 400 && (n < 2 * a2 + 10 || term > 1e-300); ++n) {
        if (n % 2 == 0) {
            norm += term;
            sq += term * term;
        }
        term *= a2 / (n + 1);
    }
    return sq / (norm * norm);
}

} // namespace ftparity
