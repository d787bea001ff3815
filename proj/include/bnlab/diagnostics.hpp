#pragma once

// Observables along a trajectory: the entropy-dissipation functional, the
// distance-to-equilibrium report, exponentially weighted monotone monitors,
// the a-priori entropy floor, and the condensation-onset predictor built on
// the threshold constants from bec.hpp.
//
// Everything here is a pure function over an immutable measure snapshot; the
// solver calls these between steps and never the other way around.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bnlab/bec.hpp"
#include "bnlab/equilibrium.hpp"
#include "bnlab/errors.hpp"
#include "bnlab/kernel.hpp"
#include "bnlab/math.hpp"
#include "bnlab/measure.hpp"
#include "bnlab/parallel.hpp"

namespace bnlab::diagnostics {

using bec::BecConstants;
using bec::bec_constants;

// ---------------------------------------------------------------------------
// Entropy dissipation.
//
// D = pi sqrt(2) sum_{i,j,k >= 1} w_i w_j w_k sqrt(x_i x_j x_k)
//       W(x_i, x_j, x_k) Pi Gamma(g_j g_k, g_i g_*),
//
// with x_* = x_j + x_k - x_i, g = f/(1+f), Pi = (1+f_i)(1+f_*)(1+f_j)(1+f_k)
// and the pair function Gamma(a,b) = (a-b) log(a/b) >= 0.  The sum runs over
// the truncated pair set x_j + x_k <= x_max only: beyond it x_* leaves the
// grid, the reconstructed density is identically zero there, and every such
// triple would land in Gamma's infinite branch and bury the signal under
// caps.  The truncated sum is the dissipation of the collision dynamics the
// solver actually integrates (which truncates pairs the same way), so the
// H-theorem ties D to the computed entropy exactly.
// ---------------------------------------------------------------------------

struct DissipationResult {
    double d = 0.0;        // >= 0 by construction of the pair function
    long long capped = 0;  // triples that hit the infinite branch of Gamma
};

namespace detail {

// Cell densities with linear interpolation between nodes and constant
// extension below the first interior node (linear extension could go
// negative; the reconstruction must stay a valid density).  Input masses are
// clamped at zero: transient negative cells from a not-yet-repaired step
// must not feed log of a negative ratio.
struct DensityProfile {
    const measure::Grid* g = nullptr;
    std::vector<double> f;  // f[0] unused (the condensate has no density)

    explicit DensityProfile(const measure::IsotropicMeasure& m) : g(m.grid.get()) {
        const std::size_t n = g->size();
        f.assign(n, 0.0);
        for (std::size_t i = 1; i < n && i < m.masses.size(); ++i)
            f[i] = std::max(m.masses[i], 0.0) / (std::sqrt(g->nodes[i]) * g->width(i));
    }

    double operator()(double x) const {
        const auto& nodes = g->nodes;
        const std::size_t n = nodes.size();
        if (x <= nodes[1]) return f[1];
        if (x >= nodes[n - 1]) return f[n - 1];
        const std::size_t hi = static_cast<std::size_t>(
            std::upper_bound(nodes.begin() + 1, nodes.end(), x) - nodes.begin());
        const double t = (x - nodes[hi - 1]) / (nodes[hi] - nodes[hi - 1]);
        return f[hi - 1] + t * (f[hi] - f[hi - 1]);
    }
};

}  // namespace detail

// Core sum over a caller-supplied weight table w_of(i, j, k) = W(x_i,x_j,x_k)
// evaluated only on i, j <= k with x_j + x_k <= x_max and x_i <= x_j + x_k.
// The solver passes its precomputed table; the model overload below wraps the
// kernel.  Block reduction keeps the result bit-identical for any thread
// count.
template <class WFn>
DissipationResult entropy_dissipation_with(const measure::IsotropicMeasure& F, WFn&& w_of,
                                           double cap = 1e12, int threads = 1) {
    if (!F.grid) throw domain_error("entropy_dissipation: measure has no grid");
    if (!(cap > 0.0)) throw domain_error("entropy_dissipation: cap must be positive");
    const measure::Grid& g = *F.grid;
    const std::size_t n = g.size();
    const double x_max = g.x_max();

    const detail::DensityProfile prof(F);
    std::vector<double> gf(n, 0.0), cw(n, 0.0);  // g = f/(1+f), cw = w_i sqrt(x_i)
    for (std::size_t i = 1; i < n; ++i) {
        gf[i] = prof.f[i] / (1.0 + prof.f[i]);
        cw[i] = g.width(i) * std::sqrt(g.nodes[i]);
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::uint32_t j = 1; j < n; ++j) {
        if (g.nodes[j] * 2.0 > x_max) break;
        for (std::uint32_t k = j; k < n && g.nodes[j] + g.nodes[k] <= x_max; ++k)
            pairs.emplace_back(j, k);
    }

    struct Acc {
        double d = 0.0;
        long long capped = 0;
    };
    const Acc total = parallel::block_reduce(
        pairs.size(), 64, threads, Acc{},
        [&](std::size_t begin, std::size_t end, Acc& acc) {
            for (std::size_t p = begin; p < end; ++p) {
                const auto [j, k] = pairs[p];
                const double sym = (j == k) ? 1.0 : 2.0;
                const double s = g.nodes[j] + g.nodes[k];
                const double a = gf[j] * gf[k];
                const double pair_f = (1.0 + prof.f[j]) * (1.0 + prof.f[k]);
                const double pair_w = sym * cw[j] * cw[k];
                for (std::size_t i = 1; i < n && g.nodes[i] <= s; ++i) {
                    const double wv = w_of(i, j, k);
                    if (wv == 0.0) continue;
                    const double fs = prof(s - g.nodes[i]);
                    const double b = gf[i] * (fs / (1.0 + fs));
                    if (a == b) continue;
                    const double base =
                        pair_w * cw[i] * wv * pair_f * (1.0 + prof.f[i]) * (1.0 + fs);
                    if (a > 0.0 && b > 0.0) {
                        acc.d += base * (a - b) * std::log(a / b);
                    } else if (base != 0.0) {
                        // One side of the balance vanished on a cell while
                        // the other did not: the continuum pair function is
                        // infinite here.  Cap and count rather than abort.
                        acc.capped += static_cast<long long>(sym);
                    }
                }
            }
        },
        [](Acc& into, const Acc& part) {
            into.d += part.d;
            into.capped += part.capped;
        });

    DissipationResult res;
    res.capped = total.capped;
    res.d = math::kPi * math::kSqrt2 * total.d + cap * static_cast<double>(total.capped);
    return res;
}

inline DissipationResult entropy_dissipation(const measure::IsotropicMeasure& F,
                                             const kernel::PhiModel& model,
                                             const kernel::QuadratureSpec& quad = {},
                                             double cap = 1e12, int threads = 1) {
    if (!F.grid) throw domain_error("entropy_dissipation: measure has no grid");
    const auto& nodes = F.grid->nodes;
    if (model.kind() == kernel::PhiKind::hard_sphere) {
        // Phi == 1 collapses the weight to its closed form; the quadrature
        // path agrees to ~1e-12 and costs three orders of magnitude more.
        return entropy_dissipation_with(
            F,
            [&nodes](std::size_t i, std::size_t j, std::size_t k) {
                return kernel::w_hard_sphere_closed(nodes[i], nodes[j], nodes[k]);
            },
            cap, threads);
    }
    return entropy_dissipation_with(
        F,
        [&](std::size_t i, std::size_t j, std::size_t k) {
            return kernel::w(model, nodes[i], nodes[j], nodes[k], quad);
        },
        cap, threads);
}

// ---------------------------------------------------------------------------
// Distance to the equilibrium sharing the measure's invariants.
// ---------------------------------------------------------------------------

// The equilibrium data a run compares against, solved once from (N, E) and
// projected onto the working grid.  s_eq is the continuum entropy of the
// limit state, the discrete trajectory entropy approaches it from below up
// to the projection's own discretisation error.
struct ReferenceState {
    equilibrium::EquilibriumState state{};
    measure::IsotropicMeasure f_eq;
    double s_eq = 0.0;
};

inline ReferenceState make_reference(const measure::IsotropicMeasure& F) {
    ReferenceState ref;
    ref.state = equilibrium::solve_equilibrium(measure::mass(F), measure::energy(F));
    ref.f_eq = equilibrium::equilibrium_measure(ref.state, F.grid);
    ref.s_eq = equilibrium::equilibrium_entropy(ref.state);
    return ref;
}

struct DistanceReport {
    double dist1 = 0.0;           // || F - F_eq ||_1 on the grid
    double dist1circ = 0.0;       // annealed norm || . ||_1-circle
    double entropy_gap = 0.0;     // S(F_eq) - S(F), continuum reference
    double condensate_gap = 0.0;  // | m_0 - n_0 |
    // Two-sided relation diagnostics: the entropy gap against the squared
    // and the square-rooted annealed distance.  Reported, never asserted;
    // the comparison constants are not explicit.
    double ratio_quadratic = 0.0;  // entropy_gap / dist1circ^2
    double ratio_root = 0.0;       // entropy_gap / sqrt(dist1circ)
};

inline DistanceReport distance_report(const measure::IsotropicMeasure& F,
                                      const ReferenceState& ref) {
    DistanceReport rep;
    rep.dist1 = measure::norm1(F, ref.f_eq);
    rep.dist1circ = measure::norm1_circ(F, ref.f_eq);
    rep.entropy_gap = ref.s_eq - measure::entropy(F);
    const double m0 = F.masses.empty() ? 0.0 : F.masses[0];
    rep.condensate_gap = std::abs(m0 - ref.state.n0);
    if (rep.dist1circ > 0.0) {
        rep.ratio_quadratic = rep.entropy_gap / (rep.dist1circ * rep.dist1circ);
        rep.ratio_root = rep.entropy_gap / std::sqrt(rep.dist1circ);
    }
    return rep;
}

inline DistanceReport distance_report(const measure::IsotropicMeasure& F,
                                      const equilibrium::EquilibriumState& st) {
    ReferenceState ref;
    ref.state = st;
    ref.f_eq = equilibrium::equilibrium_measure(st, F.grid);
    ref.s_eq = equilibrium::equilibrium_entropy(st);
    return distance_report(F, ref);
}

// ---------------------------------------------------------------------------
// Per-sample trajectory row.  ds is filled by the caller (difference of
// consecutive entropies); everything else comes from the snapshot.
// ---------------------------------------------------------------------------

struct DiagnosticsRecord {
    double t = 0.0;
    double n = 0.0;
    double e = 0.0;
    double s = 0.0;
    double d = 0.0;
    double m0 = 0.0;
    double n02 = 0.0;  // truncated quadratic concentration at the reference eps
    double dist1 = 0.0;
    double dist1circ = 0.0;
    double ds = 0.0;
    long long d_capped = 0;
    // Number of monitor violations whose step ends at this sample; the
    // trajectory driver backfills it from the monitor report.
    int monotone_flags = 0;
};

inline DiagnosticsRecord record(const measure::IsotropicMeasure& F, double t,
                                const ReferenceState& ref, double eps_ref,
                                const kernel::PhiModel& model,
                                const kernel::QuadratureSpec& quad = {}, double cap = 1e12,
                                int threads = 1) {
    DiagnosticsRecord r;
    r.t = t;
    r.n = measure::mass(F);
    r.e = measure::energy(F);
    r.s = measure::entropy(F);
    const DissipationResult diss = entropy_dissipation(F, model, quad, cap, threads);
    r.d = diss.d;
    r.d_capped = diss.capped;
    r.m0 = F.masses.empty() ? 0.0 : F.masses[0];
    r.n02 = measure::n0p(F, eps_ref, 2.0);
    r.dist1 = measure::norm1(F, ref.f_eq);
    r.dist1circ = measure::norm1_circ(F, ref.f_eq);
    return r;
}

// ---------------------------------------------------------------------------
// Condensation-onset prediction.
// ---------------------------------------------------------------------------

struct BecPrediction {
    bool condition_met = false;  // n02 >= threshold at the tested eps
    bool admissible = false;     // eps within the constants' admissible window
    double n02 = 0.0;            // measured concentration N_{0,2}(F, 3 eps / 2)
    double threshold = 0.0;      // A* eps^alpha
    double t_eps = 0.0;          // time by which the floor is guaranteed
    double floor = 0.0;          // guaranteed condensate mass A* eps^alpha / 5
};

// Evaluates the onset criterion on a snapshot taken at time tau.  When the
// criterion holds at an admissible eps, the condensate mass exceeds `floor`
// for all t >= t_eps.  Inadmissible eps still yields the comparison, only
// flagged.  Zero-energy data degenerates t_eps to +infinity (a pure
// condensate needs no prediction).
inline BecPrediction bec_predict(const measure::IsotropicMeasure& f_tau, double tau,
                                 const BecConstants& consts, double eps) {
    if (!(eps > 0.0)) throw domain_error("bec_predict: eps must be positive");
    if (!(tau >= 0.0)) throw domain_error("bec_predict: tau must be nonnegative");
    BecPrediction p;
    p.n02 = measure::n0p(f_tau, 1.5 * eps, 2.0);
    p.threshold = consts.a_star * std::pow(eps, consts.alpha);
    p.condition_met = p.n02 >= p.threshold;
    p.admissible = eps <= consts.eps_admissible_max;
    p.floor = 0.2 * p.threshold;
    const double ne = measure::mass(f_tau) * measure::energy(f_tau);
    const double one_m_23_a = -std::expm1(consts.alpha * std::log(2.0 / 3.0));
    p.t_eps = tau + 2.0 * std::pow(eps, consts.alpha) / one_m_23_a +
              1.0 / (3.0 * std::sqrt(ne));
    return p;
}

// ---------------------------------------------------------------------------
// A-priori entropy floor.
//
// S_*(t0) = min{ 7 pi a^3 / 24,
//                4 pi^2 e^2 / (5 C (1 + 2/t0)^2),
//                min{ (2 b0 a^eta / (1 + a^eta))^2, (4 pi)^2 a^2 }
//                  * 7 pi^4 sqrt(2) a^3 e^5 t0 / (96 C^3 (1 + 2/t0)^6) }
//
// with a = (1/2) sqrt(e/n).  C is the quartic-moment comparison constant the
// analysis never makes explicit; the caller supplies it, so the floor can be
// charted against runs but not certified.
// ---------------------------------------------------------------------------

inline double entropy_floor(double n, double e, double b0, double eta, double t0,
                            double c_moment) {
    if (!(n > 0.0) || !(e > 0.0))
        throw domain_error("entropy_floor: n and e must be positive");
    if (!(b0 > 0.0 && b0 <= 0.5))
        throw domain_error("entropy_floor: b0 must lie in (0,1/2]");
    if (!(eta >= 0.0 && eta < 1.0)) throw domain_error("entropy_floor: eta must lie in [0,1)");
    if (!(t0 > 0.0)) throw domain_error("entropy_floor: t0 must be positive");
    if (!(c_moment > 0.0)) throw domain_error("entropy_floor: c_moment must be positive");

    const double a = 0.5 * std::sqrt(e / n);
    const double pc = 1.0 + 2.0 / t0;
    const double term1 = 7.0 * math::kPi * a * a * a / 24.0;
    const double term2 = 4.0 * math::kPi * math::kPi * e * e / (5.0 * c_moment * pc * pc);
    const double a_eta = std::pow(a, eta);
    const double small_phi = 2.0 * b0 * a_eta / (1.0 + a_eta);
    const double gate =
        std::min(small_phi * small_phi, 16.0 * math::kPi * math::kPi * a * a);
    const double term3 = gate * 7.0 * std::pow(math::kPi, 4) * math::kSqrt2 * a * a * a *
                         std::pow(e, 5) * t0 /
                         (96.0 * std::pow(c_moment, 3) * std::pow(pc, 6));
    return std::min(term1, std::min(term2, term3));
}

// ---------------------------------------------------------------------------
// Exponentially weighted monotone monitors.
//
// Along any solution, t -> e^{ct} <phi, F_t> is nondecreasing for every
// bounded convex nonnegative phi (bounded convex on the half-line forces phi
// nonincreasing) with c = sqrt(N E), and so are the truncated concentration
// t -> e^{ct} N_{0,2}(F_t, eps) and the condensate mass t -> e^{ct} m_0.
// The monitor checks sampled trajectories for decreases beyond a relative
// tolerance, plus S nondecreasing and N, E constant.
// ---------------------------------------------------------------------------

struct MonitorPhi {
    std::string name;
    std::function<double(double)> fn;
};

// The quadratic cutoffs at x_max and 2 x_max; on [0, x_max] the first one's
// clamp is inactive, so it doubles as the plain quadratic (1 - x/x_max)^2.
inline std::vector<MonitorPhi> default_monitor_phis(double x_max) {
    if (!(x_max > 0.0)) throw domain_error("default_monitor_phis: x_max must be positive");
    std::vector<MonitorPhi> set;
    set.push_back({"cutoff_xmax", kernel::QuadraticCutoff(x_max)});
    set.push_back({"cutoff_2xmax", kernel::QuadraticCutoff(2.0 * x_max)});
    return set;
}

struct MonitorViolation {
    std::string monitor;
    double t_prev = 0.0;
    double t_curr = 0.0;
    double drop = 0.0;  // relative decrease (or deviation, for conserved quantities)
};

struct MonitorReport {
    std::vector<MonitorViolation> violations;
    std::size_t checks = 0;
    double c = 0.0;  // exponential rate actually used
    bool ok() const { return violations.empty(); }
};

namespace detail {

// Exponential monitors compare in log space: c t + log v overflows nowhere,
// while e^{ct} itself would for ct ~ 10^3.  v == 0 makes the log -inf, which
// orders correctly on both sides of the comparison.
inline void check_exp_monotone(MonitorReport& rep, const std::string& name,
                               std::span<const double> times, const std::vector<double>& v,
                               double c, double tol) {
    const double log_keep = std::log1p(-tol);
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        ++rep.checks;
        if (v[k] <= 1e-300) continue;  // nothing to lose; roundoff-scale values skipped
        const double lhs = c * times[k + 1] + std::log(v[k + 1]);
        const double rhs = c * times[k] + std::log(v[k]);
        if (lhs < rhs + log_keep)
            rep.violations.push_back(
                {name, times[k], times[k + 1], -std::expm1(lhs - rhs)});
    }
}

}  // namespace detail

inline MonitorReport monitor_monotone(std::span<const double> times,
                                      std::span<const measure::IsotropicMeasure> states,
                                      std::span<const MonitorPhi> phis,
                                      std::span<const double> eps_list, double c = -1.0,
                                      double tol = 1e-6) {
    if (times.size() != states.size())
        throw domain_error("monitor_monotone: times and states disagree in length");
    if (times.empty()) throw domain_error("monitor_monotone: empty trajectory");
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        if (!(times[k] < times[k + 1]))
            throw domain_error("monitor_monotone: sample times must increase strictly");
    if (!(tol > 0.0)) throw domain_error("monitor_monotone: tolerance must be positive");

    const std::size_t m = times.size();
    MonitorReport rep;

    std::vector<double> nn(m), ee(m), ss(m), m0(m);
    for (std::size_t k = 0; k < m; ++k) {
        nn[k] = measure::mass(states[k]);
        ee[k] = measure::energy(states[k]);
        ss[k] = measure::entropy(states[k]);
        m0[k] = states[k].masses.empty() ? 0.0 : states[k].masses[0];
    }
    rep.c = c >= 0.0 ? c : std::sqrt(std::max(nn[0] * ee[0], 0.0));

    std::vector<double> v(m);
    for (const MonitorPhi& phi : phis) {
        for (std::size_t k = 0; k < m; ++k) {
            const auto& st = states[k];
            const auto& nodes = st.grid->nodes;
            double acc = 0.0;
            for (std::size_t i = 0; i < st.masses.size(); ++i)
                acc += phi.fn(nodes[i]) * st.masses[i];
            v[k] = acc;
        }
        detail::check_exp_monotone(rep, "phi:" + phi.name, times, v, rep.c, tol);
    }
    for (double eps : eps_list) {
        for (std::size_t k = 0; k < m; ++k) v[k] = measure::n0p(states[k], eps, 2.0);
        std::ostringstream name;
        name << "n02:eps=" << eps;
        detail::check_exp_monotone(rep, name.str(), times, v, rep.c, tol);
    }
    detail::check_exp_monotone(rep, "condensate", times, m0, rep.c, tol);

    for (std::size_t k = 0; k + 1 < m; ++k) {
        ++rep.checks;
        const double floor = ss[k] - tol * std::max(std::abs(ss[k]), 1e-300);
        if (ss[k + 1] < floor)
            rep.violations.push_back({"entropy", times[k], times[k + 1],
                                      (ss[k] - ss[k + 1]) /
                                          std::max(std::abs(ss[k]), 1e-300)});
    }
    for (std::size_t k = 1; k < m; ++k) {
        ++rep.checks;
        const double dn = std::abs(nn[k] - nn[0]) / std::max(std::abs(nn[0]), 1e-300);
        if (dn > tol) rep.violations.push_back({"mass", times[0], times[k], dn});
        ++rep.checks;
        const double de = std::abs(ee[k] - ee[0]) / std::max(std::abs(ee[0]), 1e-300);
        if (de > tol) rep.violations.push_back({"energy", times[0], times[k], de});
    }
    return rep;
}

}  // namespace bnlab::diagnostics
