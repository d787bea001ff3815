#pragma once

// Bose-Einstein equilibrium of the isotropic gas in the energy variable
// x = |v|^2/2 with the sqrt(x) density of states.  The regular part is
//
//     f(x) = 1 / (A exp(x / kappa) - 1),    A >= 1,  kappa > 0,
//
// and a condensate atom of mass n0 sits at x = 0 exactly when the ratio of
// the kinetic temperature to the critical one drops below 1.  Given total
// mass n and energy e, this module recovers (A, kappa, n0), evaluates f,
// projects the equilibrium onto a grid, and computes its entropy.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "bnlab/errors.hpp"
#include "bnlab/math.hpp"
#include "bnlab/measure.hpp"

namespace bnlab::equilibrium {

struct EquilibriumState {
    double n = 0.0;           // total mass
    double e = 0.0;           // total energy
    double temp_ratio = 0.0;  // kinetic over critical temperature
    double a_coef = 1.0;      // A >= 1; exactly 1 below the transition (and, by
                              // rounding of e^{log A}, within one ulp above it)
    double kappa = 0.0;       // energy scale; 0 only in the pure-condensate state e = 0
    double n0 = 0.0;          // condensate mass, (1 - temp_ratio^{3/5})+ * n
};

// c* e / n^{5/3} with c* = (2 pi)^{1/3} zeta(3/2)^{5/3} / (3 zeta(5/2)).
inline double temp_ratio(double n, double e) {
    if (!(n > 0.0)) throw domain_error("temp_ratio: mass must be positive");
    if (!(e >= 0.0)) throw domain_error("temp_ratio: energy must be nonnegative");
    return math::kCriticalRatioCoeff * e / std::pow(n, 5.0 / 3.0);
}

// Li_s(z) for the two exponents the moment equations need.
inline double bose_g(double s, double z) {
    if (!(z >= 0.0 && z <= 1.0)) throw domain_error("bose_g: fugacity must lie in [0,1]");
    if (s == 1.5) return math::polylog_32(z);
    if (s == 2.5) return math::polylog_52(z);
    throw domain_error("bose_g: exponent must be 3/2 or 5/2");
}

namespace detail {

inline const double kGamma32 = 0.5 * std::sqrt(math::kPi);   // Gamma(3/2)
inline const double kGamma52 = 0.75 * std::sqrt(math::kPi);  // Gamma(5/2)

}  // namespace detail

// Recover (A, kappa, n0) from the moment equations
//     Gamma(3/2) kappa^{3/2} Li_{3/2}(z) = n,
//     Gamma(5/2) kappa^{5/2} Li_{5/2}(z) = e,      z = 1/A.
// Below the transition z pins to 1 and the mass equation is allowed to
// undershoot; the deficit is the condensate.
inline EquilibriumState solve_equilibrium(double n, double e) {
    EquilibriumState st;
    st.n = n;
    st.e = e;
    st.temp_ratio = temp_ratio(n, e);  // validates n > 0, e >= 0

    if (e == 0.0) {
        // Pure Dirac datum, its own branch rather than a kappa -> 0 limit.
        st.a_coef = 1.0;
        st.kappa = 0.0;
        st.n0 = n;
        return st;
    }
    if (st.temp_ratio < 1.0) {
        st.a_coef = 1.0;
        st.kappa = std::pow(e / (detail::kGamma52 * math::kZeta52), 0.4);
        st.n0 = (1.0 - std::pow(st.temp_ratio, 0.6)) * n;
        return st;
    }

    // Above the transition eliminate kappa via the ratio of the moment
    // equations: with mu = log A, g(mu) = Li_{5/2}(e^{-mu}) /
    // Li_{3/2}(e^{-mu})^{5/3} increases strictly from g(0) to +inf, and g(0)
    // corresponds to temp_ratio = 1, so the bracket never fails.  Bisect in
    // v = sqrt(mu), and keep everything in mu-space end to end: Li_{3/2} has
    // a square-root cusp at z = 1, so just past the transition the root sits
    // within one ulp of z = 1 and a double fugacity cannot represent it,
    // while in v the moment functions are smooth with nonvanishing slope.
    const double target = st.temp_ratio * math::kZeta52 / std::pow(math::kZeta32, 5.0 / 3.0);
    auto excess = [&](double v) {
        const double mu = v * v;
        // At huge mu the denominator underflows and the quotient is +inf,
        // which is the right sign for the bracket.
        return math::polylog_52_mu(mu) / std::pow(math::polylog_32_mu(mu), 5.0 / 3.0) - target;
    };

    double mu = 0.0;
    if (excess(0.0) < 0.0) {
        double lo = 0.0, hi = 26.0;  // fugacity down to e^{-676}
        int it = 0;
        for (; it < 200 && hi - lo > 1e-14; ++it) {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) < 0.0 ? lo : hi) = mid;
        }
        if (it >= 200) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "solve_equilibrium: fugacity bisection stalled, residual %.3e",
                          excess(0.5 * (lo + hi)));
            throw numeric_error(buf);
        }
        const double v = 0.5 * (lo + hi);
        mu = v * v;
    }
    st.a_coef = std::exp(mu);  // rounds to 1 within ~1e-16 of the transition
    st.kappa = std::pow(n / (detail::kGamma32 * math::polylog_32_mu(mu)), 2.0 / 3.0);
    st.n0 = 0.0;

    const double e_back = detail::kGamma52 * std::pow(st.kappa, 2.5) * math::polylog_52_mu(mu);
    if (!(std::abs(e_back - e) <= 1e-10 * e)) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "solve_equilibrium: energy equation residual %.3e exceeds 1e-10",
                      std::abs(e_back - e) / e);
        throw numeric_error(buf);
    }
    return st;
}

// 1 / (A e^{x/kappa} - 1), written as A expm1(x/kappa) + (A - 1) so neither
// branch of the denominator cancels.
inline double f_be_density(const EquilibriumState& st, double x) {
    if (!(x >= 0.0)) throw domain_error("f_be_density: x must be nonnegative");
    if (x == 0.0 && st.a_coef == 1.0)
        throw domain_error(
            "f_be_density: pole at x = 0 when A = 1; the condensate atom carries that mass");
    if (st.kappa == 0.0) return 0.0;  // pure condensate, regular part vanishes
    const double denom = st.a_coef * std::expm1(x / st.kappa) + (st.a_coef - 1.0);
    return 1.0 / denom;  // expm1 overflow gives +inf, hence a clean 0
}

namespace detail {

// Leading-order inversion of tail(X) = kappa sqrt(X) e^{-X/kappa} / A = tol,
// used only to phrase the configuration error actionably.
inline double suggested_x_max(const EquilibriumState& st, double tol) {
    double x = std::max(2.0 * st.kappa, 1.0);
    for (int it = 0; it < 60; ++it)
        x = st.kappa * std::log(st.kappa * std::sqrt(x) / (st.a_coef * tol));
    return 1.1 * x;
}

}  // namespace detail

// Project the equilibrium onto a grid: node 0 carries the condensate, node
// i >= 1 the cell integral of f(x) sqrt(x).  The grid must hold all but
// 1e-6 of the regular mass.
inline measure::IsotropicMeasure equilibrium_measure(const EquilibriumState& st,
                                                     std::shared_ptr<const measure::Grid> grid,
                                                     int pts_per_cell = 24) {
    if (!grid) throw domain_error("equilibrium_measure: null grid");
    if (st.e > 0.0) {
        const double x_max = grid->x_max();
        const auto breaks = math::make_breaks(
            x_max, x_max + 80.0 * st.kappa,
            {x_max + 4.0 * st.kappa, x_max + 16.0 * st.kappa, x_max + 40.0 * st.kappa});
        const double tail = math::integrate_segments(
            [&](double x) { return f_be_density(st, x) * std::sqrt(x); }, breaks, 160, 40);
        const double tol = 1e-6 * st.n;
        if (!(tail < tol)) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "equilibrium_measure: tail mass %.3e beyond x_max=%g exceeds %.3e; "
                          "extend x_max to >= %.6g",
                          tail, x_max, tol, detail::suggested_x_max(st, tol));
            throw config_error(buf);
        }
    }
    auto F = measure::project_density([&](double x) { return f_be_density(st, x); },
                                      std::move(grid), pts_per_cell);
    F.masses[0] = st.n0;
    return F;
}

// 4 pi sqrt(2) times the integral of s(f(x)) sqrt(x), where s is the
// Bose-Einstein entropy density.  The condensate contributes nothing.  The
// integrand is log-singular at 0 when A = 1 and decays like x e^{-x/kappa},
// so the panels are geometric in x/kappa; `pts_per_panel` is the sine-mapped
// Gauss-Legendre order on each panel.
inline double equilibrium_entropy(const EquilibriumState& st, int pts_per_panel = 64) {
    if (st.e == 0.0) return 0.0;  // limit value: f vanishes with the energy
    std::vector<double> breaks;
    for (double c : {0.0,  1.0 / 1024, 1.0 / 256, 1.0 / 64, 1.0 / 16, 0.25, 1.0,
                     4.0,  16.0,       48.0,      96.0,     160.0,    256.0})
        breaks.push_back(c * st.kappa);
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s)
        acc += math::integrate_gl_mapped(
            [&](double x) {
                return measure::entropy_of_density(f_be_density(st, x)) * std::sqrt(x);
            },
            breaks[s], breaks[s + 1], pts_per_panel);
    return 4.0 * math::kPi * math::kSqrt2 * acc;
}

}  // namespace bnlab::equilibrium
