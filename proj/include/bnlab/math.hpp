#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "bnlab/errors.hpp"

namespace bnlab::math {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;

// ---------------------------------------------------------------------------
// Frozen constants.  Values computed once at 60 significant digits and
// rounded to nearest double; see tests/oracle/gen_constants.py.
// ---------------------------------------------------------------------------

inline constexpr double kZeta32 = 2.612375348685488;   // zeta(3/2)
inline constexpr double kZeta52 = 1.341487257250917;   // zeta(5/2)

// zeta(s - k) coefficient tables for the expansion of Li_s around z = 1,
// s = 3/2 and 5/2.  Term k of the expansion is zeta(s-k) mu^k / k! with
// mu = log z; for |mu| <= log 2 the k-th term is O((|mu|/2pi)^k), so 30
// terms leave a tail below 1e-25.
inline constexpr double kZeta32Minus[30] = {
    2.612375348685488, -1.4603545088095868, -0.20788622497735457,
    -0.025485201889833036, 0.008516928777850331, 0.004441011335479432,
    -0.0030916692472158338, -0.0026714580198992244, 0.0027467679395368687,
    0.00326903957260022, -0.00441603287300489, -0.006672172296466641,
    0.011146122473942813, 0.02039697871594279, -0.04057496748119458,
    -0.08717525590621725, 0.2011740493842269, 0.4962712199120576,
    -1.303229250705114, -3.629759299774574, 10.687327069021993,
    33.168325785694606, -108.21747505877606, -370.3018783754786,
    1326.0458117490157, 4959.598315043044, -19338.94198837462,
    -78486.1485692177, 331023.6487454503, 1448811.3705827263,
};

inline constexpr double kZeta52Minus[30] = {
    1.341487257250917, 2.612375348685488, -1.4603545088095868,
    -0.20788622497735457, -0.025485201889833036, 0.008516928777850331,
    0.004441011335479432, -0.0030916692472158338, -0.0026714580198992244,
    0.0027467679395368687, 0.00326903957260022, -0.00441603287300489,
    -0.006672172296466641, 0.011146122473942813, 0.02039697871594279,
    -0.04057496748119458, -0.08717525590621725, 0.2011740493842269,
    0.4962712199120576, -1.303229250705114, -3.629759299774574,
    10.687327069021993, 33.168325785694606, -108.21747505877606,
    -370.3018783754786, 1326.0458117490157, 4959.598315043044,
    -19338.94198837462, -78486.1485692177, 331023.6487454503,
};

inline constexpr double kGammaMinusHalf = -3.544907701811032;   // Gamma(-1/2)
inline constexpr double kGammaMinus3Half = 2.363271801207355;   // Gamma(-3/2)

// (2 pi)^{1/3} zeta(3/2)^{5/3} / (3 zeta(5/2)): the coefficient turning e/n^{5/3}
// into the temperature ratio T/T_c that separates condensing from regular data.
inline constexpr double kCriticalRatioCoeff = 2.272016309694181;

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature on [-1, 1], cached per node count.
// ---------------------------------------------------------------------------

struct GaussLegendre {
    std::vector<double> x;  // nodes, ascending
    std::vector<double> w;  // weights, positive
};

inline GaussLegendre make_gauss_legendre(int n) {
    if (n < 1) throw domain_error("gauss_legendre: node count must be >= 1");
    GaussLegendre g;
    g.x.assign(n, 0.0);
    g.w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton from the Chebyshev-like initial guess; converges to ~1 ulp.
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
            }
            dp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        g.x[i] = -x;
        g.x[n - 1 - i] = x;
        double wv = 2.0 / ((1.0 - x * x) * dp * dp);
        g.w[i] = wv;
        g.w[n - 1 - i] = wv;
    }
    return g;
}

inline const GaussLegendre& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

template <class F>
double integrate_gl(F&& f, double a, double b, const GaussLegendre& g) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t q = 0; q < g.x.size(); ++q) acc += g.w[q] * f(mid + half * g.x[q]);
    return acc * half;
}

// Gauss-Legendre after the substitution xi = sin(pi u / 2).  The Jacobian
// vanishes quadratically at the endpoints, which turns integrands with
// endpoint behavior sqrt(b - t) or sqrt(t - a) (ubiquitous here: vanishing
// radicands at quadrature brackets, the sqrt(x) measure at x = 0) back into
// smooth ones, keeping spectral convergence.
struct SineMappedRule {
    std::vector<double> xi;  // sin(pi x_q / 2), ascending in (-1, 1)
    std::vector<double> jw;  // w_q * (pi/2) cos(pi x_q / 2)
    // Distances to the endpoints, 1 + xi and 1 - xi, computed through
    // half-angle identities: the naive subtraction loses all digits exactly
    // where integrands with endpoint singularities need them most.
    std::vector<double> lo;
    std::vector<double> hi;
};

inline const SineMappedRule& sine_mapped(int n) {
    static std::mutex mu;
    static std::map<int, SineMappedRule> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) {
        const GaussLegendre g = make_gauss_legendre(n);
        SineMappedRule r;
        r.xi.resize(g.x.size());
        r.jw.resize(g.x.size());
        r.lo.resize(g.x.size());
        r.hi.resize(g.x.size());
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            const double h = 0.5 * kPi * g.x[q];
            const double s2 = std::sin(0.5 * h), c2 = std::cos(0.5 * h);
            r.xi[q] = std::sin(h);
            r.jw[q] = g.w[q] * 0.5 * kPi * std::cos(h);
            r.lo[q] = (s2 + c2) * (s2 + c2);  // 1 + sin(h)
            r.hi[q] = (c2 - s2) * (c2 - s2);  // 1 - sin(h)
        }
        it = cache.emplace(n, std::move(r)).first;
    }
    return it->second;
}

template <class F>
double integrate_gl_mapped(F&& f, double a, double b, int n) {
    const auto& r = sine_mapped(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t q = 0; q < r.xi.size(); ++q) acc += r.jw[q] * f(mid + half * r.xi[q]);
    return acc * half;
}

// Composite sine-mapped rule over consecutive breakpoints.  `pts_total` is
// a budget distributed proportionally to segment length, at least `pts_min`
// each; the layout is a pure function of the breakpoints, so results are
// reproducible.
template <class F>
double integrate_segments(F&& f, std::span<const double> breaks, int pts_total,
                          int pts_min = 4) {
    if (breaks.size() < 2) return 0.0;
    const double total = breaks.back() - breaks.front();
    if (!(total > 0)) return 0.0;
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double a = breaks[s], b = breaks[s + 1];
        if (!(b > a)) continue;
        int pts = std::max(pts_min, static_cast<int>(std::lround(pts_total * (b - a) / total)));
        acc += integrate_gl_mapped(f, a, b, pts);
    }
    return acc;
}

// Deduplicating sort for breakpoint lists; drops points outside [lo, hi].
inline std::vector<double> make_breaks(double lo, double hi, std::initializer_list<double> pts) {
    std::vector<double> v{lo, hi};
    for (double p : pts)
        if (p > lo && p < hi) v.push_back(p);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// ---------------------------------------------------------------------------
// Bose functions Li_s(z), s in {3/2, 5/2}, z in [0, 1].
// Absolute error below 1e-13 everywhere:
//   z <= 1/2  : direct series sum z^k / k^s (geometric tail)
//   z  > 1/2  : Li_s(e^mu) = Gamma(1-s)(-mu)^(s-1) + sum_k zeta(s-k) mu^k/k!
// ---------------------------------------------------------------------------

namespace detail {

inline double polylog_direct(double s, double z) {
    double acc = 0.0, zk = 1.0;
    for (int k = 1; k <= 64; ++k) {
        zk *= z;
        acc += zk * std::pow(static_cast<double>(k), -s);
    }
    return acc;
}

inline double polylog_near_one(const double (&zeta_tab)[30], double gamma_factor,
                               double s_minus_1, double neg_mu) {
    // neg_mu = -log z in [0, log 2); taking it directly keeps full precision
    // where z itself would round to 1.
    double acc = gamma_factor * std::pow(neg_mu, s_minus_1);
    double term = 1.0;                      // (-neg_mu)^k / k!
    for (int k = 0; k < 30; ++k) {
        acc += zeta_tab[k] * term;
        term *= -neg_mu / (k + 1);
    }
    return acc;
}

}  // namespace detail

// Li_s(e^{-mu}) for mu >= 0.  The fugacity-space functions below forward
// here; solvers that track mu = log A themselves should call these directly,
// because near the transition the root sits within one ulp of z = 1 and a
// double fugacity cannot carry it.
inline double polylog_32_mu(double mu) {
    if (!(mu >= 0.0)) throw domain_error("polylog_32_mu: mu must be nonnegative");
    if (mu == 0.0) return kZeta32;
    if (mu >= 0.6931471805599453) return detail::polylog_direct(1.5, std::exp(-mu));
    return detail::polylog_near_one(kZeta32Minus, kGammaMinusHalf, 0.5, mu);
}

inline double polylog_52_mu(double mu) {
    if (!(mu >= 0.0)) throw domain_error("polylog_52_mu: mu must be nonnegative");
    if (mu == 0.0) return kZeta52;
    if (mu >= 0.6931471805599453) return detail::polylog_direct(2.5, std::exp(-mu));
    return detail::polylog_near_one(kZeta52Minus, kGammaMinus3Half, 1.5, mu);
}

inline double polylog_32(double z) {
    if (!(z >= 0.0 && z <= 1.0)) throw domain_error("polylog_32: z must lie in [0,1]");
    if (z == 0.0) return 0.0;
    if (z == 1.0) return kZeta32;
    if (z <= 0.5) return detail::polylog_direct(1.5, z);
    return detail::polylog_near_one(kZeta32Minus, kGammaMinusHalf, 0.5, -std::log(z));
}

inline double polylog_52(double z) {
    if (!(z >= 0.0 && z <= 1.0)) throw domain_error("polylog_52: z must lie in [0,1]");
    if (z == 0.0) return 0.0;
    if (z == 1.0) return kZeta52;
    if (z <= 0.5) return detail::polylog_direct(2.5, z);
    return detail::polylog_near_one(kZeta52Minus, kGammaMinus3Half, 1.5, -std::log(z));
}

// ---------------------------------------------------------------------------
// Small utilities.
// ---------------------------------------------------------------------------

// erf(hi) - erf(lo) without cancellation when both arguments sit in one tail.
inline double erf_diff(double lo, double hi) {
    if (lo > 0.0 && hi > 0.0) return std::erfc(lo) - std::erfc(hi);
    if (lo < 0.0 && hi < 0.0) return std::erfc(-hi) - std::erfc(-lo);
    return std::erf(hi) - std::erf(lo);
}

// SplitMix64; used to derive independent sub-seeds for parallel blocks.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed + 0x632be59bd9b4e019ULL * (index + 1);
    return splitmix64(s);
}

}  // namespace bnlab::math
