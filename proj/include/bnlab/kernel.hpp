#pragma once

// Collision weight W(x,y,z) of the isotropic quantum Boltzmann equation in
// energy variables x = |v|^2/2, the weak-form integrands K[phi] and J[phi],
// their convex-positivity split, and a Monte-Carlo cross-check of the
// reduction from 3D velocity integrals to the energy half-line.
//
// Conventions used throughout:
//   x_* = (y + z - x)_+          (energy exchange partner)
//   W(x,y,z) = W(x,z,y)          (symmetry in the last two arguments)
//   W vanishes whenever y + z <= x with x,y,z > 0, and on all degenerate
//   inputs not covered by the explicit boundary branches.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bnlab/errors.hpp"
#include "bnlab/math.hpp"
#include "bnlab/parallel.hpp"

namespace bnlab::kernel {

enum class PhiKind { hard_sphere, eta_model, tabulated };

// Squared-amplitude model Phi(r, rho) = (phi_hat(r) + phi_hat(rho))^2 with
// 0 <= phi_hat <= 1/2, so 0 <= Phi <= 1.  b0 is the lower-bound constant
// b0 r^eta/(1+r^eta) <= phi_hat(r); it never enters evaluation, only the
// inequality checks that quote it.
class PhiModel {
public:
    static PhiModel hard_sphere() {
        PhiModel m;
        m.kind_ = PhiKind::hard_sphere;
        m.b0_ = 0.5;
        m.eta_ = 0.0;
        m.monotone_ = true;
        return m;
    }

    static PhiModel eta_model(double eta, double b0 = 0.5) {
        if (!(eta >= 0.0 && eta < 1.0))
            throw domain_error("eta_model: eta must lie in [0,1)");
        if (!(b0 > 0.0 && b0 <= 0.5))
            throw domain_error("eta_model: b0 must lie in (0,1/2]");
        PhiModel m;
        m.kind_ = PhiKind::eta_model;
        m.b0_ = b0;
        m.eta_ = eta;
        m.monotone_ = true;
        return m;
    }

    // Piecewise-linear phi_hat from samples; flat extrapolation outside the
    // sampled range.  The monotone flag is detected, not assumed: exchange
    // monotonicity of W only holds for nondecreasing phi_hat, so callers
    // (and tests) consult it before claiming that inequality.
    static PhiModel tabulated(std::vector<double> r, std::vector<double> phi_hat_values) {
        if (r.size() != phi_hat_values.size() || r.size() < 2)
            throw domain_error("tabulated: need matching sample arrays with >= 2 points");
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!std::isfinite(r[i]) || !std::isfinite(phi_hat_values[i]))
                throw domain_error("tabulated: non-finite sample");
            if (i > 0 && !(r[i] > r[i - 1]))
                throw domain_error("tabulated: r samples must increase strictly");
            if (!(phi_hat_values[i] >= 0.0 && phi_hat_values[i] <= 0.5))
                throw domain_error("tabulated: phi_hat samples must lie in [0,1/2]");
        }
        if (r.front() < 0.0) throw domain_error("tabulated: r samples must be >= 0");
        PhiModel m;
        m.kind_ = PhiKind::tabulated;
        m.b0_ = 0.0;
        m.eta_ = 0.0;
        m.monotone_ = std::is_sorted(phi_hat_values.begin(), phi_hat_values.end());
        m.tab_r_ = std::move(r);
        m.tab_v_ = std::move(phi_hat_values);
        return m;
    }

    double phi_hat(double r) const {
        if (!(std::isfinite(r) && r >= 0.0))
            throw domain_error("phi_hat: r must be finite and >= 0");
        switch (kind_) {
            case PhiKind::hard_sphere:
                return 0.5;
            case PhiKind::eta_model: {
                const double p = std::pow(r, eta_);
                return 0.5 * p / (1.0 + p);
            }
            case PhiKind::tabulated: {
                if (r <= tab_r_.front()) return tab_v_.front();
                if (r >= tab_r_.back()) return tab_v_.back();
                const auto it = std::upper_bound(tab_r_.begin(), tab_r_.end(), r);
                const std::size_t hi = static_cast<std::size_t>(it - tab_r_.begin());
                const double t = (r - tab_r_[hi - 1]) / (tab_r_[hi] - tab_r_[hi - 1]);
                return tab_v_[hi - 1] + t * (tab_v_[hi] - tab_v_[hi - 1]);
            }
        }
        throw internal_error("phi_hat: unreachable kind");
    }

    PhiKind kind() const { return kind_; }
    double b0() const { return b0_; }
    double eta() const { return eta_; }
    bool monotone_phi_hat() const { return monotone_; }

    // Stable identity string; collision tables store it to detect reuse of a
    // table built for a different model.
    std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        switch (kind_) {
            case PhiKind::hard_sphere:
                os << "hard_sphere";
                break;
            case PhiKind::eta_model:
                os << "eta_model(eta=" << eta_ << ",b0=" << b0_ << ")";
                break;
            case PhiKind::tabulated: {
                std::uint64_t h = 1469598103934665603ULL;
                auto mix = [&h](double d) {
                    std::uint64_t bits;
                    static_assert(sizeof bits == sizeof d);
                    __builtin_memcpy(&bits, &d, sizeof bits);
                    for (int b = 0; b < 64; b += 8) {
                        h ^= (bits >> b) & 0xffULL;
                        h *= 1099511628211ULL;
                    }
                };
                for (double d : tab_r_) mix(d);
                for (double d : tab_v_) mix(d);
                os << "tabulated(n=" << tab_r_.size() << ",hash=" << h
                   << ",monotone=" << (monotone_ ? 1 : 0) << ")";
                break;
            }
        }
        return os.str();
    }

private:
    PhiModel() = default;
    PhiKind kind_ = PhiKind::hard_sphere;
    double b0_ = 0.5;
    double eta_ = 0.0;
    bool monotone_ = true;
    std::vector<double> tab_r_, tab_v_;
};

struct QuadratureSpec {
    int n_s = 64;      // nodes for the s-integral of the weight
    int n_theta = 64;  // nodes for the theta-integral of the weight
    int n_x = 256;     // total node budget for inner x-integrals

    void validate() const {
        if (n_s < 2 || n_theta < 2 || n_x < 2)
            throw config_error("QuadratureSpec: all node counts must be >= 2");
    }
};

inline double phi(const PhiModel& model, double r, double rho) {
    const double a = model.phi_hat(r) + model.phi_hat(rho);
    return a * a;
}

namespace detail {

// The radicands of Y_* are nonnegative for every s inside the admissible
// bracket; only roundoff can push them below zero.  Values past the
// tolerance mean the caller left the bracket, which is a bug, not data.
inline double clamped_radicand(double v, const char* who) {
    if (v >= 0.0) return v;
    if (v >= -1e-12) return 0.0;
    throw internal_error(std::string(who) + ": radicand below -1e-12; s outside the admissible bracket");
}

// u - ((u - v + s^2)/(2s))^2 in the factored form
//   [(su+sv)^2 - s^2][s^2 - (su-sv)^2] / (4 s^2),  su = sqrt(u), sv = sqrt(v).
// The direct form squares a cancellation at the bracket ends: for near-tied
// arguments the computed radicand comes out wrong by ~1e-7 right where it
// should vanish.  The linear factors subtract exactly there.
inline double bracket_radicand(double u, double v, double s, const char* who) {
    const double su = std::sqrt(u), sv = std::sqrt(v);
    const double plus = su + sv, minus = std::abs(su - sv);
    const double val = (plus - s) * (plus + s) * (s - minus) * (s + minus) / (4.0 * s * s);
    return clamped_radicand(val, who);
}

inline void require_weight_args(double x, double y, double z, const char* who) {
    if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(z)) || x < 0.0 || y < 0.0 || z < 0.0)
        throw domain_error(std::string(who) + ": arguments must be finite and >= 0");
}

// int_0^{2pi} (phs + phi_hat(sqrt2 Y_*(theta)))^2 dtheta with
// Y_*^2 = ra + rb + 2 sqrt(ra rb) cos(theta) = D + C cos^2(theta/2),
// D = (sqrt(ra)-sqrt(rb))^2, C = 4 sqrt(ra rb).
//
// A fixed theta grid fails here: when D is small, Y_* dips toward 0 near
// theta = pi and phi_hat's r^eta behaviour makes the dip arbitrarily sharp,
// which is exactly what breaks the y<->z symmetry of the computed weight for
// near-degenerate triples.  Substituting p = sin(psi), theta = pi - 2 psi and
// then p = m sinh(tau) with m = sqrt(D/C) gives
//
//   I = 4 int_0^T f(sqrt(D) cosh tau) m cosh(tau) / sqrt(1 - m^2 sinh^2 tau) dtau,
//   T = asinh(1/m),
//
// whose integrand is analytic in a tau-strip of half-width pi/2 independent
// of D, so mapped Gauss-Legendre per chunk of length <= 8 converges
// geometrically no matter how degenerate the triple is.  diff is the exact
// value of ra - rb before clamping (the direct difference cancels).
inline double angular_integral(const PhiModel& model, double phs, double ra, double rb,
                               double diff, int n_theta) {
    auto f = [&model, phs](double r) {
        const double amp = phs + model.phi_hat(math::kSqrt2 * r);
        return amp * amp;
    };
    const double sa = std::sqrt(ra), sb = std::sqrt(rb);
    const double ymax = sa + sb;
    const double c = 4.0 * sa * sb;
    if (c == 0.0) return 2.0 * math::kPi * f(ymax);
    const double ymin = std::abs(diff) / ymax;
    const double m = ymin / (2.0 * std::sqrt(sa * sb));
    if (m < 1e-280) {
        // Exact tie (or float-denormal close): Y_* = sqrt(C) p reaches 0 and
        // f carries a bare endpoint power p^eta.  Panels graded toward p = 0
        // confine the power to segments whose total mass is negligible.
        //   I = 4 int_0^1 f(sqrt(C) p) / sqrt(1 - p^2) dp
        const double sc = 2.0 * std::sqrt(sa * sb);
        const int per = std::max(8, n_theta / 4);
        const auto& g = math::sine_mapped(per);
        double acc = 0.0;
        double hi = 1.0;
        for (int k = 0; k < 17; ++k) {
            const double lo = (k + 1 == 17) ? 0.0 : hi * 0.25;
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            double seg = 0.0;
            for (int q = 0; q < per; ++q) {
                const double p = mid + half * g.xi[q];
                const double one_m = (k == 0) ? half * g.hi[q] : 1.0 - p;
                seg += g.jw[q] * f(sc * p) / std::sqrt(one_m * (1.0 + p));
            }
            acc += seg * half;
            hi = lo;
        }
        return 4.0 * acc;
    }
    const double t_end = std::asinh(1.0 / m);
    const int chunks = std::min(std::max(1, static_cast<int>(std::ceil(t_end / 8.0))), 64);
    const auto& g = math::sine_mapped(n_theta);
    double acc = 0.0;
    for (int ch = 0; ch < chunks; ++ch) {
        const double t0 = t_end * ch / chunks, t1 = t_end * (ch + 1) / chunks;
        const double tmid = 0.5 * (t0 + t1), thalf = 0.5 * (t1 - t0);
        double seg = 0.0;
        for (int q = 0; q < n_theta; ++q) {
            const double tau = tmid + thalf * g.xi[q];
            // 1 - m sinh(tau) = 2 m cosh((T+tau)/2) sinh((T-tau)/2); the
            // mapped rule's stable endpoint distance supplies T - tau.
            const double dt = (ch + 1 == chunks) ? thalf * g.hi[q] : t_end - tau;
            const double one_m =
                2.0 * (m * std::cosh(0.5 * (t_end + tau))) * std::sinh(0.5 * dt);
            const double one_p = 1.0 + m * std::sinh(tau);
            seg += g.jw[q] * f(ymin * std::cosh(tau)) * (m * std::cosh(tau)) /
                   std::sqrt(one_m * one_p);
        }
        acc += seg * thalf;
    }
    return 4.0 * acc;
}

}  // namespace detail

// |sqrt((z-q)_+) + e^{i theta} sqrt((x-q)_+)| with q = (x-y+s^2)^2/(4 s^2).
// z - q factors through (z, x_*) because z - x_* = x - y.
inline double y_star(double x, double y, double z, double s, double theta) {
    if (s == 0.0) return 0.0;
    const double xstar = std::max(y + z - x, 0.0);
    const double a = detail::bracket_radicand(z, xstar, s, "y_star");
    const double b = detail::bracket_radicand(x, y, s, "y_star");
    const double m2 = a + b + 2.0 * std::sqrt(a * b) * std::cos(theta);
    return std::sqrt(std::max(m2, 0.0));
}

// Closed form of the weight for Phi == 1: the (s,theta) integral collapses
// to 2pi times the bracket length 2 min{sqrt(x), sqrt(x_*), sqrt(y), sqrt(z)}.
// Serves as the independent oracle for the quadrature path and as the
// universal upper bound W <= W_hard_sphere since Phi <= 1.
inline double w_hard_sphere_closed(double x, double y, double z) {
    detail::require_weight_args(x, y, z, "w_hard_sphere_closed");
    if (x > 0.0 && y > 0.0 && z > 0.0) {
        const double xstar = std::max(y + z - x, 0.0);
        if (xstar == 0.0) return 0.0;
        const double m = std::min(std::min(std::sqrt(x), std::sqrt(xstar)),
                                  std::min(std::sqrt(y), std::sqrt(z)));
        return m / std::sqrt(x * y * z);
    }
    if (x == 0.0 && y > 0.0 && z > 0.0) return 1.0 / std::sqrt(y * z);
    if (y == 0.0 && z > x && x > 0.0) return 1.0 / std::sqrt(x * z);
    if (z == 0.0 && y > x && x > 0.0) return 1.0 / std::sqrt(x * y);
    return 0.0;
}

// W(x,y,z): tensor Gauss-Legendre quadrature over the admissible (s,theta)
// rectangle when x_* x y z > 0; explicit boundary branches when exactly one
// argument vanishes; 0 for everything else.
inline double w(const PhiModel& model, double x, double y, double z,
                const QuadratureSpec& quad = {}) {
    detail::require_weight_args(x, y, z, "w");
    quad.validate();
    const double xstar = std::max(y + z - x, 0.0);
    if (x > 0.0 && y > 0.0 && z > 0.0 && xstar > 0.0) {
        const double sx = std::sqrt(x), sy = std::sqrt(y);
        const double sz = std::sqrt(z), sxs = std::sqrt(xstar);
        const double s0 = std::max(std::abs(sx - sy), std::abs(sxs - sz));
        const double s1 = std::min(sx + sy, sxs + sz);
        if (!(s1 > s0)) return 0.0;
        const double sxp = sx + sy, sxm = std::abs(sx - sy);
        const double szp = sxs + sz, szm = std::abs(sxs - sz);
        auto row = [&](double s) {
            const double s2 = 4.0 * s * s;
            const double ra = detail::clamped_radicand(
                (szp - s) * (szp + s) * (s - szm) * (s + szm) / s2, "w");
            const double rb = detail::clamped_radicand(
                (sxp - s) * (sxp + s) * (s - sxm) * (s + sxm) / s2, "w");
            const double phs = model.phi_hat(math::kSqrt2 * s);
            return detail::angular_integral(model, phs, ra, rb, z - x, quad.n_theta);
        };
        const double norm = 4.0 * math::kPi * std::sqrt(x * y * z);
        if (s0 > 0.0) {
            // s = s0 cosh(sigma).  The row integrand carries sqrt(s - s0)
            // kinks from the vanishing radicands and phi_hat's r^eta power at
            // s = 0; sqrt(s - s0) = sqrt(2 s0) sinh(sigma/2) and s^eta =
            // (s0 cosh sigma)^eta are both analytic in sigma, uniformly in
            // how close s0 is to 0 (near-tied triples make s0 arbitrarily
            // small).  Chunks keep the Bernstein ellipse wide when the
            // sigma-range is long.
            const double sig_end = 2.0 * std::asinh(std::sqrt(0.5 * (s1 - s0) / s0));
            const int chunks =
                std::min(std::max(1, static_cast<int>(std::ceil(sig_end / 8.0))), 64);
            const auto& gs = math::sine_mapped(quad.n_s);
            double acc = 0.0;
            for (int ch = 0; ch < chunks; ++ch) {
                const double a0 = sig_end * ch / chunks, a1 = sig_end * (ch + 1) / chunks;
                const double amid = 0.5 * (a0 + a1), ahalf = 0.5 * (a1 - a0);
                double seg = 0.0;
                for (int a = 0; a < quad.n_s; ++a) {
                    const double sig = amid + ahalf * gs.xi[a];
                    // cosh can overshoot s1 by a few ulp at the far endpoint.
                    const double s = std::min(s0 * std::cosh(sig), s1);
                    seg += gs.jw[a] * row(s) * s0 * std::sinh(sig);
                }
                acc += seg * ahalf;
            }
            return acc / norm;
        }
        // s0 == 0 (x == y and x_* == z): phi_hat's power sits exactly at the
        // endpoint; geometrically graded panels confine it.
        const int per = std::max(8, quad.n_s / 4);
        const auto& gs = math::sine_mapped(per);
        double acc = 0.0;
        double hi = s1;
        for (int k = 0; k < 17; ++k) {
            const double lo = (k + 1 == 17) ? 0.0 : hi * 0.25;
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            double seg = 0.0;
            for (int a = 0; a < per; ++a) seg += gs.jw[a] * row(mid + half * gs.xi[a]);
            acc += seg * half;
            hi = lo;
        }
        return acc / norm;
    }
    if (x == 0.0 && y > 0.0 && z > 0.0)
        return phi(model, std::sqrt(2.0 * y), std::sqrt(2.0 * z)) / std::sqrt(y * z);
    if (y == 0.0 && z > x && x > 0.0)
        return phi(model, std::sqrt(2.0 * x), std::sqrt(2.0 * (z - x))) / std::sqrt(x * z);
    if (z == 0.0 && y > x && x > 0.0)
        return phi(model, std::sqrt(2.0 * (y - x)), std::sqrt(2.0 * x)) / std::sqrt(x * y);
    return 0.0;
}

// phi(x) + phi(x_*) - phi(y) - phi(z); vanishes identically for phi = 1 and
// phi = x on the energy-conserving region y + z >= x.
template <class Phi>
double delta_phi(Phi&& phi_fn, double x, double y, double z) {
    const double xstar = std::max(y + z - x, 0.0);
    return phi_fn(x) + phi_fn(xstar) - phi_fn(y) - phi_fn(z);
}

// Cubic integrand K[phi] = W * delta_phi.  Exactly zero when x equals y or
// z: the exchange is the identity there, and evaluating the product instead
// would leave roundoff noise from x_* = fl(y+z) - y != z.
template <class Phi>
double k_op(const PhiModel& model, Phi&& phi_fn, double x, double y, double z,
            const QuadratureSpec& quad = {}) {
    detail::require_weight_args(x, y, z, "k_op");
    if (x == y || x == z) return 0.0;
    const double wv = w(model, x, y, z, quad);
    if (wv == 0.0) return 0.0;
    return wv * delta_phi(phi_fn, x, y, z);
}

// Quadratic integrand J[phi](y,z) = (1/2) int_0^{y+z} K[phi](x,y,z) sqrt(x) dx.
// The arguments are evaluated in sorted order so J(y,z) and J(z,y) agree
// bit-for-bit.  The x-grid splits at {y, z, (y+z)/2} where the bracket of W
// switches, and at the kinks of phi together with their reflections
// y + z - p (the integrand sees phi through both x and x_*).
template <class Phi>
double j_op(const PhiModel& model, Phi&& phi_fn, double y, double z,
            const QuadratureSpec& quad = {}, std::span<const double> phi_kinks = {}) {
    detail::require_weight_args(0.0, y, z, "j_op");
    quad.validate();
    const double lo = std::min(y, z), hi = std::max(y, z);
    const double total = lo + hi;
    if (!(total > 0.0)) return 0.0;
    std::vector<double> breaks{0.0, total};
    auto push = [&breaks, total](double p) {
        if (p > 0.0 && p < total) breaks.push_back(p);
    };
    push(lo);
    push(hi);
    push(0.5 * total);
    for (double p : phi_kinks) {
        push(p);
        push(total - p);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const double val = math::integrate_segments(
        [&](double x) {
            const double wv = w(model, x, lo, hi, quad);
            return wv == 0.0 ? 0.0 : wv * delta_phi(phi_fn, x, lo, hi) * std::sqrt(x);
        },
        breaks, quad.n_x);
    return 0.5 * val;
}

// Convex-positivity split: for convex phi both parts are nonnegative and
// their triple sums bound the triple sum of K[phi] from below.
//   k1 = 1_{0 <= x < y <= z} chi_{y,z} W(x,y,z) [phi(z+y-x)+phi(z+x-y)-2 phi(z)]
//   k2 = 1_{0 < y <= z < x < y+z} chi_{y,z} W(x,y,z) delta_phi
// with chi = 2 when y < z and 1 when y = z.
template <class Phi>
std::pair<double, double> k_split(const PhiModel& model, Phi&& phi_fn, double x, double y,
                                  double z, const QuadratureSpec& quad = {}) {
    detail::require_weight_args(x, y, z, "k_split");
    const double chi = (y < z) ? 2.0 : 1.0;
    if (x < y && y <= z) {
        const double dsym = phi_fn(z + y - x) + phi_fn(z + x - y) - 2.0 * phi_fn(z);
        return {chi * w(model, x, y, z, quad) * dsym, 0.0};
    }
    if (y > 0.0 && y <= z && z < x && x < y + z)
        return {0.0, chi * w(model, x, y, z, quad) * delta_phi(phi_fn, x, y, z)};
    return {0.0, 0.0};
}

// phi_eps(x) = [(1 - x/eps)_+]^2: the convex cutoff family used by the
// condensation functionals.  C^1 with a second-derivative jump at eps, so
// quadratures should split there; kinks() feeds j_op.
struct QuadraticCutoff {
    double eps;

    explicit QuadraticCutoff(double e) : eps(e) {
        if (!(e > 0.0)) throw domain_error("QuadraticCutoff: eps must be > 0");
    }
    double operator()(double x) const {
        const double t = 1.0 - x / eps;
        return t > 0.0 ? t * t : 0.0;
    }
    std::array<double, 1> kinks() const { return {eps}; }
};

struct McReduceResult {
    double mc_estimate = 0.0;
    double mc_stderr = 0.0;
    double quadrature_value = 0.0;
    std::size_t n_samples = 0;
};

// Cross-check of the velocity-space representation against the
// energy-variable one on a nonnegative test function psi supported in
// [0, support_max]^3:
//
//   MC side:   int B(v - v_*, omega) psi(|v|^2/2, |v'|^2/2, |v_*'|^2/2)
//   quad side: sqrt(2) int 1_{y+z>x} psi(x,y,z) 4 pi sqrt(xyz) W(x,y,z)
//
// Sampling covers psi's support exactly: psi != 0 forces |v| <= sqrt(2 X)
// and |v_*|^2 <= |v'|^2 + |v_*'|^2 <= 4X, so uniform boxes of those radii
// plus a uniform direction carry the full integral.  Samples are drawn in
// fixed-size blocks with per-block generators, so the estimate is
// bit-identical for any thread count.
template <class Psi>
McReduceResult mc_reduce_check(const PhiModel& model, Psi&& psi, double support_max,
                               std::size_t n_samples, std::uint64_t seed,
                               const QuadratureSpec& quad = {}, int threads = 1,
                               int n_outer = 40) {
    if (!(std::isfinite(support_max) && support_max > 0.0))
        throw domain_error("mc_reduce_check: support_max must be finite and > 0");
    if (n_samples < 10000)
        throw domain_error("mc_reduce_check: fewer than 1e4 samples gives a meaningless stderr");
    if (n_outer < 2) throw config_error("mc_reduce_check: n_outer must be >= 2");
    quad.validate();

    const double xm = support_max;
    const double r_v = std::sqrt(2.0 * xm);
    const double r_vs = 2.0 * std::sqrt(xm);
    const double vol_v = 8.0 * r_v * r_v * r_v;
    const double vol_vs = 8.0 * r_vs * r_vs * r_vs;
    const double weight_scale = vol_v * vol_vs * 4.0 * math::kPi;
    const double b_norm = 1.0 / (16.0 * math::kPi * math::kPi);

    struct Acc {
        double sum = 0.0;
        double sumsq = 0.0;
    };
    constexpr std::size_t kBlock = 1 << 16;
    const Acc mc = parallel::block_reduce(
        n_samples, kBlock, threads, Acc{},
        [&](std::size_t begin, std::size_t end, Acc& acc) {
            std::uint64_t state = math::sub_seed(seed, begin / kBlock);
            auto u01 = [&state] {
                return static_cast<double>(math::splitmix64(state) >> 11) * 0x1.0p-53;
            };
            for (std::size_t i = begin; i < end; ++i) {
                double v[3], vs[3];
                for (double& c : v) c = r_v * (2.0 * u01() - 1.0);
                for (double& c : vs) c = r_vs * (2.0 * u01() - 1.0);
                const double cz = 2.0 * u01() - 1.0;
                const double az = 2.0 * math::kPi * u01();
                const double sz = std::sqrt(std::max(1.0 - cz * cz, 0.0));
                const double om[3] = {sz * std::cos(az), sz * std::sin(az), cz};

                const double d[3] = {v[0] - vs[0], v[1] - vs[1], v[2] - vs[2]};
                const double dn = d[0] * om[0] + d[1] * om[1] + d[2] * om[2];
                double x2 = 0.0, y2 = 0.0, z2 = 0.0, d2 = 0.0;
                for (int c = 0; c < 3; ++c) {
                    const double vp = v[c] - dn * om[c];
                    const double vsp = vs[c] + dn * om[c];
                    x2 += v[c] * v[c];
                    y2 += vp * vp;
                    z2 += vsp * vsp;
                    d2 += d[c] * d[c];
                }
                const double pv = psi(0.5 * x2, 0.5 * y2, 0.5 * z2);
                double contrib = 0.0;
                if (pv != 0.0) {
                    const double r1 = std::abs(dn);
                    const double r2 = std::sqrt(std::max(d2 - dn * dn, 0.0));
                    contrib = weight_scale * b_norm * r1 * phi(model, r1, r2) * pv;
                }
                acc.sum += contrib;
                acc.sumsq += contrib * contrib;
            }
        },
        [](Acc& into, const Acc& part) {
            into.sum += part.sum;
            into.sumsq += part.sumsq;
        });

    const double n = static_cast<double>(n_samples);
    const double mean = mc.sum / n;
    const double var = std::max(mc.sumsq / n - mean * mean, 0.0) / (n - 1.0) * n;
    const double serr = std::sqrt(var / n);

    // Energy-variable quadrature: outer tensor rule in (y,z), inner
    // x-integral split where the weight's bracket switches.
    const auto& go = math::gauss_legendre(n_outer);
    const double qv = parallel::block_reduce(
        static_cast<std::size_t>(n_outer), 1, threads, 0.0,
        [&](std::size_t begin, std::size_t end, double& acc) {
            for (std::size_t a = begin; a < end; ++a) {
                const double yv = 0.5 * xm * (1.0 + go.x[a]);
                const double wy = 0.5 * xm * go.w[a];
                double row = 0.0;
                for (int b = 0; b < n_outer; ++b) {
                    const double zv = 0.5 * xm * (1.0 + go.x[b]);
                    const double wz = 0.5 * xm * go.w[b];
                    const double upper = std::min(yv + zv, xm);
                    const auto breaks = math::make_breaks(
                        0.0, upper, {yv, zv, 0.5 * (yv + zv)});
                    const double inner = math::integrate_segments(
                        [&](double xv) {
                            const double pv = psi(xv, yv, zv);
                            if (pv == 0.0) return 0.0;
                            return pv * 4.0 * math::kPi * std::sqrt(xv * yv * zv) *
                                   w(model, xv, yv, zv, quad);
                        },
                        breaks, 2 * n_outer);
                    row += wz * inner;
                }
                acc += wy * row;
            }
        },
        [](double& into, double part) { into += part; });

    McReduceResult out;
    out.mc_estimate = mean;
    out.mc_stderr = serr;
    out.quadrature_value = math::kSqrt2 * qv;
    out.n_samples = n_samples;
    return out;
}

}  // namespace bnlab::kernel
