#pragma once

// Time evolution of an IsotropicMeasure by a conservative Galerkin projection
// of the collision operator's weak form onto the piecewise-linear hat basis
// {h_i} over the grid nodes (h_i(x_j) = delta_ij).
//
// The hats form a partition of unity and reproduce linear functions exactly
// on [0, x_max], so with the bounded-energy truncation (pairs with
// x_j + x_k > x_max dropped from both sums) every collision exchange keeps
// all four arguments inside [0, x_max] and conserves mass and energy to
// roundoff by construction, not by quadrature accuracy.  The continuum weak
// formulation tests against C^{1,1} functions; hats are only C^0, so the
// scheme is defined directly as the Galerkin projection below and is not
// claimed to instantiate the continuum definition.
//
//   dm_i/dt = sum_{j<=k} sym m_j m_k J[h_i](x_j, x_k)
//           + sum_{l, j<=k} sym m_l m_j m_k W(x_l, x_j, x_k) Dh_i(x_l, x_j, x_k)
//
// with J[phi](y, z) = 1/2 int_0^{y+z} W(x,y,z) Dphi(x,y,z) sqrt(x) dx and
// Dphi(x,y,z) = phi(x) + phi(x_*) - phi(y) - phi(z), x_* = y + z - x.  Node 0
// participates through h_0 and the x=0 / y=0 boundary branches of W; the
// condensate exchange is already contained in the weak form and needs no
// separate equation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bnlab/diagnostics.hpp"
#include "bnlab/errors.hpp"
#include "bnlab/kernel.hpp"
#include "bnlab/math.hpp"
#include "bnlab/measure.hpp"
#include "bnlab/parallel.hpp"

namespace bnlab::solver {

// ---------------------------------------------------------------------------
// Collision tables.
// ---------------------------------------------------------------------------

struct TableOptions {
    kernel::QuadratureSpec quad{};
    std::size_t memory_cap_bytes = std::size_t{512} << 20;
    bool on_the_fly = false;  // skip the W table, recompute per triple
    int threads = 1;
};

// Precomputed kernel data for one (model, grid) pair.
//
// pairs lists all (j <= k), j = 0 included, with x_j + x_k <= x_max.  For
// pair p, j_val[j_off[p] + i] holds J[h_i](x_j, x_k) for i in [0, ilen_p) and
// k_val[k_off[p] + l] holds W(x_l, x_j, x_k) for l in [0, lmax_p].  In
// on-the-fly mode k_val stays empty and rhs recomputes W per triple through
// the same code path, so the results are bit-identical, only slower.
struct CollisionTable {
    std::shared_ptr<const measure::Grid> grid;
    kernel::PhiModel model;
    kernel::QuadratureSpec quad;
    std::string model_id;

    struct PairEntry {
        std::uint32_t j = 0, k = 0;
        std::uint32_t lmax = 0;  // last node index with x_l <= x_j + x_k
        std::uint32_t ilen = 0;  // hat column length (deposits reach node ilen-1)
    };
    std::vector<PairEntry> pairs;
    std::vector<std::size_t> j_off, k_off;
    std::vector<double> j_val;
    std::vector<double> k_val;
    bool on_the_fly = false;
    double w_max = 0.0;  // largest tabulated weight, feeds the step-size guard
    std::size_t bytes = 0;

    double weight(std::size_t p, std::size_t l) const {
        if (!on_the_fly) return k_val[k_off[p] + l];
        const auto& nodes = grid->nodes;
        const PairEntry& pe = pairs[p];
        if (model.kind() == kernel::PhiKind::hard_sphere)
            return kernel::w_hard_sphere_closed(nodes[l], nodes[pe.j], nodes[pe.k]);
        return kernel::w(model, nodes[l], nodes[pe.j], nodes[pe.k], quad);
    }
};

namespace detail {

// Index of the cell containing x: nodes[cell-1] <= x <= nodes[cell], clamped
// to the last cell for x at the top node.
inline std::size_t cell_of(const std::vector<double>& nodes, double x) {
    const std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(nodes.begin(), nodes.end(), x) - nodes.begin());
    return std::min(std::max<std::size_t>(idx, 1), nodes.size() - 1);
}

// One pair's hat-projected quadratic kernel column: col[i] = J[h_i](x_j,x_k).
// A single x-quadrature pass scatters every point into the (at most four)
// hats it touches, so the column costs one W evaluation per point no matter
// how many hats overlap the interval.  Segment breaks sit at every grid node
// in (0, s), their reflections s - node (the x_* hat kinks), and the weight's
// own kink at s/2; within a segment both x and s - x stay inside fixed cells
// and the integrand is smooth up to endpoint square roots, which the
// sine-mapped rule absorbs.
inline void j_column(const kernel::PhiModel& model, const measure::Grid& g,
                     std::uint32_t j, std::uint32_t k, const kernel::QuadratureSpec& quad,
                     double* col, std::size_t ilen) {
    const auto& nodes = g.nodes;
    const double s = nodes[j] + nodes[k];
    const bool hs = model.kind() == kernel::PhiKind::hard_sphere;

    std::vector<double> breaks;
    breaks.push_back(0.0);
    for (std::size_t i = 1; i < nodes.size() && nodes[i] < s; ++i) {
        breaks.push_back(nodes[i]);
        breaks.push_back(s - nodes[i]);
    }
    breaks.push_back(0.5 * s);
    breaks.push_back(s);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    double total = 0.0;  // running integral of 1/2 sqrt(x) W, subtracted at j and k
    for (std::size_t seg = 0; seg + 1 < breaks.size(); ++seg) {
        const double lo = breaks[seg], hi = breaks[seg + 1];
        const double len = hi - lo;
        if (!(len > 0.0)) continue;
        int pts = static_cast<int>(static_cast<double>(quad.n_x) * len / s + 0.5);
        pts = std::min(std::max(pts, 6), 64);
        const auto& rule = math::sine_mapped(pts);
        const double mid = 0.5 * (lo + hi), half = 0.5 * len;

        const std::size_t cx = cell_of(nodes, mid);
        const std::size_t cs = cell_of(nodes, s - mid);
        const double wx = nodes[cx] - nodes[cx - 1];
        const double ws = nodes[cs] - nodes[cs - 1];
        for (std::size_t q = 0; q < rule.xi.size(); ++q) {
            const double x = mid + half * rule.xi[q];
            const double wv = hs ? kernel::w_hard_sphere_closed(x, nodes[j], nodes[k])
                                 : kernel::w(model, x, nodes[j], nodes[k], quad);
            if (wv == 0.0) continue;
            const double v = 0.5 * rule.jw[q] * half * std::sqrt(x) * wv;
            total += v;
            const double tx = (x - nodes[cx - 1]) / wx;
            col[cx] += v * tx;
            col[cx - 1] += v * (1.0 - tx);
            const double xs = s - x;
            const double ts = (xs - nodes[cs - 1]) / ws;
            col[cs] += v * ts;
            col[cs - 1] += v * (1.0 - ts);
        }
    }
    (void)ilen;
    col[j] -= total;
    col[k] -= total;
}

}  // namespace detail

inline CollisionTable build_tables(const kernel::PhiModel& model,
                                   std::shared_ptr<const measure::Grid> grid,
                                   const TableOptions& opts = {}) {
    if (!grid) throw domain_error("build_tables: null grid");
    opts.quad.validate();
    const measure::Grid& g = *grid;
    const auto& nodes = g.nodes;
    const std::size_t n = g.size();
    const double x_max = g.x_max();

    CollisionTable tab{grid, model, opts.quad, model.describe(), {}, {}, {}, {}, {},
                       opts.on_the_fly, 0.0, 0};

    for (std::uint32_t j = 0; j < n; ++j) {
        if (nodes[j] * 2.0 > x_max) break;
        for (std::uint32_t k = j; k < n && nodes[j] + nodes[k] <= x_max; ++k) {
            if (j == 0 && k == 0) continue;  // s = 0: empty integral, W = 0
            const double s = nodes[j] + nodes[k];
            const std::uint32_t lmax = static_cast<std::uint32_t>(
                std::upper_bound(nodes.begin(), nodes.end(), s) - nodes.begin() - 1);
            const std::uint32_t ilen =
                std::min(static_cast<std::uint32_t>(n), lmax + 2);
            tab.pairs.push_back({j, k, lmax, ilen});
        }
    }

    tab.j_off.resize(tab.pairs.size());
    tab.k_off.resize(tab.pairs.size());
    std::size_t jn = 0, kn = 0;
    for (std::size_t p = 0; p < tab.pairs.size(); ++p) {
        tab.j_off[p] = jn;
        tab.k_off[p] = kn;
        jn += tab.pairs[p].ilen;
        if (!opts.on_the_fly) kn += tab.pairs[p].lmax + 1;
    }
    tab.bytes = sizeof(double) * (jn + kn) + sizeof(CollisionTable::PairEntry) * tab.pairs.size();
    if (tab.bytes > opts.memory_cap_bytes) {
        std::ostringstream os;
        os << "build_tables: tables need " << tab.bytes << " bytes ("
           << tab.pairs.size() << " pairs on " << n
           << " nodes), above the cap of " << opts.memory_cap_bytes
           << "; raise the cap or enable on-the-fly mode";
        throw config_error(os.str());
    }
    tab.j_val.assign(jn, 0.0);
    tab.k_val.assign(kn, 0.0);

    const bool hs = model.kind() == kernel::PhiKind::hard_sphere;
    struct MaxW {
        double v = 0.0;
    };
    const MaxW found = parallel::block_reduce(
        tab.pairs.size(), 16, opts.threads, MaxW{},
        [&](std::size_t begin, std::size_t end, MaxW& acc) {
            for (std::size_t p = begin; p < end; ++p) {
                const auto& pe = tab.pairs[p];
                detail::j_column(model, g, pe.j, pe.k, opts.quad,
                                 tab.j_val.data() + tab.j_off[p], pe.ilen);
                for (std::uint32_t l = 0; l <= pe.lmax; ++l) {
                    const double wv =
                        hs ? kernel::w_hard_sphere_closed(nodes[l], nodes[pe.j], nodes[pe.k])
                           : kernel::w(model, nodes[l], nodes[pe.j], nodes[pe.k], opts.quad);
                    if (!opts.on_the_fly) tab.k_val[tab.k_off[p] + l] = wv;
                    acc.v = std::max(acc.v, wv);
                }
            }
        },
        [](MaxW& into, const MaxW& part) { into.v = std::max(into.v, part.v); });
    tab.w_max = found.v;
    return tab;
}

inline CollisionTable build_tables(const kernel::PhiModel& model,
                                   std::shared_ptr<const measure::Grid> grid,
                                   const kernel::QuadratureSpec& quad) {
    TableOptions opts;
    opts.quad = quad;
    return build_tables(model, std::move(grid), opts);
}

// ---------------------------------------------------------------------------
// Right-hand side.
// ---------------------------------------------------------------------------

// Mass rates dm/dt.  Pure function; the pair loop parallelizes over fixed
// blocks folded in block order, so the result is bit-identical for any
// thread count.  Conservation (sum dm_i = 0, sum x_i dm_i = 0) holds to
// roundoff: the quadratic columns scatter through a partition of unity, and
// the cubic deposits split x_* between its bracketing nodes, reproducing
// x_l + x_* - x_j - x_k = 0 exactly.
inline std::vector<double> rhs(const measure::IsotropicMeasure& F, const CollisionTable& tab,
                               int threads = 1) {
    if (!F.grid || !tab.grid) throw domain_error("rhs: missing grid");
    if (F.grid.get() != tab.grid.get() && !(*F.grid == *tab.grid))
        throw domain_error("rhs: measure and table live on different grids");
    const auto& nodes = tab.grid->nodes;
    const std::size_t n = nodes.size();
    if (F.masses.size() > n) throw domain_error("rhs: more masses than grid nodes");
    std::vector<double> padded;  // short mass vectors read as zero past the end
    const std::vector<double>* mp = &F.masses;
    if (F.masses.size() < n) {
        padded = F.masses;
        padded.resize(n, 0.0);
        mp = &padded;
    }
    const auto& m = *mp;

    struct Acc {
        std::vector<double> v;
    };
    Acc zero;
    zero.v.assign(n, 0.0);
    Acc out = parallel::block_reduce(
        tab.pairs.size(), 128, threads, zero,
        [&](std::size_t begin, std::size_t end, Acc& acc) {
            double* dm = acc.v.data();
            for (std::size_t p = begin; p < end; ++p) {
                const auto& pe = tab.pairs[p];
                const double sym = pe.j == pe.k ? 1.0 : 2.0;
                const double qf = sym * m[pe.j] * m[pe.k];
                if (qf == 0.0) continue;

                const double* col = tab.j_val.data() + tab.j_off[p];
                for (std::uint32_t i = 0; i < pe.ilen; ++i) dm[i] += qf * col[i];

                const double s = nodes[pe.j] + nodes[pe.k];
                std::size_t cell = detail::cell_of(nodes, s);
                for (std::uint32_t l = 0; l <= pe.lmax; ++l) {
                    if (m[l] == 0.0) continue;
                    const double wv = tab.weight(p, l);
                    if (wv == 0.0) continue;
                    const double c = qf * m[l] * wv;
                    const double xs = s - nodes[l];
                    while (cell > 1 && nodes[cell - 1] > xs) --cell;
                    const double t =
                        (xs - nodes[cell - 1]) / (nodes[cell] - nodes[cell - 1]);
                    dm[l] += c;
                    dm[cell] += c * t;
                    dm[cell - 1] += c * (1.0 - t);
                    dm[pe.j] -= c;
                    dm[pe.k] -= c;
                }
            }
        },
        [n](Acc& into, const Acc& part) {
            for (std::size_t i = 0; i < n; ++i) into.v[i] += part.v[i];
        });
    return std::move(out.v);
}

// ---------------------------------------------------------------------------
// Explicit stepping.
// ---------------------------------------------------------------------------

enum class Integrator { euler, rk4, ssp_rk3 };

inline Integrator integrator_from_name(const std::string& name) {
    if (name == "euler") return Integrator::euler;
    if (name == "rk4") return Integrator::rk4;
    if (name == "ssp_rk3") return Integrator::ssp_rk3;
    throw config_error("unknown integrator '" + name + "' (euler, rk4, ssp_rk3)");
}

struct StepResult {
    measure::IsotropicMeasure state;
    int halvings = 0;     // deepest step-halving level used
    double clipped = 0.0; // total negative mass clipped to zero
};

namespace detail {

inline std::vector<double> stage(const std::vector<double>& base, double coef,
                                 const std::vector<double>& rate) {
    std::vector<double> out(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + coef * rate[i];
    return out;
}

inline std::vector<double> advance_once(const std::vector<double>& m0, double dt,
                                        Integrator integ, const CollisionTable& tab,
                                        std::shared_ptr<const measure::Grid> grid,
                                        int threads) {
    auto eval = [&](const std::vector<double>& m) {
        return rhs(measure::IsotropicMeasure{grid, m}, tab, threads);
    };
    switch (integ) {
        case Integrator::euler:
            return stage(m0, dt, eval(m0));
        case Integrator::rk4: {
            const auto k1 = eval(m0);
            const auto k2 = eval(stage(m0, 0.5 * dt, k1));
            const auto k3 = eval(stage(m0, 0.5 * dt, k2));
            const auto k4 = eval(stage(m0, dt, k3));
            std::vector<double> out(m0.size());
            for (std::size_t i = 0; i < m0.size(); ++i)
                out[i] = m0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            return out;
        }
        case Integrator::ssp_rk3: {
            const auto u1 = stage(m0, dt, eval(m0));
            const auto u1r = eval(u1);
            std::vector<double> u2(m0.size());
            for (std::size_t i = 0; i < m0.size(); ++i)
                u2[i] = 0.75 * m0[i] + 0.25 * (u1[i] + dt * u1r[i]);
            const auto u2r = eval(u2);
            std::vector<double> out(m0.size());
            for (std::size_t i = 0; i < m0.size(); ++i)
                out[i] = m0[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * u2r[i]);
            return out;
        }
    }
    throw internal_error("advance_once: unreachable integrator");
}

// Zero out sub-tolerance negatives and restore the pre-step mass and energy
// through the two largest cells (distinct nodes, hence an invertible 2x2
// system).  The corrections are of clip size, far below the carrier masses.
inline double clip_and_repair(std::vector<double>& m, const std::vector<double>& nodes,
                              double n_ref, double e_ref) {
    double clipped = 0.0;
    for (double& mi : m)
        if (mi < 0.0) {
            clipped -= mi;
            mi = 0.0;
        }
    double dn = n_ref, de = e_ref;
    for (std::size_t i = 0; i < m.size(); ++i) {
        dn -= m[i];
        de -= nodes[i] * m[i];
    }
    if (dn == 0.0 && de == 0.0) return clipped;
    std::size_t a = 0, b = 1;
    double ma = -1.0, mb = -1.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] > ma) {
            b = a;
            mb = ma;
            a = i;
            ma = m[i];
        } else if (m[i] > mb) {
            b = i;
            mb = m[i];
        }
    }
    const double xa = nodes[a], xb = nodes[b];
    const double db = (de - xa * dn) / (xb - xa);
    m[a] += dn - db;
    m[b] += db;
    return clipped;
}

struct AttemptResult {
    std::vector<double> m;
    int depth = 0;
    double clipped = 0.0;
};

inline AttemptResult attempt(const std::vector<double>& m0, double dt, Integrator integ,
                             const CollisionTable& tab,
                             const std::shared_ptr<const measure::Grid>& grid,
                             double positivity_tol, int threads, int depth) {
    const auto& nodes = grid->nodes;
    double n_ref = 0.0, e_ref = 0.0;
    for (std::size_t i = 0; i < m0.size(); ++i) {
        n_ref += m0[i];
        e_ref += nodes[i] * m0[i];
    }

    auto m1 = advance_once(m0, dt, integ, tab, grid, threads);
    double worst = 0.0;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < m1.size(); ++i)
        if (m1[i] < worst) {
            worst = m1[i];
            worst_i = i;
        }
    if (worst < -positivity_tol * n_ref) {
        if (depth >= 20) {
            std::ostringstream os;
            os << "step: node " << worst_i << " (x = " << nodes[worst_i]
               << ") still reaches mass " << worst << " after 20 step halvings; "
               << "the problem is too stiff for dt = " << dt << " at this tolerance";
            throw numeric_error(os.str());
        }
        AttemptResult first = attempt(m0, 0.5 * dt, integ, tab, grid, positivity_tol,
                                      threads, depth + 1);
        AttemptResult second = attempt(first.m, 0.5 * dt, integ, tab, grid,
                                       positivity_tol, threads, depth + 1);
        second.depth = std::max(first.depth, second.depth);
        second.clipped += first.clipped;
        return second;
    }
    AttemptResult res;
    res.clipped = clip_and_repair(m1, nodes, n_ref, e_ref);
    res.m = std::move(m1);
    res.depth = depth;
    return res;
}

}  // namespace detail

// Advance exactly dt, splitting into halved substeps when positivity fails.
inline StepResult step(const measure::IsotropicMeasure& F, double dt, Integrator integ,
                       const CollisionTable& tab, double positivity_tol = 1e-9,
                       int threads = 1) {
    if (!(dt > 0.0)) throw domain_error("step: dt must be positive");
    if (!(positivity_tol >= 0.0)) throw domain_error("step: positivity_tol must be >= 0");
    if (!F.grid) throw domain_error("step: measure has no grid");
    if (F.masses.size() > F.grid->size())
        throw domain_error("step: more masses than grid nodes");
    std::vector<double> m0 = F.masses;
    m0.resize(F.grid->size(), 0.0);
    auto res = detail::attempt(m0, dt, integ, tab, F.grid, positivity_tol, threads, 0);
    StepResult out;
    out.state = measure::IsotropicMeasure{F.grid, std::move(res.m)};
    out.halvings = res.depth;
    out.clipped = res.clipped;
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory driver.
// ---------------------------------------------------------------------------

struct SolverConfig {
    Integrator integrator = Integrator::rk4;
    double dt = 1e-3;
    double t_end = 1.0;
    std::size_t output_stride = 100;  // sample every this many steps
    double positivity_tol = 1e-9;
    double eps_ref = 0.5;           // reference eps for the n02 column
    double dissipation_cap = 1e12;  // cap for the dissipation's infinite branch
    double monitor_tol = 1e-6;
    int threads = 1;

    void validate() const {
        if (!(dt > 0.0)) throw config_error("solver config: dt must be positive");
        if (!(t_end >= 0.0)) throw config_error("solver config: t_end must be >= 0");
        if (output_stride == 0) throw config_error("solver config: output_stride must be >= 1");
        if (!(positivity_tol >= 0.0))
            throw config_error("solver config: positivity_tol must be >= 0");
        if (!(eps_ref > 0.0)) throw config_error("solver config: eps_ref must be positive");
        if (!(dissipation_cap > 0.0))
            throw config_error("solver config: dissipation_cap must be positive");
        if (!(monitor_tol > 0.0))
            throw config_error("solver config: monitor_tol must be positive");
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<measure::IsotropicMeasure> states;
    std::vector<diagnostics::DiagnosticsRecord> records;
    diagnostics::ReferenceState reference;
    diagnostics::MonitorReport monitor;
    double max_mass_drift = 0.0;    // max |N(t) - N(0)| / N(0) over samples
    double max_energy_drift = 0.0;  // max |E(t) - E(0)| / E(0) over samples
    long long halvings = 0;
    double clipped = 0.0;
};

inline Trajectory run(const measure::IsotropicMeasure& F0, const kernel::PhiModel& model,
                      const CollisionTable& tab, const SolverConfig& cfg) {
    cfg.validate();
    if (!F0.grid) throw domain_error("run: initial data has no grid");
    if (F0.grid.get() != tab.grid.get() && !(*F0.grid == *tab.grid))
        throw domain_error("run: initial data and table live on different grids");
    if (model.describe() != tab.model_id)
        throw config_error("run: table was built for model " + tab.model_id +
                           ", not " + model.describe());
    for (double mi : F0.masses)
        if (!(mi >= 0.0)) throw domain_error("run: initial masses must be nonnegative");

    const double n0 = measure::mass(F0);
    const double e0 = measure::energy(F0);
    const double rate = cfg.dt * (n0 + n0 * n0) * tab.w_max;
    if (rate > 0.5) {
        std::ostringstream os;
        os << "run: dt (N + N^2) max W = " << rate
           << " exceeds 0.5; reduce dt below " << 0.5 / ((n0 + n0 * n0) * tab.w_max);
        throw config_error(os.str());
    }

    Trajectory traj;
    traj.reference = diagnostics::make_reference(F0);

    measure::IsotropicMeasure F = F0;
    if (F.masses.size() > F.grid->size())
        throw domain_error("run: more masses than grid nodes");
    F.masses.resize(F.grid->size(), 0.0);
    double t = 0.0;
    double s_prev = 0.0;
    auto sample = [&](bool first) {
        auto rec = diagnostics::record(F, t, traj.reference, cfg.eps_ref, model, tab.quad,
                                       cfg.dissipation_cap, cfg.threads);
        rec.ds = first ? 0.0 : rec.s - s_prev;
        s_prev = rec.s;
        if (n0 > 0.0)
            traj.max_mass_drift = std::max(traj.max_mass_drift, std::abs(rec.n - n0) / n0);
        if (e0 > 0.0)
            traj.max_energy_drift =
                std::max(traj.max_energy_drift, std::abs(rec.e - e0) / e0);
        traj.times.push_back(t);
        traj.states.push_back(F);
        traj.records.push_back(rec);
    };
    sample(true);

    const double t_eps = cfg.dt * 1e-9;  // guards against a spurious final microstep
    std::size_t k = 0;
    while (t < cfg.t_end - t_eps) {
        const double dt = std::min(cfg.dt, cfg.t_end - t);
        auto sr = step(F, dt, cfg.integrator, tab, cfg.positivity_tol, cfg.threads);
        F = std::move(sr.state);
        traj.halvings += sr.halvings;
        traj.clipped += sr.clipped;
        t += dt;
        ++k;
        if (k % cfg.output_stride == 0 || !(t < cfg.t_end - t_eps)) sample(false);
    }

    if (traj.times.size() > 1) {
        const auto phis = diagnostics::default_monitor_phis(F.grid->x_max());
        const std::vector<double> eps_list{cfg.eps_ref};
        traj.monitor = diagnostics::monitor_monotone(traj.times, traj.states, phis,
                                                     eps_list, -1.0, cfg.monitor_tol);
        for (const auto& v : traj.monitor.violations)
            for (std::size_t i = 0; i < traj.times.size(); ++i)
                if (traj.times[i] == v.t_curr) {
                    ++traj.records[i].monotone_flags;
                    break;
                }
    }
    return traj;
}

inline Trajectory run(const measure::IsotropicMeasure& F0, const kernel::PhiModel& model,
                      const SolverConfig& cfg, const TableOptions& topts = {}) {
    return run(F0, model, build_tables(model, F0.grid, topts), cfg);
}

// ---------------------------------------------------------------------------
// Trajectory CSV.
// ---------------------------------------------------------------------------

inline void write_timeseries_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("write_timeseries_csv: cannot open '" + path + "'");
    out << "t,N,E,S,D,m0,n02_eps,dist1,dist1circ,dS\n";
    char buf[64];
    auto put = [&](double x, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out << buf << sep;
    };
    for (const auto& r : traj.records) {
        put(r.t, ',');
        put(r.n, ',');
        put(r.e, ',');
        put(r.s, ',');
        put(r.d, ',');
        put(r.m0, ',');
        put(r.n02, ',');
        put(r.dist1, ',');
        put(r.dist1circ, ',');
        put(r.ds, '\n');
    }
    if (!out) throw config_error("write_timeseries_csv: write to '" + path + "' failed");
}

}  // namespace bnlab::solver
