#!/usr/bin/env python3
"""High-precision reference values for the C++ test suite.

Run with mpmath >= 1.3. Output is a set of C++ snippets that are pasted
(frozen) into headers and tests, so the build never depends on Python.
Every block is labelled with the constant table or test it feeds.

    python3 tests/oracle/gen_constants.py > tests/oracle/frozen.txt
"""
import mpmath as mp

mp.mp.dps = 60


def d(x):
    """Shortest round-trip double literal."""
    return repr(float(mp.mpf(x)))


def block(title):
    print()
    print("// ==== %s ====" % title)


# ---------------------------------------------------------------- zeta tables
# Series tables for Li_s(e^mu) = Gamma(1-s)(-mu)^(s-1) + sum_k zeta(s-k) mu^k/k!
# used for s = 3/2, 5/2 on z in (0.5, 1].  30 terms: the k-th term is
# O((|mu|/2pi)^k) with |mu| <= log 2, so 30 terms reach < 1e-25.
NTERMS = 30
block("zeta(3/2 - k), k = 0..%d  (math.hpp)" % (NTERMS - 1))
vals = [d(mp.zeta(mp.mpf(3) / 2 - k)) for k in range(NTERMS)]
print("inline constexpr double kZeta32Minus[%d] = {" % NTERMS)
for i in range(0, NTERMS, 3):
    print("    " + ", ".join(vals[i:i + 3]) + ",")
print("};")

block("zeta(5/2 - k), k = 0..%d  (math.hpp)" % (NTERMS - 1))
vals = [d(mp.zeta(mp.mpf(5) / 2 - k)) for k in range(NTERMS)]
print("inline constexpr double kZeta52Minus[%d] = {" % NTERMS)
for i in range(0, NTERMS, 3):
    print("    " + ", ".join(vals[i:i + 3]) + ",")
print("};")

block("gamma factors for the expansion (math.hpp)")
print("inline constexpr double kGammaMinusHalf   = %s;  // Gamma(-1/2) = -2 sqrt(pi)" % d(mp.gamma(mp.mpf(-1) / 2)))
print("inline constexpr double kGammaMinus3Half  = %s;  // Gamma(-3/2) = 4 sqrt(pi)/3" % d(mp.gamma(mp.mpf(-3) / 2)))

zeta32 = mp.zeta(mp.mpf(3) / 2)
zeta52 = mp.zeta(mp.mpf(5) / 2)
block("zeta values and the critical-ratio coefficient (equilibrium.hpp)")
print("inline constexpr double kZeta32 = %s;" % d(zeta32))
print("inline constexpr double kZeta52 = %s;" % d(zeta52))
cstar = (2 * mp.pi) ** (mp.mpf(1) / 3) * zeta32 ** (mp.mpf(5) / 3) / (3 * zeta52)
print("inline constexpr double kCriticalRatioCoeff = %s;  // (2pi)^(1/3) zeta(3/2)^(5/3) / (3 zeta(5/2))" % d(cstar))
# identity check: coeff == Gamma(3/2)^(5/3) zeta(3/2)^(5/3) / (Gamma(5/2) zeta(5/2))
g32, g52 = mp.gamma(mp.mpf(3) / 2), mp.gamma(mp.mpf(5) / 2)
alt = (g32 * zeta32) ** (mp.mpf(5) / 3) / (g52 * zeta52)
assert mp.almosteq(cstar, alt, rel_eps=mp.mpf(10) ** -50), (cstar, alt)

# ------------------------------------------------------------- polylog vector
block("Li_{3/2}, Li_{5/2} reference vector (test_equilibrium.cpp)")
zs = ["0", "0.001", "0.01", "0.1", "0.25", "0.4", "0.5", "0.55", "0.6",
      "0.75", "0.9", "0.99", "0.999", "0.9999", "1"]
print("// z, Li32(z), Li52(z)")
print("inline constexpr double kPolylogRef[%d][3] = {" % len(zs))
for zt in zs:
    z = mp.mpf(zt)
    li32 = zeta32 if z == 1 else mp.polylog(mp.mpf(3) / 2, z)
    li52 = zeta52 if z == 1 else mp.polylog(mp.mpf(5) / 2, z)
    print("    {%s, %s, %s}," % (d(z), d(li32), d(li52)))
print("};")

# -------------------------------------------------------- condensation bounds
def bec_constants(eta, b0):
    eta, b0 = mp.mpf(eta), mp.mpf(b0)
    alpha = (1 - 4 * eta) / 10
    astar = (4 * b0 ** (mp.mpf(-4) / 7) / (1 - (mp.mpf(2) / 3) ** (alpha / 4))) ** (mp.mpf(7) / 3)
    bstar = (1 - (mp.mpf(2) / 3) ** alpha) * alpha * mp.log(mp.mpf(3) / 2) / 8
    cstar_ = (b0 / 174) * astar ** (mp.mpf(3) / 2)
    return alpha, astar, bstar, cstar_

block("condensation predictor constants (test_diagnostics.cpp, acceptance 12)")
for eta, b0 in [("0", "0.5"), ("0.1", "0.4")]:
    alpha, astar, bstar, cstar_ = bec_constants(eta, b0)
    print("// eta = %s, b0 = %s" % (eta, b0))
    print("//   alpha = %s" % d(alpha))
    print("//   A*    = %s" % d(astar))
    print("//   B*    = %s" % d(bstar))
    print("//   C*    = %s" % d(cstar_))

# eps_admissible_max for one pinned state (eta=0, b0=1/2, n=e=1)
eta, b0 = mp.mpf(0), mp.mpf("0.5")
alpha, astar, bstar, cstar_ = bec_constants(eta, b0)
n = e = mp.mpf(1)
cands = [
    (bstar / mp.sqrt(n * e)) ** (1 / alpha),
    mp.mpf(2) / 3,
    (cstar_ / (n ** mp.mpf("0.75") * e ** mp.mpf("0.25"))) ** (2 / (1 - 3 * alpha - eta)),
    (n / astar) ** (1 / alpha),
]
block("eps_admissible_max terms, eta=0 b0=1/2 n=e=1 (test_diagnostics.cpp)")
for i, c in enumerate(cands):
    print("//   term%d = %s" % (i, d(c)))
print("//   min   = %s" % d(min(cands)))

# ------------------------------------------------------------- equilibrium
def li(s, z):
    if z == 1:
        return mp.zeta(s)
    return mp.polylog(s, z)


def eq_solve(n, e):
    """Returns (ratio, A, kappa, n0, S)."""
    n, e = mp.mpf(n), mp.mpf(e)
    ratio = cstar * e / n ** (mp.mpf(5) / 3)
    if ratio >= 1:
        target = e / n ** (mp.mpf(5) / 3)
        R = lambda z: g52 * li(mp.mpf(5) / 2, z) / (g32 * li(mp.mpf(3) / 2, z)) ** (mp.mpf(5) / 3)
        z = mp.findroot(lambda z: R(z) - target, mp.mpf("0.5"), solver="secant", tol=mp.mpf(10) ** -50)
        kappa = (n / (g32 * li(mp.mpf(3) / 2, z))) ** (mp.mpf(2) / 3)
        A = 1 / z
        n0 = mp.mpf(0)
    else:
        z = mp.mpf(1)
        A = mp.mpf(1)
        kappa = (e / (g52 * zeta52)) ** (mp.mpf(2) / 5)
        n0 = (1 - ratio ** (mp.mpf(3) / 5)) * n
    # entropy of the regular part: S = 4 pi sqrt(2) int s(f) sqrt(x) dx,
    # closed form  4 pi sqrt2 kappa^{3/2} [ (G52+G32) Li52(z) + ln A G32 Li32(z) ]
    S = 4 * mp.pi * mp.sqrt(2) * kappa ** (mp.mpf(3) / 2) * (
        (g52 + g32) * li(mp.mpf(5) / 2, z) + mp.log(A) * g32 * li(mp.mpf(3) / 2, z))
    # cross-check via direct quadrature of  s(f) sqrt(x)
    def sfun(x):
        f = 1 / (A * mp.exp(x / kappa) - 1)
        return ((1 + f) * mp.log(1 + f) - f * mp.log(f)) * mp.sqrt(x)
    Sq = 4 * mp.pi * mp.sqrt(2) * mp.quad(sfun, [0, kappa, 10 * kappa, 100 * kappa, mp.inf])
    assert mp.almosteq(S, Sq, rel_eps=mp.mpf(10) ** -30), (S, Sq)
    # moment closure check
    nn = kappa ** (mp.mpf(3) / 2) * g32 * li(mp.mpf(3) / 2, z) + n0
    ee = kappa ** (mp.mpf(5) / 2) * g52 * li(mp.mpf(5) / 2, z)
    assert mp.almosteq(nn, n, rel_eps=mp.mpf(10) ** -40)
    assert mp.almosteq(ee, e, rel_eps=mp.mpf(10) ** -40)
    return ratio, A, kappa, n0, S


block("equilibrium states (test_equilibrium.cpp)")
cases = [("1", "1"), ("1", str(mp.mpf("0.5") / cstar)), ("2", "0.3"), ("0.7", "1.3")]
print("// n, e, temp_ratio, A, kappa, n0, S")
print("inline constexpr double kEquilibriumRef[%d][7] = {" % len(cases))
for ns, es in cases:
    ratio, A, kappa, n0, S = eq_solve(ns, es)
    print("    {%s, %s, %s, %s, %s, %s, %s}," % (d(ns), d(es), d(ratio), d(A), d(kappa), d(n0), d(S)))
print("};")
block("condensate fraction spot value")
print("//   n0(ratio=0.5, n=1) = %s" % d(1 - mp.mpf("0.5") ** (mp.mpf(3) / 5)))

# ----------------------------------------------------------------- potential
block("dispersion potential U(rho) for V(r) = 1/(1+r^eta) (test_potential.cpp)")


def neg_V1pp(r, eta):
    rp = r ** eta
    return eta * r ** (eta - 1) * ((1 + eta) + (1 - eta) * rp) / (1 + rp) ** 3


def U(rho, eta):
    rho, eta = mp.mpf(rho), mp.mpf(eta)
    f = lambda r: neg_V1pp(r, eta) * mp.sin(rho * r)
    a = mp.pi / rho
    head = mp.quad(f, [0, a / 2, a])
    tail = mp.quadosc(f, [a, mp.inf], period=2 * mp.pi / rho)
    return (head + tail) / (2 * mp.pi ** 2 * rho ** 3)


print("// eta, rho, U(rho)")
rows = []
for eta in ("0.25", "0.5", "0.75"):
    for rho in ("0.5", "1", "2", "10"):
        rows.append("    {%s, %s, %s}," % (d(eta), d(rho), d(U(rho, eta))))
print("inline constexpr double kPotentialRef[%d][3] = {" % len(rows))
for row in rows:
    print(row)
print("};")

# -------------------------------------------------- weak pair operator, hard sphere
block("weak pair operator, hard-sphere, J[phi](y,z) (test_kernel.cpp)")


def w_hs(x, y, z):
    xs = y + z - x
    if xs <= 0 or x < 0:
        return mp.mpf(0)
    if x == 0:
        return 1 / mp.sqrt(y * z) if y > 0 and z > 0 else mp.mpf(0)
    return min(mp.sqrt(x), mp.sqrt(xs), mp.sqrt(y), mp.sqrt(z)) / mp.sqrt(x * y * z)


def j_hs(phi, y, z, kinks=()):
    y, z = mp.mpf(y), mp.mpf(z)
    T = y + z

    def g(x):
        dphi = phi(x) + phi(T - x) - phi(y) - phi(z)
        return w_hs(x, y, z) * dphi * mp.sqrt(x)

    pts = sorted({mp.mpf(0), min(y, z), T / 2, max(y, z), T}
                 | {mp.mpf(k) for k in kinks if 0 < mp.mpf(k) < T}
                 | {T - mp.mpf(k) for k in kinks if 0 < T - mp.mpf(k) < T})
    return mp.quad(g, pts) / 2


print("// y, z, J[x^2](y,z)")
sq = lambda x: x * x
pairs = [("0.3", "0.7"), ("1", "1"), ("0.2", "1.7")]
print("inline constexpr double kPairOpSquareRef[%d][3] = {" % len(pairs))
for ys, zs in pairs:
    print("    {%s, %s, %s}," % (d(ys), d(zs), d(j_hs(sq, ys, zs))))
print("};")

eps = mp.mpf("0.5")
phieps = lambda x: (max(1 - x / eps, mp.mpf(0))) ** 2
print("// y, z, J[phi_eps](y,z) with eps = 0.5")
print("inline constexpr double kPairOpBumpRef[%d][3] = {" % len(pairs))
for ys, zs in pairs:
    print("    {%s, %s, %s}," % (d(ys), d(zs), d(j_hs(phieps, ys, zs, kinks=(eps,)))))
print("};")

# collision weight, eta model, via independent 2D quadrature
block("collision weight, eta model eta=0.5 b0=1/2, quadrature (test_kernel.cpp)")


def phi_hat(r, eta):
    return mp.mpf(1) / 2 * r ** eta / (1 + r ** eta)


def Phi(r, rho, eta):
    return (phi_hat(r, eta) + phi_hat(rho, eta)) ** 2


def w_eta(x, y, z, eta):
    x, y, z, eta = map(mp.mpf, (x, y, z, eta))
    xs = y + z - x
    if xs <= 0:
        return mp.mpf(0)
    if min(x, y, z) == 0:
        if x == 0 and y > 0 and z > 0:
            return Phi(mp.sqrt(2 * y), mp.sqrt(2 * z), eta) / mp.sqrt(y * z)
        if y == 0 and z > x > 0:
            return Phi(mp.sqrt(2 * x), mp.sqrt(2 * (z - x)), eta) / mp.sqrt(x * z)
        if z == 0 and y > x > 0:
            return Phi(mp.sqrt(2 * (y - x)), mp.sqrt(2 * x), eta) / mp.sqrt(x * y)
        return mp.mpf(0)
    s0 = max(abs(mp.sqrt(x) - mp.sqrt(y)), abs(mp.sqrt(xs) - mp.sqrt(z)))
    s1 = min(mp.sqrt(x) + mp.sqrt(y), mp.sqrt(xs) + mp.sqrt(z))
    if s1 <= s0:
        return mp.mpf(0)

    def inner(s):
        q = (x - y + s * s) ** 2 / (4 * s * s)
        a = max(z - q, mp.mpf(0))
        b = max(x - q, mp.mpf(0))
        g = lambda th: Phi(mp.sqrt(2) * s,
                           mp.sqrt(2) * mp.sqrt(a + b + 2 * mp.sqrt(a * b) * mp.cos(th)), eta)
        return mp.quad(g, [0, mp.pi, 2 * mp.pi])

    return mp.quad(inner, [s0, (s0 + s1) / 2, s1]) / (4 * mp.pi * mp.sqrt(x * y * z))


mp.mp.dps = 25  # the nested quad above is slow; 25 digits is ample
print("// x, y, z, w (eta = 0.5)")
triples = [("0.3", "0.4", "0.8"), ("1.1", "0.7", "0.5"), ("2.0", "1.0", "1.5")]
print("inline constexpr double kEtaWeightRef[%d][4] = {" % len(triples))
for xs_, ys_, zs_ in triples:
    print("    {%s, %s, %s, %s}," % (d(xs_), d(ys_), d(zs_), d(w_eta(xs_, ys_, zs_, "0.5"))))
print("};")
mp.mp.dps = 60
