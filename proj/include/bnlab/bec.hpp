#pragma once

// Constants governing the condensation onset criterion: the exponent alpha,
// the threshold amplitude A*, and the companion constants B*, C* that bound
// the admissible window size eps.  They depend only on the interaction
// parameters (b0, eta) and, through eps_admissible_max, on the invariants
// (n, e) of the data.

#include <algorithm>
#include <cmath>

#include "bnlab/errors.hpp"

namespace bnlab::bec {

struct BecConstants {
    double alpha;               // (1 - 4 eta)/10, positive iff eta < 1/4
    double a_star;              // condensate-mass threshold amplitude
    double b_star;              // admissibility bound via sqrt(n e)
    double c_star;              // admissibility bound via n^{3/4} e^{1/4}
    double eps_admissible_max;  // largest eps the onset criterion accepts
};

// All four constants.  alpha <= 0 (eta >= 1/4) leaves the criterion without
// content and is rejected.  1 - (2/3)^t is formed as -expm1(t log(2/3)):
// for t = alpha/4 ~ 0.025 the naive subtraction would cost six digits of the
// tenth-power amplification inside a_star.
inline BecConstants bec_constants(double n, double e, double b0, double eta) {
    if (!(eta >= 0.0 && eta < 0.25))
        throw domain_error("bec_constants: eta must lie in [0,1/4)");
    if (!(b0 > 0.0 && b0 <= 0.5))
        throw domain_error("bec_constants: b0 must lie in (0,1/2]");
    if (!(n > 0.0) || !(e > 0.0))
        throw domain_error("bec_constants: n and e must be positive");

    BecConstants c;
    c.alpha = (1.0 - 4.0 * eta) / 10.0;
    const double log23 = std::log(2.0 / 3.0);
    const double one_m_23_a4 = -std::expm1(0.25 * c.alpha * log23);
    const double one_m_23_a = -std::expm1(c.alpha * log23);
    c.a_star = std::pow(4.0 * std::pow(b0, -4.0 / 7.0) / one_m_23_a4, 7.0 / 3.0);
    c.b_star = one_m_23_a * c.alpha * std::log(1.5) / 8.0;
    c.c_star = (b0 / 174.0) * std::pow(c.a_star, 1.5);

    const double t1 = std::pow(c.b_star / std::sqrt(n * e), 1.0 / c.alpha);
    const double t2 = 2.0 / 3.0;
    const double t3 = std::pow(c.c_star / (std::pow(n, 0.75) * std::pow(e, 0.25)),
                               2.0 / (1.0 - 3.0 * c.alpha - eta));
    const double t4 = std::pow(n / c.a_star, 1.0 / c.alpha);
    c.eps_admissible_max = std::min(std::min(t1, t2), std::min(t3, t4));
    return c;
}

}  // namespace bnlab::bec
