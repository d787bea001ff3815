#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "bnlab/measure.hpp"

namespace ms = bnlab::measure;
namespace m = bnlab::math;

namespace {

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    double u01() { return static_cast<double>(m::splitmix64(state) >> 11) * 0x1.0p-53; }
    double in(double lo, double hi) { return lo + (hi - lo) * u01(); }
};

ms::IsotropicMeasure atom(std::shared_ptr<const ms::Grid> g, std::size_t node, double mass) {
    ms::IsotropicMeasure F{g, std::vector<double>(g->size(), 0.0)};
    F.masses[node] = mass;
    return F;
}

ms::IsotropicMeasure random_measure(std::shared_ptr<const ms::Grid> g, Rng& rng,
                                    double condensate = 0.0) {
    ms::IsotropicMeasure F{g, std::vector<double>(g->size(), 0.0)};
    F.masses[0] = condensate;
    for (std::size_t i = 1; i < g->size(); ++i) F.masses[i] = rng.in(0.0, 1.0);
    return F;
}

}  // namespace

TEST_CASE("grid factories and validation") {
    const auto lin = ms::Grid::linear(10, 5.0);
    REQUIRE(lin.size() == 11);
    CHECK(lin.nodes[0] == 0.0);
    CHECK(lin.x_max() == 5.0);
    double total = 0.0;
    for (std::size_t i = 1; i < lin.size(); ++i) {
        CHECK(lin.width(i) > 0.0);
        CHECK(lin.cell_lo(i) < lin.nodes[i]);
        CHECK(lin.nodes[i] <= lin.cell_hi(i));
        total += lin.width(i);
    }
    CHECK_THAT(total, Catch::Matchers::WithinRel(5.0, 1e-14));

    const auto geo = ms::Grid::geometric(64, 10.0, 1.05);
    REQUIRE(geo.size() == 65);
    CHECK(geo.nodes[0] == 0.0);
    CHECK(geo.x_max() == 10.0);
    for (std::size_t i = 2; i < geo.size(); ++i) {
        const double r = (geo.nodes[i] - geo.nodes[i - 1]) / (geo.nodes[i - 1] - geo.nodes[i - 2]);
        CHECK_THAT(r, Catch::Matchers::WithinRel(1.05, 1e-10));
    }
    CHECK(geo.nodes[1] < lin.nodes[1]);  // refined near the condensate

    CHECK_THROWS_AS(ms::Grid::from_nodes({0.0}), bnlab::domain_error);
    CHECK_THROWS_AS(ms::Grid::from_nodes({0.5, 1.0}), bnlab::domain_error);
    CHECK_THROWS_AS(ms::Grid::from_nodes({0.0, 1.0, 1.0}), bnlab::domain_error);
    CHECK_THROWS_AS(ms::Grid::linear(0, 1.0), bnlab::domain_error);
    CHECK_THROWS_AS(ms::Grid::geometric(8, 1.0, 1.0), bnlab::domain_error);
}

TEST_CASE("moments count the condensate only at order zero") {
    const auto g = ms::make_grid(ms::Grid::linear(8, 8.0));
    const auto zero = ms::IsotropicMeasure{g, std::vector<double>(g->size(), 0.0)};
    CHECK(ms::mass(zero) == 0.0);
    CHECK(ms::energy(zero) == 0.0);
    CHECK(ms::moment(zero, 0.5) == 0.0);

    const auto cond = atom(g, 0, 2.0);
    CHECK(ms::mass(cond) == 2.0);
    CHECK(ms::energy(cond) == 0.0);
    CHECK(ms::moment(cond, 0.0) == 2.0);
    CHECK(ms::moment(cond, 0.5) == 0.0);

    const auto at4 = atom(g, 4, 3.0);  // node 4 sits at x = 4
    REQUIRE(g->nodes[4] == 4.0);
    CHECK_THAT(ms::moment(at4, 0.5), Catch::Matchers::WithinRel(6.0, 1e-15));
    CHECK_THROWS_AS(ms::moment(at4, -1.0), bnlab::domain_error);
}

TEST_CASE("functionals are linear in the masses") {
    const auto g = ms::make_grid(ms::Grid::geometric(32, 6.0));
    Rng rng(0x5eedbeefULL);
    for (int trial = 0; trial < 20; ++trial) {
        const auto F = random_measure(g, rng, rng.u01());
        const auto G = random_measure(g, rng, rng.u01());
        ms::IsotropicMeasure H{g, std::vector<double>(g->size(), 0.0)};
        for (std::size_t i = 0; i < g->size(); ++i) H.masses[i] = F.masses[i] + G.masses[i];
        const double eps = rng.in(0.2, 3.0);
        CHECK_THAT(ms::mass(H), Catch::Matchers::WithinRel(ms::mass(F) + ms::mass(G), 1e-12));
        CHECK_THAT(ms::energy(H),
                   Catch::Matchers::WithinRel(ms::energy(F) + ms::energy(G), 1e-12));
        CHECK_THAT(ms::moment(H, 1.5),
                   Catch::Matchers::WithinRel(ms::moment(F, 1.5) + ms::moment(G, 1.5), 1e-12));
        CHECK_THAT(ms::n0p(H, eps, 2.0),
                   Catch::Matchers::WithinRel(ms::n0p(F, eps, 2.0) + ms::n0p(G, eps, 2.0),
                                              1e-12));
        CHECK_THAT(ms::a_alpha_p(H, eps, 0.1, 2.0),
                   Catch::Matchers::WithinRel(
                       ms::a_alpha_p(F, eps, 0.1, 2.0) + ms::a_alpha_p(G, eps, 0.1, 2.0),
                       1e-12));
    }
}

TEST_CASE("truncated moments near zero") {
    const auto g = ms::make_grid(ms::Grid::from_nodes({0.0, 0.25, 0.5, 1.0, 2.0, 4.0}));

    const auto cond = atom(g, 0, 2.0);
    CHECK(ms::n0p(cond, 0.7, 1.0) == 2.0);
    CHECK(ms::n0p(cond, 3.0, 5.0) == 2.0);

    const auto at_eps = atom(g, 2, 1.0);  // x = 0.5
    CHECK(ms::n0p(at_eps, 0.5, 2.0) == 0.0);

    const auto at_half = atom(g, 2, 3.0);  // x = eps/2 for eps = 1
    CHECK_THAT(ms::n0p(at_half, 1.0, 2.0), Catch::Matchers::WithinRel(0.75, 1e-15));

    CHECK_THROWS_AS(ms::n0p(cond, 0.0, 2.0), bnlab::domain_error);
    CHECK_THROWS_AS(ms::n0p(cond, 1.0, 0.5), bnlab::domain_error);

    SECTION("n0p bounds and limits") {
        Rng rng(0xabcdULL);
        const auto F = random_measure(g, rng, 0.4);
        CHECK(ms::n0p(F, 1e-9, 1.0) >= F.masses[0]);
        CHECK_THAT(ms::n0p(F, 1e-12, 2.0), Catch::Matchers::WithinRel(F.masses[0], 1e-9));
    }

    SECTION("monotone in eps, antitone in p") {
        Rng rng(0x77aaULL);
        const auto F = random_measure(g, rng, 0.3);
        double prev = 0.0;
        for (double eps : {0.3, 0.6, 1.2, 2.4, 4.8}) {
            const double cur = ms::n0p(F, eps, 2.0);
            CHECK(cur >= prev - 1e-15);
            prev = cur;
        }
        for (double eps : {0.3, 1.1, 3.7}) {
            double last = ms::n0p(F, eps, 1.0);
            for (double p : {1.5, 2.0, 3.0, 6.0}) {
                const double cur = ms::n0p(F, eps, p);
                CHECK(cur <= last + 1e-15);
                last = cur;
            }
        }
    }

    SECTION("alpha-weighted variants") {
        const double alpha = 0.1;
        const auto pure = atom(g, 0, 1.7);
        // delta at zero: N_{0,p} is constant in delta, so the inf sits at eps
        CHECK_THAT(ms::underline_n_alpha_p(pure, 2.0, alpha, 2.0),
                   Catch::Matchers::WithinRel(1.7 * std::pow(2.0, -alpha), 1e-14));
        CHECK(ms::a_alpha_p(pure, 2.0, alpha, 2.0) == 0.0);

        const auto edge = atom(g, 3, 0.9);  // x = 1
        CHECK_THAT(ms::a_alpha_p(edge, 1.0, alpha, 2.0),
                   Catch::Matchers::WithinRel(0.9, 1e-14));

        Rng rng(0x1212ULL);
        const auto F = random_measure(g, rng, 0.2);
        CHECK(ms::underline_n_alpha_p(F, 1.0, alpha, 2.0) <=
              ms::n_alpha_p(F, 1.0, alpha, 2.0) + 1e-15);
        const auto zero = ms::IsotropicMeasure{g, std::vector<double>(g->size(), 0.0)};
        CHECK(ms::underline_n_alpha_p(zero, 1.0, alpha, 2.0) == 0.0);
    }
}

TEST_CASE("weighted total-variation distances") {
    const auto g = ms::make_grid(ms::Grid::linear(8, 4.0));
    Rng rng(0x9f3aULL);
    const auto F = random_measure(g, rng, 0.5);
    CHECK(ms::norm1(F, F) == 0.0);
    CHECK(ms::norm1_circ(F, F) == 0.0);

    const auto one = atom(g, 0, 1.0);
    const auto nil = atom(g, 0, 0.0);
    CHECK(ms::norm1(one, nil) == 1.0);
    CHECK(ms::norm1_circ(one, nil) == 0.0);

    for (int trial = 0; trial < 10; ++trial) {
        const auto A = random_measure(g, rng, rng.u01());
        const auto B = random_measure(g, rng, rng.u01());
        const auto C = random_measure(g, rng, rng.u01());
        CHECK(ms::norm1(A, C) <= ms::norm1(A, B) + ms::norm1(B, C) + 1e-12);
        CHECK(ms::norm1_circ(A, C) <=
              ms::norm1_circ(A, B) + ms::norm1_circ(B, C) + 1e-12);
    }

    const auto other = ms::make_grid(ms::Grid::linear(8, 4.5));
    const auto G = atom(other, 1, 1.0);
    CHECK_THROWS_AS(ms::norm1(F, G), bnlab::domain_error);
    CHECK_THROWS_AS(ms::norm1_circ(F, G), bnlab::domain_error);
}

TEST_CASE("entropy of discrete measures") {
    const auto g = ms::make_grid(ms::Grid::geometric(48, 8.0));
    const auto zero = ms::IsotropicMeasure{g, std::vector<double>(g->size(), 0.0)};
    CHECK(ms::entropy(zero) == 0.0);
    CHECK(ms::entropy(atom(g, 0, 5.0)) == 0.0);  // singular part carries no entropy

    SECTION("two-cell hand computation") {
        const auto tiny = ms::make_grid(ms::Grid::from_nodes({0.0, 1.0, 2.0}));
        auto F = atom(tiny, 1, 0.6);
        const double w1 = tiny->width(1);
        const double f1 = 0.6 / (std::sqrt(1.0) * w1);
        const double expect = 4.0 * m::kPi * m::kSqrt2 *
                              (std::log1p(f1) + f1 * std::log1p(1.0 / f1)) * std::sqrt(1.0) * w1;
        CHECK_THAT(ms::entropy(F), Catch::Matchers::WithinRel(expect, 1e-14));
    }

    SECTION("monotone, subadditive, concave") {
        Rng rng(0xe21cULL);
        for (int trial = 0; trial < 10; ++trial) {
            const auto F = random_measure(g, rng, rng.u01());
            const auto G = random_measure(g, rng, rng.u01());
            ms::IsotropicMeasure sum{g, std::vector<double>(g->size(), 0.0)};
            ms::IsotropicMeasure mix{g, std::vector<double>(g->size(), 0.0)};
            ms::IsotropicMeasure capped{g, F.masses};
            const double a = rng.u01();
            for (std::size_t i = 0; i < g->size(); ++i) {
                sum.masses[i] = F.masses[i] + G.masses[i];
                mix.masses[i] = (1.0 - a) * F.masses[i] + a * G.masses[i];
                capped.masses[i] = std::min(F.masses[i], G.masses[i]);
            }
            const double sf = ms::entropy(F), sg = ms::entropy(G);
            CHECK(ms::entropy(sum) <= sf + sg + 1e-10);
            CHECK(ms::entropy(mix) >= (1.0 - a) * sf + a * sg - 1e-10);
            CHECK(ms::entropy(capped) <= std::min(sf, sg) + 1e-12);
        }
    }
}

TEST_CASE("density projection and csv round trip") {
    const auto g = ms::make_grid(ms::Grid::geometric(40, 6.0));
    const auto zero = ms::project_density([](double) { return 0.0; }, g);
    CHECK(ms::mass(zero) == 0.0);

    // f = 1 has cell masses (2/3)(hi^{3/2} - lo^{3/2})
    const auto flat = ms::project_density([](double) { return 1.0; }, g);
    for (std::size_t i = 1; i < g->size(); ++i) {
        const double expect = (2.0 / 3.0) * (std::pow(g->cell_hi(i), 1.5) -
                                             std::pow(g->cell_lo(i), 1.5));
        CHECK_THAT(flat.masses[i], Catch::Matchers::WithinRel(expect, 1e-12));
    }
    CHECK(flat.masses[0] == 0.0);

    const auto dir = std::filesystem::temp_directory_path();
    const auto path = (dir / "bnlab_measure_roundtrip.csv").string();
    Rng rng(0x40c1ULL);
    const auto F = random_measure(g, rng, 0.25);
    ms::save_csv(F, path);
    const auto back = ms::load_csv(path);
    REQUIRE(back.grid->size() == g->size());
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(back.grid->nodes[i] == g->nodes[i]);
        CHECK(back.masses[i] == F.masses[i]);
    }
    std::filesystem::remove(path);
}

TEST_CASE("csv loader reports the offending line") {
    const auto dir = std::filesystem::temp_directory_path();
    auto write = [&](const std::string& name, const std::string& body) {
        const auto path = (dir / name).string();
        std::FILE* f = std::fopen(path.c_str(), "wb");
        REQUIRE(f != nullptr);
        std::fwrite(body.data(), 1, body.size(), f);
        std::fclose(f);
        return path;
    };

    const auto bad_header = write("bnlab_csv_a.csv", "x;mass\n0,1\n");
    CHECK_THROWS_AS(ms::load_csv(bad_header), bnlab::parse_error);

    const auto bad_number = write("bnlab_csv_b.csv", "x,mass\n0,0.5\n0.5,zz\n");
    try {
        ms::load_csv(bad_number);
        FAIL("expected parse_error");
    } catch (const bnlab::parse_error& e) {
        CHECK(e.line == 3);
    }

    const auto negative = write("bnlab_csv_c.csv", "x,mass\n0,0.5\n0.5,-1\n");
    CHECK_THROWS_AS(ms::load_csv(negative), bnlab::parse_error);

    const auto disorder = write("bnlab_csv_d.csv", "x,mass\n0,0.5\n2,0\n1,0\n");
    try {
        ms::load_csv(disorder);
        FAIL("expected parse_error");
    } catch (const bnlab::parse_error& e) {
        CHECK(e.line == 4);
    }

    const auto nonzero_first = write("bnlab_csv_e.csv", "x,mass\n0.5,0.5\n1,0\n");
    CHECK_THROWS_AS(ms::load_csv(nonzero_first), bnlab::parse_error);

    for (const char* n : {"bnlab_csv_a.csv", "bnlab_csv_b.csv", "bnlab_csv_c.csv",
                          "bnlab_csv_d.csv", "bnlab_csv_e.csv"})
        std::filesystem::remove(dir / n);
}

TEST_CASE("smoothing kernel closed forms match direct quadrature") {
    // dM/du of one source atom, integrated over an interval, against the
    // erf/exp primitives used in production.
    const double sigma = 0.3;
    for (double c : {0.7, 2.1}) {
        const ms::detail::MehlerAtom a{1.3, c, sigma};
        auto profile = [&](double u) {
            const double gm = std::exp(-(u - c) * (u - c) / (2.0 * sigma * sigma));
            const double gp = std::exp(-(u + c) * (u + c) / (2.0 * sigma * sigma));
            return 1.3 * u * (gm - gp) / (sigma * c * std::sqrt(2.0 * m::kPi));
        };
        for (auto [ua, ub] : {std::pair{0.2, 0.9}, std::pair{0.0, 3.0}, std::pair{1.5, 4.0}}) {
            const auto [m01, m1x] = a.interval_moments(ua, ub);
            const double ref0 = m::integrate_gl_mapped(profile, ua, ub, 64);
            const double ref1 = m::integrate_gl_mapped(
                [&](double u) { return 0.5 * u * u * profile(u); }, ua, ub, 64);
            CHECK_THAT(m01, Catch::Matchers::WithinRel(ref0, 1e-12));
            CHECK_THAT(m1x, Catch::Matchers::WithinRel(ref1, 1e-12));
        }
    }

    const ms::detail::MehlerAtom maxwell{0.8, 0.0, sigma};
    auto profile0 = [&](double u) {
        return 0.8 * std::sqrt(2.0 / m::kPi) * u * u *
               std::exp(-u * u / (2.0 * sigma * sigma)) / (sigma * sigma * sigma);
    };
    const auto [m01, m1x] = maxwell.interval_moments(0.0, 1.1);
    CHECK_THAT(m01, Catch::Matchers::WithinRel(m::integrate_gl_mapped(profile0, 0.0, 1.1, 64),
                                               1e-12));
    CHECK_THAT(m1x, Catch::Matchers::WithinRel(
                        m::integrate_gl_mapped(
                            [&](double u) { return 0.5 * u * u * profile0(u); }, 0.0, 1.1, 64),
                        1e-12));
}

TEST_CASE("mehler smoothing preserves invariants and grows entropy") {
    const auto g = ms::make_grid(ms::Grid::geometric(96, 30.0));
    Rng rng(0xfeed5ULL);
    for (int trial = 0; trial < 8; ++trial) {
        auto F = random_measure(g, rng, trial % 2 ? rng.in(0.5, 2.0) : 0.0);
        // keep the support well inside the grid so the smoothed tail fits
        for (std::size_t i = 1; i < g->size(); ++i)
            if (g->nodes[i] > 6.0) F.masses[i] = 0.0;
        const int idx = 1 + static_cast<int>(rng.in(0.0, 4.0));
        const auto R = ms::mehler_smooth(F, idx);
        CHECK(R.masses[0] == 0.0);
        CHECK_THAT(ms::mass(R), Catch::Matchers::WithinRel(ms::mass(F), 1e-9));
        CHECK_THAT(ms::energy(R), Catch::Matchers::WithinRel(ms::energy(F), 1e-9));
        CHECK(ms::entropy(R) >=
              (1.0 - 1.0 / (2.0 * idx)) * ms::entropy(F) - 1e-10);
        for (double mass_i : R.masses) CHECK(mass_i >= 0.0);
    }

    SECTION("a condensate beside regular mass gets smoothed into entropy") {
        auto F = atom(g, 0, 0.5);
        double reg = 0.0;
        for (std::size_t i = 10; i < 60; ++i) {
            F.masses[i] = 0.05;
            reg += 0.05;
        }
        const double before = ms::entropy(F);
        const auto R = ms::mehler_smooth(F, 1);
        CHECK(ms::entropy(R) > before);
        CHECK(R.masses[0] == 0.0);
        CHECK_THAT(ms::mass(R), Catch::Matchers::WithinRel(0.5 + reg, 1e-9));
        CHECK_THAT(ms::energy(R), Catch::Matchers::WithinRel(ms::energy(F), 1e-9));
    }

    SECTION("a condensate whose image hides below x_1 cannot shed its atom") {
        // At index 3 the kernel width collapses below the first cell while the
        // regular part is too light to absorb the energy repair.
        auto F = atom(g, 0, 1.0);
        F.masses[10] = 0.05;
        CHECK_THROWS_AS(ms::mehler_smooth(F, 3), bnlab::config_error);
    }

    SECTION("weak convergence as the index grows") {
        Rng rng2(0x777ULL);
        auto F = random_measure(g, rng2, 0.0);
        for (std::size_t i = 1; i < g->size(); ++i)
            if (g->nodes[i] > 5.0) F.masses[i] = 0.0;
        const double m2 = ms::moment(F, 2.0);
        const double gap_small = std::abs(ms::moment(ms::mehler_smooth(F, 2), 2.0) - m2);
        const double gap_large = std::abs(ms::moment(ms::mehler_smooth(F, 64), 2.0) - m2);
        CHECK(gap_large < gap_small);
        CHECK(gap_large < 0.02 * m2);
    }

    SECTION("domain and configuration errors") {
        CHECK_THROWS_AS(ms::mehler_smooth(atom(g, 0, 1.0), 1), bnlab::domain_error);
        CHECK_THROWS_AS(
            ms::mehler_smooth(ms::IsotropicMeasure{g, std::vector<double>(g->size(), 0.0)}, 1),
            bnlab::domain_error);
        Rng rng3(0x31ULL);
        CHECK_THROWS_AS(ms::mehler_smooth(random_measure(g, rng3), 0), bnlab::domain_error);

        const auto small = ms::make_grid(ms::Grid::linear(24, 1.0));
        auto F = atom(small, 20, 1.0);  // mass near x_max, image spills out
        CHECK_THROWS_AS(ms::mehler_smooth(F, 1), bnlab::config_error);
    }
}

TEST_CASE("two-bump datum hits its invariants") {
    // ratio 0.5 pair (n, e): e = 0.5 / kCriticalRatioCoeff
    const double n = 1.0, e = 0.5 / m::kCriticalRatioCoeff;
    const double delta = 3.0 * e / n;
    const double eps = 0.1;

    SECTION("pre-mollification closed forms") {
        const double a = 2.0 * e / (eps * (delta - eps));
        const double b = 2.0 * n * (2.0 * e / n - eps) / (delta * (delta - eps));
        CHECK_THAT(0.5 * (a * eps + b * delta), Catch::Matchers::WithinRel(n, 1e-13));
        CHECK_THAT(0.25 * (a * eps * eps + b * delta * delta),
                   Catch::Matchers::WithinRel(e, 1e-13));
    }

    const auto g = ms::make_grid(ms::Grid::geometric(192, 4.0));
    const auto res = ms::make_two_bump_condensing(n, e, 0.5, 0.0, g, eps);
    CHECK(res.eps_used == eps);
    CHECK_FALSE(res.eps_admissible);  // the admissible scale is astronomically small
    CHECK(res.eps_admissible_max < 1e-30);
    REQUIRE(res.n02_checked);
    CHECK(res.n02_required > 1e5);
    CHECK_FALSE(res.n02_met);

    const auto& F = res.measure;
    CHECK(F.masses[0] == 0.0);
    CHECK_THAT(ms::mass(F), Catch::Matchers::WithinRel(n, 1e-6));
    CHECK_THAT(ms::energy(F), Catch::Matchers::WithinRel(e, 1e-6));

    // support: [eps/8, 3 delta/4 + eps/8] up to one enclosing cell
    const double lo = eps / 8.0, hi = 0.75 * delta + eps / 8.0;
    for (std::size_t i = 1; i < g->size(); ++i) {
        if (g->nodes[i] < lo - g->width(i) || g->nodes[i] > hi + g->width(i))
            CHECK(F.masses[i] == 0.0);
    }
    // between the bumps the density dips to zero (hats smear by one interval)
    double between = 0.0;
    for (std::size_t i = 1; i + 1 < g->size(); ++i)
        if (g->nodes[i - 1] > 7.0 / 8.0 * eps && g->nodes[i + 1] < delta / 4.0 - eps / 8.0)
            between += F.masses[i];
    CHECK(between < 1e-12);

    SECTION("warnings and admissibility flags") {
        const auto hot = ms::make_two_bump_condensing(1.0, 1.0, 0.5, 0.0, g, 0.3);
        CHECK_FALSE(hot.warnings.empty());

        CHECK_THROWS_AS(ms::make_two_bump_condensing(n, e, 0.5, 0.0, g, delta / 4.0),
                        bnlab::config_error);  // eps > delta/6

        const auto coarse = ms::make_grid(ms::Grid::linear(16, 4.0));
        CHECK_THROWS_AS(ms::make_two_bump_condensing(n, e, 0.5, 0.0, coarse, eps),
                        bnlab::config_error);

        // admissible eps unrepresentable and no override supplied
        CHECK_THROWS_AS(ms::make_two_bump_condensing(n, e, 0.5, 0.0, g),
                        bnlab::config_error);

        // eta >= 1/4: constants unavailable, override required
        CHECK_THROWS_AS(ms::make_two_bump_condensing(n, e, 0.5, 0.3, g),
                        bnlab::config_error);
        const auto no_alpha = ms::make_two_bump_condensing(n, e, 0.5, 0.3, g, eps);
        CHECK_FALSE(no_alpha.n02_checked);
        CHECK_FALSE(no_alpha.warnings.empty());
        CHECK_THAT(ms::mass(no_alpha.measure), Catch::Matchers::WithinRel(n, 1e-6));
    }
}
