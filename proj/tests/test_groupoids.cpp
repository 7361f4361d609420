#include <catch2/catch_amalgamated.hpp>

#include "aqlab/groupoids.hpp"

#include <random>

using namespace aqlab::groupoids;
using aqlab::spectra::CompactRealSet;
using aqlab::spectra::hausdorff_distance;

namespace {

Eigen::MatrixXcd pair_matrix(const FiniteGroupoid& g, const ArrowFunction& f, int n) {
    // Arrow (x, y) of the pair groupoid has index x*n + y.
    Eigen::MatrixXcd m(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) m(x, y) = f[static_cast<std::size_t>(x * n + y)];
    (void)g;
    return m;
}

double max_abs_diff(const ArrowFunction& a, const ArrowFunction& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("construction validates the axioms") {
    CHECK(set_groupoid(3).arrow_count() == 3);
    CHECK(pair_groupoid(2).arrow_count() == 4);

    // Broken inverse: arrow 1 claims to be its own inverse but swaps units.
    std::vector<int> rg = {0, 0, 1}, sc = {0, 1, 0}, iv = {0, 1, 2}, ua = {0, -1};
    std::vector<int> comp(9, -1);
    CHECK_THROWS_AS(FiniteGroupoid(2, rg, sc, iv, ua, comp), std::invalid_argument);
}

TEST_CASE("crossed products") {
    // One point, q = 2: the two-element group.
    auto z2 = crossed_product(1, 2, {0});
    CHECK(z2.unit_count() == 1);
    CHECK(z2.arrow_count() == 2);
    CHECK(z2.compose(1, 1) == 0);

    // A 3-cycle with q = 3: transitive, 9 arrows.
    auto c3 = crossed_product(3, 3, {1, 2, 0});
    CHECK(c3.arrow_count() == 9);
    CHECK(c3.orbit_count() == 1);

    // Identity action with q = 1 degenerates to the set groupoid.
    auto idle = crossed_product(4, 1, {0, 1, 2, 3});
    CHECK(idle.arrow_count() == 4);
    for (int a = 0; a < 4; ++a) CHECK(idle.is_unit_arrow(a));

    CHECK_THROWS_AS(crossed_product(2, 2, {0, 0}), std::invalid_argument);
    // A 3-cycle does not have order dividing 2.
    CHECK_THROWS_AS(crossed_product(3, 2, {1, 2, 0}), std::invalid_argument);
}

TEST_CASE("pair groupoid fibers and matrix units") {
    auto g = pair_groupoid(2);
    for (int x = 0; x < 2; ++x) {
        CHECK(g.range_fiber(x).size() == 2);
        CHECK(g.source_fiber(x).size() == 2);
    }

    std::mt19937 rng(7);
    auto sigma = Cocycle2::trivial(g);
    for (int trial = 0; trial < 25; ++trial) {
        ArrowFunction f = random_arrow_function(g, rng);
        ArrowFunction h = random_arrow_function(g, rng);
        Eigen::MatrixXcd expect = pair_matrix(g, f, 2) * pair_matrix(g, h, 2);
        Eigen::MatrixXcd got = pair_matrix(g, convolve(g, sigma, f, h), 2);
        CHECK((expect - got).cwiseAbs().maxCoeff() < 1e-14);
        // pi_x(f) is the matrix of f itself, up to simultaneous row/column
        // relabeling, so its singular values match.
        Eigen::JacobiSVD<Eigen::MatrixXcd> direct(pair_matrix(g, f, 2));
        Eigen::JacobiSVD<Eigen::MatrixXcd> rep(left_regular(g, sigma, f, 0));
        CHECK((direct.singularValues() - rep.singularValues()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("convolution identities") {
    std::mt19937 rng(11);
    auto g = crossed_product(3, 3, {1, 2, 0});
    auto sigma = random_normalized_cocycle(g, rng);
    ArrowFunction e = unit_indicator(g);
    ArrowFunction f = random_arrow_function(g, rng);
    CHECK(max_abs_diff(convolve(g, sigma, e, f), f) < 1e-15);
    CHECK(max_abs_diff(convolve(g, sigma, f, e), f) < 1e-15);

    // Twisted group algebra of Z_2: the nontrivial element squares to -1.
    auto z2 = crossed_product(1, 2, {0});
    auto tw = Cocycle2::trivial(z2);
    tw.set(1, 1, cdouble(-1.0, 0.0));
    CHECK(validate_cocycle(z2, tw).ok());
    ArrowFunction d1 = {cdouble(0.0, 0.0), cdouble(1.0, 0.0)};
    ArrowFunction sq = convolve(z2, tw, d1, d1);
    CHECK(std::abs(sq[0] - cdouble(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(sq[1]) < 1e-15);
}

TEST_CASE("star is an involution and an antihomomorphism") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        auto g = random_groupoid(rng);
        auto sigma = random_normalized_cocycle(g, rng);
        ArrowFunction f = random_arrow_function(g, rng);
        ArrowFunction h = random_arrow_function(g, rng);
        CHECK(max_abs_diff(star(g, sigma, star(g, sigma, f)), f) < 1e-12);
        ArrowFunction lhs = star(g, sigma, convolve(g, sigma, f, h));
        ArrowFunction rhs = convolve(g, sigma, star(g, sigma, h), star(g, sigma, f));
        CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    }

    // Untwisted, real, inverse-symmetric: fixed by star.
    auto g = pair_groupoid(3);
    auto sigma = Cocycle2::trivial(g);
    ArrowFunction f(static_cast<std::size_t>(g.arrow_count()));
    for (int a = 0; a < g.arrow_count(); ++a)
        f[static_cast<std::size_t>(a)] = cdouble(1.0 + std::min(a, g.inv(a)), 0.0);
    CHECK(max_abs_diff(star(g, sigma, f), f) == 0.0);
}

TEST_CASE("left regular representation") {
    std::mt19937 rng(17);

    auto g3 = crossed_product(1, 3, {0});
    auto sigma3 = Cocycle2::trivial(g3);
    ArrowFunction f3 = random_arrow_function(g3, rng);
    Eigen::MatrixXcd m = left_regular(g3, sigma3, f3, 0);
    // Group algebra of Z_3: circulant in the group coordinate.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(m(i, j) - f3[static_cast<std::size_t>((j - i + 3) % 3)]) < 1e-15);

    for (int trial = 0; trial < 40; ++trial) {
        auto g = random_groupoid(rng);
        auto sigma = random_normalized_cocycle(g, rng);
        ArrowFunction e = unit_indicator(g);
        ArrowFunction f = random_arrow_function(g, rng);
        ArrowFunction h = random_arrow_function(g, rng);
        ArrowFunction fh = convolve(g, sigma, f, h);
        ArrowFunction fs = star(g, sigma, f);
        for (int x = 0; x < g.unit_count(); ++x) {
            Eigen::MatrixXcd pf = left_regular(g, sigma, f, x);
            CHECK((left_regular(g, sigma, e, x) -
                   Eigen::MatrixXcd::Identity(pf.rows(), pf.cols()))
                      .cwiseAbs()
                      .maxCoeff() < 1e-15);
            CHECK((left_regular(g, sigma, fh, x) - pf * left_regular(g, sigma, h, x))
                      .cwiseAbs()
                      .maxCoeff() < 1e-12);
            CHECK((left_regular(g, sigma, fs, x) - pf.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("norms") {
    std::mt19937 rng(19);
    auto g = random_groupoid(rng);
    auto sigma = random_normalized_cocycle(g, rng);
    ArrowFunction e = unit_indicator(g);
    CHECK(std::abs(reduced_norm(g, sigma, e) - 1.0) < 1e-12);
    CHECK(std::abs(norm_inf1(g, e) - 1.0) < 1e-12);

    ArrowFunction ce = e;
    for (auto& v : ce) v *= cdouble(-2.0, 1.5);
    CHECK(std::abs(reduced_norm(g, sigma, ce) - std::abs(cdouble(-2.0, 1.5))) < 1e-12);

    ArrowFunction single(static_cast<std::size_t>(g.arrow_count()), cdouble(0.0, 0.0));
    single[0] = cdouble(3.0, 0.0);
    CHECK(std::abs(norm_inf1(g, single) - 3.0) < 1e-15);

    for (int trial = 0; trial < 60; ++trial) {
        auto gg = random_groupoid(rng);
        auto ss = random_normalized_cocycle(gg, rng);
        ArrowFunction f = random_arrow_function(gg, rng);
        double red = reduced_norm(gg, ss, f);
        CHECK(red <= norm_inf1(gg, f) + 1e-12);
        ArrowFunction sf = star(gg, ss, f);
        CHECK(std::abs(reduced_norm(gg, ss, convolve(gg, ss, sf, f)) - red * red) < 1e-10);
    }
}

TEST_CASE("invariant subsets") {
    auto pg = pair_groupoid(3);
    auto inv_pg = invariant_subsets(pg);
    REQUIRE(inv_pg.size() == 1);
    CHECK(inv_pg[0].units == std::vector<int>{0, 1, 2});
    CHECK(inv_pg[0].minimal);

    auto sg = set_groupoid(3);
    auto inv_sg = invariant_subsets(sg);
    CHECK(inv_sg.size() == 7);
    int minimal = 0;
    for (const auto& s : inv_sg)
        if (s.minimal) {
            ++minimal;
            CHECK(s.units.size() == 1);
        }
    CHECK(minimal == 3);

    // Z_2 acting on 4 points as two 2-cycles: exactly the two orbits and
    // their union.
    auto tc = crossed_product(4, 2, {1, 0, 3, 2});
    auto inv_tc = invariant_subsets(tc);
    REQUIRE(inv_tc.size() == 3);
    std::set<std::vector<int>> sets;
    for (const auto& s : inv_tc) sets.insert(s.units);
    CHECK(sets.count({0, 1}) == 1);
    CHECK(sets.count({2, 3}) == 1);
    CHECK(sets.count({0, 1, 2, 3}) == 1);
}

TEST_CASE("restriction is an exact *-homomorphism") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        auto g = random_groupoid(rng);
        auto sigma = random_normalized_cocycle(g, rng);
        for (const auto& m : invariant_subsets(g)) {
            auto res = restrict_groupoid(g, m.units);
            auto sub_sigma = restrict_cocycle(res, sigma);
            CHECK(validate_cocycle(res.sub, sub_sigma).ok());
            ArrowFunction f = random_arrow_function(g, rng);
            ArrowFunction h = random_arrow_function(g, rng);
            // Bitwise equality: the restricted sums run over the same
            // summands in the same order.
            CHECK(max_abs_diff(restrict_function(res, convolve(g, sigma, f, h)),
                               convolve(res.sub, sub_sigma, restrict_function(res, f),
                                        restrict_function(res, h))) == 0.0);
            CHECK(max_abs_diff(restrict_function(res, star(g, sigma, f)),
                               star(res.sub, sub_sigma, restrict_function(res, f))) == 0.0);
            CHECK(reduced_norm(res.sub, sub_sigma, restrict_function(res, f)) <=
                  reduced_norm(g, sigma, f) + 1e-12);
        }
    }

    auto sg = set_groupoid(4);
    auto tiny = restrict_groupoid(sg, {2});
    ArrowFunction f = {cdouble(5, 0), cdouble(6, 0), cdouble(7, 0), cdouble(8, 0)};
    auto rf = restrict_function(tiny, f);
    REQUIRE(rf.size() == 1);
    CHECK(rf[0] == cdouble(7, 0));

    CHECK_THROWS_AS(restrict_groupoid(pair_groupoid(2), std::vector<int>{0}),
                    std::invalid_argument);
}

TEST_CASE("spectra of normal elements") {
    std::mt19937 rng(29);

    auto sg = set_groupoid(4);
    auto triv = Cocycle2::trivial(sg);
    CHECK(spectrum_of_normal(sg, triv, unit_indicator(sg)).real_points ==
          CompactRealSet::from_points({1.0}, 0.0));
    ArrowFunction vals = {cdouble(0.5, 0), cdouble(-1, 0), cdouble(2, 0), cdouble(0.5, 0)};
    auto sp = spectrum_of_normal(sg, triv, vals, 0.0);
    CHECK(sp.self_adjoint);
    CHECK(sp.real_points == CompactRealSet::from_points({-1.0, 0.5, 2.0}, 0.0));

    // Nilpotent matrix unit in the pair groupoid is not normal.
    auto pg = pair_groupoid(2);
    ArrowFunction nil(4, cdouble(0, 0));
    nil[1] = cdouble(1, 0);  // arrow (0,1)
    CHECK_THROWS_AS(spectrum_of_normal(pg, Cocycle2::trivial(pg), nil), std::invalid_argument);

    // One unit per orbit sees the same spectrum as all units together.
    for (int trial = 0; trial < 25; ++trial) {
        auto g = random_groupoid(rng);
        auto sigma = random_normalized_cocycle(g, rng);
        ArrowFunction f = random_self_adjoint(g, sigma, rng);
        auto via_orbits = spectrum_of_normal(g, sigma, f, 1e-12);
        std::vector<double> all;
        for (int x = 0; x < g.unit_count(); ++x) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(left_regular(g, sigma, f, x),
                                                               Eigen::EigenvaluesOnly);
            REQUIRE(es.info() == Eigen::Success);
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
                all.push_back(es.eigenvalues()(i));
        }
        auto via_all = CompactRealSet::from_points(all, 1e-12);
        CHECK(hausdorff_distance(via_orbits.real_points, via_all) < 1e-12);
    }
}

TEST_CASE("equivalent units have unitarily equivalent representations") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        auto g = random_groupoid(rng);
        auto sigma = random_normalized_cocycle(g, rng);
        ArrowFunction f = random_arrow_function(g, rng);
        for (int x = 0; x < g.unit_count(); ++x)
            for (int y = x + 1; y < g.unit_count(); ++y) {
                if (g.orbit_of()[static_cast<std::size_t>(x)] !=
                    g.orbit_of()[static_cast<std::size_t>(y)])
                    continue;
                Eigen::JacobiSVD<Eigen::MatrixXcd> sx(left_regular(g, sigma, f, x));
                Eigen::JacobiSVD<Eigen::MatrixXcd> sy(left_regular(g, sigma, f, y));
                REQUIRE(sx.singularValues().size() == sy.singularValues().size());
                CHECK((sx.singularValues() - sy.singularValues()).cwiseAbs().maxCoeff() < 1e-12);
            }
    }
}

TEST_CASE("cocycle validation, coboundaries, normalization") {
    std::mt19937 rng(37);
    auto g = crossed_product(2, 2, {1, 0});
    CHECK(validate_cocycle(g, Cocycle2::trivial(g)).ok());

    auto db = random_normalized_cocycle(g, rng);
    CHECK(validate_cocycle(g, db).ok());

    // A coboundary of a phase that is not 1 on units satisfies the pair
    // identity but is not normalized; normalize() repairs it.
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::vector<cdouble> tau(static_cast<std::size_t>(g.arrow_count()));
    for (auto& t : tau) t = std::polar(1.0, angle(rng));
    auto raw = coboundary(g, tau);
    auto raw_report = validate_cocycle(g, raw);
    CHECK_FALSE(raw_report.ok());
    for (const auto& v : raw_report.violations) CHECK(v.find("normalized") != std::string::npos);
    CHECK(validate_cocycle(g, normalize(g, raw)).ok());

    // Corrupted values on a composable pair are reported: arrow 1 = (0,1)
    // has source 1, arrow 2 = e_1, so (1, 2) is composable.
    REQUIRE(g.composable(1, 2));
    auto bad_modulus = Cocycle2::trivial(g);
    bad_modulus.set(1, 2, cdouble(0.5, 0.0));
    CHECK_FALSE(validate_cocycle(g, bad_modulus).ok());
    auto bad_identity = Cocycle2::trivial(g);
    bad_identity.set(1, 2, cdouble(0.0, 1.0));  // unit modulus, identity broken
    auto bad_report = validate_cocycle(g, bad_identity);
    CHECK_FALSE(bad_report.ok());
    bool pair_identity_flagged = false;
    for (const auto& v : bad_report.violations)
        if (v.find("pair-composition") != std::string::npos) pair_identity_flagged = true;
    CHECK(pair_identity_flagged);

    // Twisting by a normalized coboundary is implemented by the phase map
    // f -> f conj(tau); reduced norms agree.
    for (int trial = 0; trial < 20; ++trial) {
        auto gg = random_groupoid(rng);
        auto sigma = random_normalized_cocycle(gg, rng);
        std::vector<cdouble> tau2(static_cast<std::size_t>(gg.arrow_count()));
        for (auto& t : tau2) t = std::polar(1.0, angle(rng));
        for (int x = 0; x < gg.unit_count(); ++x)
            tau2[static_cast<std::size_t>(gg.unit_arrow(x))] = cdouble(1.0, 0.0);
        auto dtau = coboundary(gg, tau2);
        auto twisted = Cocycle2::trivial(gg);
        for (int a = 0; a < gg.arrow_count(); ++a)
            for (int b = 0; b < gg.arrow_count(); ++b)
                if (gg.composable(a, b)) twisted.set(a, b, sigma(a, b) * dtau(a, b));
        CHECK(validate_cocycle(gg, twisted).ok());
        ArrowFunction f = random_arrow_function(gg, rng);
        ArrowFunction fadj = f;
        for (int a = 0; a < gg.arrow_count(); ++a)
            fadj[static_cast<std::size_t>(a)] *= std::conj(tau2[static_cast<std::size_t>(a)]);
        CHECK(std::abs(reduced_norm(gg, sigma, f) - reduced_norm(gg, twisted, fadj)) < 1e-10);
    }
}

TEST_CASE("unitary modules") {
    auto g = crossed_product(2, 4, {1, 0});
    Module1Cocycle good;
    good.values.resize(static_cast<std::size_t>(g.arrow_count()));
    for (int x = 0; x < 2; ++x)
        for (int m = 0; m < 4; ++m)
            good.values[static_cast<std::size_t>(x * 4 + m)] = std::polar(1.0, 2.0 * M_PI * m / 4.0);
    CHECK(validate_module(g, good).ok());

    Module1Cocycle bad = good;
    bad.values[3] = std::polar(1.0, 0.1);
    CHECK_FALSE(validate_module(g, bad).ok());
}

TEST_CASE("eventually-equal unit sets give eventually-equal spectra") {
    // On a set groupoid every subset is invariant and spectra are value sets:
    // Hausdorff distance 0 exactly when the subsets coincide.
    auto sg = set_groupoid(5);
    auto triv = Cocycle2::trivial(sg);
    ArrowFunction f = {cdouble(0.1, 0), cdouble(1.2, 0), cdouble(-3.0, 0), cdouble(2.5, 0),
                       cdouble(4.0, 0)};
    auto subsets = invariant_subsets(sg);
    for (const auto& m1 : subsets)
        for (const auto& m2 : subsets) {
            auto r1 = restrict_groupoid(sg, m1.units);
            auto r2 = restrict_groupoid(sg, m2.units);
            auto s1 = spectrum_of_normal(r1.sub, restrict_cocycle(r1, triv),
                                         restrict_function(r1, f), 0.0);
            auto s2 = spectrum_of_normal(r2.sub, restrict_cocycle(r2, triv),
                                         restrict_function(r2, f), 0.0);
            double d = hausdorff_distance(s1.real_points, s2.real_points);
            if (m1.units == m2.units)
                CHECK(d == 0.0);
            else
                CHECK(d > 0.0);
        }
}

TEST_CASE("groupoid and cocycle text round-trips") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 15; ++trial) {
        auto g = random_groupoid(rng);
        auto back = groupoid_from_text(to_text(g));
        CHECK(back == g);
        auto sigma = random_normalized_cocycle(g, rng);
        auto sigma_back = cocycle_from_text(g, cocycle_to_text(g, sigma));
        double worst = 0.0;
        for (int a = 0; a < g.arrow_count(); ++a)
            for (int b = 0; b < g.arrow_count(); ++b)
                if (g.composable(a, b)) worst = std::max(worst, std::abs(sigma(a, b) - sigma_back(a, b)));
        CHECK(worst == 0.0);
    }
    CHECK_THROWS_AS(groupoid_from_text("nonsense"), std::invalid_argument);
}

TEST_CASE("convolution is associative on random instances") {
    std::mt19937 rng(43);
    for (int trial = 0; trial < 40; ++trial) {
        auto g = random_groupoid(rng);
        auto sigma = random_normalized_cocycle(g, rng);
        ArrowFunction f = random_arrow_function(g, rng);
        ArrowFunction h = random_arrow_function(g, rng);
        ArrowFunction k = random_arrow_function(g, rng);
        ArrowFunction lhs = convolve(g, sigma, convolve(g, sigma, f, h), k);
        ArrowFunction rhs = convolve(g, sigma, f, convolve(g, sigma, h, k));
        CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    }
}
