#include <catch2/catch_amalgamated.hpp>

#include "aqlab/subshift_io.hpp"
#include "aqlab/symdyn.hpp"

#include <cmath>
#include <random>

using namespace aqlab::symdyn;

namespace {

std::set<std::string> rendered(const Alphabet& a, const std::set<Word>& words) {
    std::set<std::string> out;
    for (const auto& w : words) out.insert(render(a, w));
    return out;
}

Substitution fibonacci_substitution() {
    Alphabet ab = Alphabet::ab();
    // a -> ab, b -> a
    return Substitution(ab, {parse_word(ab, "ab"), parse_word(ab, "a")});
}

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

} // namespace

TEST_CASE("mechanical words by direct floor arithmetic") {
    CHECK(render(Alphabet::binary01(), mechanical_word(0.0, 0.0, 0, 4)) == "00000");
    CHECK(render(Alphabet::binary01(), mechanical_word(0.5, 0.0, 0, 3)) == "0101");
    CHECK(render(Alphabet::binary01(), mechanical_word(kGolden, 0.0, 0, 4)) == "01011");
    CHECK(mechanical_word(0.5, 0.0, 3, 2).empty());

    // The exact rational form agrees with the floating form on a slope
    // where doubles are exact.
    for (long long n = -20; n <= 20; ++n)
        CHECK(mechanical_symbol_rational(1, 2, 0, n) == mechanical_symbol(0.5, 0.0, n));
}

TEST_CASE("mechanical slope p/q with gcd 1 has exact period q") {
    for (auto [p, q] : {std::pair<long long, long long>{1, 2}, {2, 5}, {3, 7}, {1, 4}, {5, 8}}) {
        auto c = Configuration::mechanical_rational(p, q);
        for (long long n = -30; n <= 30; ++n) CHECK(c.at(n + q) == c.at(n));
        for (long long d = 1; d < q; ++d) {
            bool differs = false;
            for (long long n = 0; n < q && !differs; ++n)
                if (c.at(n + d) != c.at(n)) differs = true;
            CHECK(differs);
        }
    }
}

TEST_CASE("substitution iteration") {
    auto fib = fibonacci_substitution();
    const Alphabet& ab = fib.alphabet;
    CHECK(render(ab, substitution_iterate(fib, ab.symbol_of("a"), 0)) == "a");
    CHECK(render(ab, substitution_iterate(fib, ab.symbol_of("a"), 4)) == "abaababa");

    Alphabet one({"a"});
    Substitution doubling(one, {parse_word(one, "aa")});
    CHECK(render(one, substitution_iterate(doubling, 0, 3)) == "aaaaaaaa");
}

TEST_CASE("configurations: windows, translation, substitution fixed point") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<long long> coord(-300, 300);

    auto fib = fibonacci_substitution();
    std::vector<Configuration> corpus = {
        Configuration::periodic(Alphabet::ab(), parse_word(Alphabet::ab(), "aab")),
        Configuration::mechanical(kGolden, 0.37),
        Configuration::mechanical_rational(2, 5, 1),
        Configuration::splice(Alphabet::binary01(), 0, 1),
        Configuration::substitution_fixed_point(fib, fib.alphabet.symbol_of("a")),
    };
    for (const auto& c : corpus) {
        for (int trial = 0; trial < 50; ++trial) {
            long long h = coord(rng), n = coord(rng);
            CHECK(c.translated(h).at(n) == c.at(n + h));
        }
        long long lo = coord(rng);
        long long hi = lo + 40;
        Word w = c.window(lo, hi);
        REQUIRE(w.size() == 41);
        for (long long n = lo; n <= hi; ++n) CHECK(w[static_cast<std::size_t>(n - lo)] == c.at(n));
    }

    // The two-sided Fibonacci fixed point reads the one-sided fixed point on
    // the right and stays admissible across the junction.
    const auto& fp = corpus[4];
    Word right = fp.window(0, 7);
    CHECK(render(fib.alphabet, right) == "abaababa");
}

TEST_CASE("periodic subshifts enumerate their orbits") {
    auto ab = Alphabet::ab();
    auto s2 = Subshift::periodic(ab, parse_word(ab, "ab"));
    CHECK(s2.period() == 2);
    CHECK(rendered(ab, s2.language(2)) == std::set<std::string>{"ab", "ba"});
    CHECK(rendered(ab, s2.language(3)) == std::set<std::string>{"aba", "bab"});

    auto s1 = Subshift::periodic(ab, parse_word(ab, "a"));
    CHECK(s1.period() == 1);
    CHECK(rendered(ab, s1.language(4)) == std::set<std::string>{"aaaa"});

    auto s3 = Subshift::periodic(ab, parse_word(ab, "aab"));
    CHECK(s3.period() == 3);
    CHECK(rendered(ab, s3.language(2)) == std::set<std::string>{"aa", "ab", "ba"});

    // Rotations and repetitions name the same orbit.
    CHECK(Subshift::periodic(ab, parse_word(ab, "ba")) == s2);
    CHECK(Subshift::periodic(ab, parse_word(ab, "abab")) == s2);
}

TEST_CASE("full shift dictionary") {
    auto s = Subshift::full_shift(Alphabet::ab());
    CHECK(s.language(2).size() == 4);
    CHECK(s.language(5).size() == 32);
}

TEST_CASE("Sturmian dictionary has complexity n+1") {
    auto fib = Subshift::orbit_closure(Configuration::mechanical(kGolden, 0.0));
    auto b01 = Alphabet::binary01();
    CHECK(rendered(b01, fib.language(2)) == std::set<std::string>{"01", "10", "11"});
    for (int n = 1; n <= 12; ++n)
        CHECK(fib.language(n).size() == static_cast<std::size_t>(n) + 1);
}

TEST_CASE("substitution orbit equals the mechanical orbit up to relabeling") {
    // Independent constructions of the same subshift: the golden-slope
    // mechanical word (symbol 1 <-> a, frequency (sqrt5-1)/2) and the
    // a->ab, b->a fixed point.
    auto fib = fibonacci_substitution();
    auto sub = Subshift::orbit_closure(
        Configuration::substitution_fixed_point(fib, fib.alphabet.symbol_of("a")));
    auto mech = Subshift::orbit_closure(Configuration::mechanical(kGolden, 0.0));
    for (int n = 1; n <= 10; ++n) {
        std::set<Word> translated;
        for (Word w : sub.language(n)) {
            for (auto& s : w) s = s == 0 ? 1 : 0;  // a -> 1, b -> 0
            translated.insert(w);
        }
        CHECK(translated == mech.language(n));
    }
}

TEST_CASE("languages are factorial, extendable, and shift-invariant") {
    auto fib = fibonacci_substitution();
    std::vector<Subshift> corpus = {
        Subshift::periodic(Alphabet::ab(), parse_word(Alphabet::ab(), "aab")),
        Subshift::periodic(Alphabet::binary01(), parse_word(Alphabet::binary01(), "01")),
        Subshift::orbit_closure(Configuration::mechanical(kGolden, 0.0)),
        Subshift::orbit_closure(Configuration::mechanical_rational(2, 5, 0)),
        Subshift::orbit_closure(Configuration::splice(Alphabet::binary01(), 0, 1)),
        Subshift::orbit_closure(
            Configuration::substitution_fixed_point(fib, fib.alphabet.symbol_of("a"))),
        Subshift::full_shift(Alphabet::ab()),
    };
    for (const auto& s : corpus) {
        for (int n = 2; n <= 8; ++n) {
            auto lang = s.language(n);
            auto shorter = s.language(n - 1);
            auto longer = s.language(n + 1);
            for (const auto& w : lang) {
                // factorial: every contiguous subword is admissible
                CHECK(shorter.count(Word(w.begin(), w.end() - 1)) == 1);
                CHECK(shorter.count(Word(w.begin() + 1, w.end())) == 1);
                // extendable on both sides
                bool left = false, right = false;
                for (int c = 0; c < s.alphabet().size() && !(left && right); ++c) {
                    Word lw = w;
                    lw.insert(lw.begin(), c);
                    if (longer.count(lw)) left = true;
                    Word rw = w;
                    rw.push_back(c);
                    if (longer.count(rw)) right = true;
                }
                CHECK(left);
                CHECK(right);
            }
        }
    }

    // Shifting the generator leaves the dictionary unchanged.
    for (const auto& s : corpus) {
        if (s.kind() != Subshift::Kind::OrbitClosure) continue;
        auto shifted = Subshift::orbit_closure(s.representatives()[0].translated(7));
        for (int n = 1; n <= 8; ++n) CHECK(shifted.language(n) == s.language(n));
    }
}

TEST_CASE("dictionary metric") {
    auto ab = Alphabet::ab();
    auto pa = Subshift::periodic(ab, parse_word(ab, "a"));
    auto pb = Subshift::periodic(ab, parse_word(ab, "b"));
    CHECK(subshift_distance(pa, pa, 16) == DyadicDistance::zero_value());
    CHECK(subshift_distance(pa, pb, 16) == DyadicDistance::pow2(1));
    CHECK(subshift_distance(pa, pb, 16).value() == 0.5);

    auto b01 = Alphabet::binary01();
    auto per01 = Subshift::periodic(b01, parse_word(b01, "01"));
    auto fib = Subshift::orbit_closure(Configuration::mechanical(kGolden, 0.0));
    CHECK(subshift_distance(per01, fib, 16) == DyadicDistance::pow2(2));

    CHECK_THROWS_AS(subshift_distance(pa, per01, 8), std::invalid_argument);
}

TEST_CASE("dictionary metric is an ultrametric on a corpus") {
    auto b01 = Alphabet::binary01();
    std::vector<Subshift> corpus = {
        Subshift::periodic(b01, parse_word(b01, "0")),
        Subshift::periodic(b01, parse_word(b01, "1")),
        Subshift::periodic(b01, parse_word(b01, "01")),
        Subshift::periodic(b01, parse_word(b01, "011")),
        Subshift::periodic(b01, parse_word(b01, "01011")),
        Subshift::orbit_closure(Configuration::mechanical(kGolden, 0.0)),
        Subshift::orbit_closure(Configuration::mechanical_rational(2, 5, 0)),
        Subshift::orbit_closure(Configuration::splice(b01, 0, 1)),
        Subshift::full_shift(b01),
    };
    for (const auto& x : corpus)
        for (const auto& y : corpus)
            for (const auto& z : corpus) {
                double dxz = subshift_distance(x, z, 10).value();
                double dxy = subshift_distance(x, y, 10).value();
                double dyz = subshift_distance(y, z, 10).value();
                CHECK(dxz <= std::max(dxy, dyz));
            }
}

TEST_CASE("point-Hausdorff distance") {
    auto ab = Alphabet::ab();
    auto pa = Subshift::periodic(ab, parse_word(ab, "a"));
    auto pb = Subshift::periodic(ab, parse_word(ab, "b"));
    CHECK(point_hausdorff_distance(pa, pa, 8) == DyadicDistance::zero_value());
    CHECK(point_hausdorff_distance(pa, pb, 8).value() == 1.0);

    auto splice = Subshift::orbit_closure(Configuration::splice(ab, 0, 1));
    auto per = Subshift::periodic(ab, parse_word(ab, "ab"));
    CHECK(point_hausdorff_distance(splice, per, 12).value() == 0.5);

    // Identical point sets under different descriptions cannot be certified
    // apart at any finite window.
    auto full1 = Subshift::full_shift(Alphabet({"a"}));
    auto pera = Subshift::periodic(Alphabet({"a"}), Word{0});
    CHECK_THROWS_AS(point_hausdorff_distance(full1, pera, 8), WindowTooSmall);
}

TEST_CASE("necklace enumeration and the splice bound") {
    auto b01 = Alphabet::binary01();
    auto necklaces = periodic_orbit_words(b01, 2);
    REQUIRE(necklaces.size() == 3);  // 0, 1, 01

    auto ab = Alphabet::ab();
    auto splice = Subshift::orbit_closure(Configuration::splice(ab, 0, 1));

    auto p1 = min_distance_to_periodic(splice, 1);
    CHECK(p1.distance.value() == 1.0);
    CHECK(render(ab, p1.best_word) == "a");

    auto p6 = min_distance_to_periodic(splice, 6);
    CHECK(p6.distance.value() == 0.5);
    CHECK(render(ab, p6.best_word) == "ab");

    auto self = min_distance_to_periodic(Subshift::periodic(ab, parse_word(ab, "ab")), 2);
    CHECK(self.distance == DyadicDistance::zero_value());
    CHECK(render(ab, self.best_word) == "ab");
}

TEST_CASE("continued-fraction convergents") {
    auto golden = convergent_approximants(kGolden, 5);
    REQUIRE(golden.items.size() == 5);
    CHECK_FALSE(golden.exhausted);
    std::vector<std::pair<long long, long long>> expect = {{1, 1}, {1, 2}, {2, 3}, {3, 5}, {5, 8}};
    for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(golden.items[i].p == expect[i].first);
        CHECK(golden.items[i].q == expect[i].second);
        CHECK(golden.items[i].orbit.period() == expect[i].second);
        double err = std::abs(kGolden - static_cast<double>(golden.items[i].p) / golden.items[i].q);
        CHECK(err < 1.0 / (golden.items[i].q * golden.items[i].q));
    }

    auto pi_inv = convergent_approximants(1.0 / M_PI, 3);
    REQUIRE(pi_inv.items.size() == 3);
    CHECK(pi_inv.items[0].p == 1);
    CHECK(pi_inv.items[0].q == 3);
    for (const auto& c : pi_inv.items) {
        double err = std::abs(1.0 / M_PI - static_cast<double>(c.p) / c.q);
        CHECK(err < 1.0 / (c.q * c.q));
    }

    auto half = convergent_approximants(0.5, 3);
    CHECK(half.exhausted);
    REQUIRE(half.items.size() == 1);
    CHECK(half.items[0].p == 1);
    CHECK(half.items[0].q == 2);
}

TEST_CASE("both metrics shrink along the convergent family") {
    auto fib = Subshift::orbit_closure(Configuration::mechanical(kGolden, 0.0));
    auto approx = convergent_approximants(kGolden, 6);
    double prev_dict = 2.0, prev_point = 2.0;
    for (const auto& c : approx.items) {
        double dict = subshift_distance(c.orbit, fib, 64).value();
        double point = point_hausdorff_distance(c.orbit, fib, 32).value();
        CHECK(dict > 0.0);
        CHECK(point > 0.0);
        CHECK(dict <= prev_dict);
        CHECK(point <= prev_point);
        prev_dict = dict;
        prev_point = point;
    }
    // Joint decrease end to end, not just non-increase.
    double first_dict = subshift_distance(approx.items.front().orbit, fib, 64).value();
    double last_dict = subshift_distance(approx.items.back().orbit, fib, 64).value();
    double first_point = point_hausdorff_distance(approx.items.front().orbit, fib, 32).value();
    double last_point = point_hausdorff_distance(approx.items.back().orbit, fib, 32).value();
    CHECK(last_dict < first_dict);
    CHECK(last_point < first_point);
}

TEST_CASE("subshift records round-trip") {
    auto fib = fibonacci_substitution();
    std::vector<Subshift> corpus = {
        Subshift::periodic(Alphabet::ab(), parse_word(Alphabet::ab(), "aab")),
        Subshift::orbit_closure(Configuration::mechanical(kGolden, 0.25)),
        Subshift::orbit_closure(Configuration::mechanical_rational(3, 7, 2)),
        Subshift::orbit_closure(Configuration::splice(Alphabet::binary01(), 0, 1)),
        Subshift::orbit_closure(
            Configuration::substitution_fixed_point(fib, fib.alphabet.symbol_of("a"))),
        Subshift::full_shift(Alphabet::binary01()),
    };
    for (const auto& s : corpus) {
        auto back = subshift_from_record_text(to_record_text(s));
        CHECK(back == s);
        CHECK(back.language(3) == s.language(3));
        if (s.kind() == Subshift::Kind::OrbitClosure)
            CHECK(back.representatives()[0].descriptor() == s.representatives()[0].descriptor());
    }
}
