#pragma once

// Finite groupoids with counting measure on the fibers, normalized
// 2-cocycles, the twisted convolution *-algebra, its left-regular
// representation, and the spectral bookkeeping that goes with them.
// Everything is exact at finite scale: axioms and identities are checked by
// exhaustive enumeration at construction time.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aqlab/detail/text.hpp"
#include "aqlab/spectra.hpp"

namespace aqlab::groupoids {

using cdouble = std::complex<double>;

// Arrows and units are dense integer indices.  The composition table is
// dense with -1 marking non-composable pairs, so membership and lookup are
// O(1) and the axioms can be swept exhaustively.
class FiniteGroupoid {
  public:
    FiniteGroupoid(int units, std::vector<int> range, std::vector<int> source,
                   std::vector<int> inverse, std::vector<int> unit_arrow,
                   std::vector<int> compose_table)
        : units_(units),
          range_(std::move(range)),
          source_(std::move(source)),
          inverse_(std::move(inverse)),
          unit_arrow_(std::move(unit_arrow)),
          compose_(std::move(compose_table)) {
        validate_axioms();
        build_fibers();
    }

    int unit_count() const { return units_; }
    int arrow_count() const { return static_cast<int>(range_.size()); }

    int r(int a) const { return range_[check_arrow(a)]; }
    int s(int a) const { return source_[check_arrow(a)]; }
    int inv(int a) const { return inverse_[check_arrow(a)]; }
    int unit_arrow(int x) const { return unit_arrow_[check_unit(x)]; }
    bool is_unit_arrow(int a) const { return unit_arrow_[range_[check_arrow(a)]] == a; }

    bool composable(int a, int b) const {
        return compose_[static_cast<std::size_t>(check_arrow(a)) * range_.size() +
                        static_cast<std::size_t>(check_arrow(b))] >= 0;
    }
    int compose(int a, int b) const {
        int c = compose_[static_cast<std::size_t>(check_arrow(a)) * range_.size() +
                         static_cast<std::size_t>(check_arrow(b))];
        if (c < 0) throw std::invalid_argument("arrows are not composable");
        return c;
    }

    // Arrows with range (resp. source) x, ascending by arrow index.  The
    // ascending order is load-bearing: restriction keeps it, which makes the
    // restricted convolution sums bitwise equal to the ambient ones.
    const std::vector<int>& range_fiber(int x) const { return range_fiber_[check_unit(x)]; }
    const std::vector<int>& source_fiber(int x) const { return source_fiber_[check_unit(x)]; }

    // Orbit id per unit (ids are 0..orbit_count-1, numbered by smallest member).
    const std::vector<int>& orbit_of() const { return orbit_of_; }
    int orbit_count() const { return orbit_count_; }

    // One representative per orbit: the smallest unit index, ascending.
    std::vector<int> orbit_representatives() const {
        std::vector<int> reps(static_cast<std::size_t>(orbit_count_), -1);
        for (int x = 0; x < units_; ++x)
            if (reps[static_cast<std::size_t>(orbit_of_[static_cast<std::size_t>(x)])] < 0)
                reps[static_cast<std::size_t>(orbit_of_[static_cast<std::size_t>(x)])] = x;
        return reps;
    }

    bool operator==(const FiniteGroupoid& o) const {
        return units_ == o.units_ && range_ == o.range_ && source_ == o.source_ &&
               inverse_ == o.inverse_ && unit_arrow_ == o.unit_arrow_ && compose_ == o.compose_;
    }

  private:
    int check_arrow(int a) const {
        if (a < 0 || a >= arrow_count()) throw std::out_of_range("arrow index out of range");
        return a;
    }
    int check_unit(int x) const {
        if (x < 0 || x >= units_) throw std::out_of_range("unit index out of range");
        return x;
    }

    void validate_axioms() const {
        const std::size_t n = range_.size();
        if (units_ <= 0) throw std::invalid_argument("groupoid needs at least one unit");
        if (source_.size() != n || inverse_.size() != n || compose_.size() != n * n ||
            unit_arrow_.size() != static_cast<std::size_t>(units_))
            throw std::invalid_argument("groupoid table sizes disagree");
        for (std::size_t a = 0; a < n; ++a) {
            if (range_[a] < 0 || range_[a] >= units_ || source_[a] < 0 || source_[a] >= units_)
                throw std::invalid_argument("arrow endpoint out of range");
            int ia = inverse_[a];
            if (ia < 0 || static_cast<std::size_t>(ia) >= n)
                throw std::invalid_argument("inverse out of range");
            if (static_cast<std::size_t>(inverse_[static_cast<std::size_t>(ia)]) != a)
                throw std::invalid_argument("inverse is not an involution");
            if (range_[static_cast<std::size_t>(ia)] != source_[a] ||
                source_[static_cast<std::size_t>(ia)] != range_[a])
                throw std::invalid_argument("inverse must swap range and source");
        }
        for (int x = 0; x < units_; ++x) {
            int e = unit_arrow_[static_cast<std::size_t>(x)];
            if (e < 0 || static_cast<std::size_t>(e) >= n)
                throw std::invalid_argument("unit arrow out of range");
            if (range_[static_cast<std::size_t>(e)] != x || source_[static_cast<std::size_t>(e)] != x)
                throw std::invalid_argument("unit arrow must be a loop at its unit");
        }
        auto table = [&](std::size_t a, std::size_t b) { return compose_[a * n + b]; };
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                int c = table(a, b);
                bool should = source_[a] == range_[b];
                if (should != (c >= 0))
                    throw std::invalid_argument("composition domain mismatch");
                if (c < 0) continue;
                if (static_cast<std::size_t>(c) >= n)
                    throw std::invalid_argument("composition out of range");
                if (range_[static_cast<std::size_t>(c)] != range_[a] ||
                    source_[static_cast<std::size_t>(c)] != source_[b])
                    throw std::invalid_argument("composition endpoints wrong");
            }
        for (std::size_t a = 0; a < n; ++a) {
            std::size_t er = static_cast<std::size_t>(unit_arrow_[static_cast<std::size_t>(range_[a])]);
            std::size_t es = static_cast<std::size_t>(unit_arrow_[static_cast<std::size_t>(source_[a])]);
            if (static_cast<std::size_t>(table(er, a)) != a ||
                static_cast<std::size_t>(table(a, es)) != a)
                throw std::invalid_argument("unit arrows must act as identities");
            std::size_t ia = static_cast<std::size_t>(inverse_[a]);
            if (static_cast<std::size_t>(table(a, ia)) != er ||
                static_cast<std::size_t>(table(ia, a)) != es)
                throw std::invalid_argument("inverse law fails");
        }
        // Associativity over every composable triple.
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                int ab = table(a, b);
                if (ab < 0) continue;
                for (std::size_t c = 0; c < n; ++c) {
                    int bc = table(b, c);
                    if (bc < 0) continue;
                    if (table(static_cast<std::size_t>(ab), c) !=
                        table(a, static_cast<std::size_t>(bc)))
                        throw std::invalid_argument("composition is not associative");
                }
            }
    }

    void build_fibers() {
        range_fiber_.assign(static_cast<std::size_t>(units_), {});
        source_fiber_.assign(static_cast<std::size_t>(units_), {});
        for (int a = 0; a < arrow_count(); ++a) {
            range_fiber_[static_cast<std::size_t>(range_[static_cast<std::size_t>(a)])].push_back(a);
            source_fiber_[static_cast<std::size_t>(source_[static_cast<std::size_t>(a)])].push_back(a);
        }
        // Orbits: units connected by any arrow.
        std::vector<int> parent(static_cast<std::size_t>(units_));
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x) {
                parent[static_cast<std::size_t>(x)] =
                    parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
                x = parent[static_cast<std::size_t>(x)];
            }
            return x;
        };
        for (int a = 0; a < arrow_count(); ++a) {
            int u = find(range_[static_cast<std::size_t>(a)]);
            int v = find(source_[static_cast<std::size_t>(a)]);
            if (u != v) parent[static_cast<std::size_t>(std::max(u, v))] = std::min(u, v);
        }
        orbit_of_.assign(static_cast<std::size_t>(units_), -1);
        orbit_count_ = 0;
        for (int x = 0; x < units_; ++x) {
            int root = find(x);
            if (orbit_of_[static_cast<std::size_t>(root)] < 0)
                orbit_of_[static_cast<std::size_t>(root)] = orbit_count_++;
            orbit_of_[static_cast<std::size_t>(x)] = orbit_of_[static_cast<std::size_t>(root)];
        }
    }

    int units_;
    std::vector<int> range_, source_, inverse_, unit_arrow_;
    std::vector<int> compose_;  // dense arrows x arrows, -1 = not composable
    std::vector<std::vector<int>> range_fiber_, source_fiber_;
    std::vector<int> orbit_of_;
    int orbit_count_ = 0;
};

// --- standard constructions -------------------------------------------------

// n isolated points: arrows are exactly the unit loops.
inline FiniteGroupoid set_groupoid(int n) {
    if (n <= 0) throw std::invalid_argument("need at least one point");
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<int> comp(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
    for (int a = 0; a < n; ++a)
        comp[static_cast<std::size_t>(a) * static_cast<std::size_t>(n) +
             static_cast<std::size_t>(a)] = a;
    return FiniteGroupoid(n, idx, idx, idx, idx, comp);
}

// Arrows are ordered pairs (x, y) with (x,y)(y,z) = (x,z).
inline FiniteGroupoid pair_groupoid(int n) {
    if (n <= 0) throw std::invalid_argument("need at least one point");
    auto id = [n](int x, int y) { return x * n + y; };
    int m = n * n;
    std::vector<int> rg(static_cast<std::size_t>(m)), sc(static_cast<std::size_t>(m)),
        iv(static_cast<std::size_t>(m)), ua(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            rg[static_cast<std::size_t>(id(x, y))] = x;
            sc[static_cast<std::size_t>(id(x, y))] = y;
            iv[static_cast<std::size_t>(id(x, y))] = id(y, x);
        }
    for (int x = 0; x < n; ++x) ua[static_cast<std::size_t>(x)] = id(x, x);
    std::vector<int> comp(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), -1);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                comp[static_cast<std::size_t>(id(x, y)) * static_cast<std::size_t>(m) +
                     static_cast<std::size_t>(id(y, z))] = id(x, z);
    return FiniteGroupoid(n, rg, sc, iv, ua, comp);
}

// Action groupoid of a single permutation generating a Z_q action on X.
// Arrows are (x, m) for m in Z_q, with r(x,m) = x, s(x,m) = perm^{-m}(x) and
// (x, m)(perm^{-m}(x), l) = (x, m+l mod q).
inline FiniteGroupoid crossed_product(int n_points, int q, const std::vector<int>& perm) {
    if (n_points <= 0 || q <= 0) throw std::invalid_argument("need points and a group order");
    if (perm.size() != static_cast<std::size_t>(n_points))
        throw std::invalid_argument("permutation size mismatch");
    std::vector<bool> seen(static_cast<std::size_t>(n_points), false);
    for (int v : perm) {
        if (v < 0 || v >= n_points || seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("action is not a bijection");
        seen[static_cast<std::size_t>(v)] = true;
    }
    // power[m][x] = perm^m(x); the action of Z_q needs perm^q = id.
    std::vector<std::vector<int>> power(static_cast<std::size_t>(q + 1));
    power[0].resize(static_cast<std::size_t>(n_points));
    std::iota(power[0].begin(), power[0].end(), 0);
    for (int m = 1; m <= q; ++m) {
        power[static_cast<std::size_t>(m)].resize(static_cast<std::size_t>(n_points));
        for (int x = 0; x < n_points; ++x)
            power[static_cast<std::size_t>(m)][static_cast<std::size_t>(x)] =
                perm[static_cast<std::size_t>(
                    power[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(x)])];
    }
    if (power[static_cast<std::size_t>(q)] != power[0])
        throw std::invalid_argument("action order must divide the group order");
    auto inv_power = [&](int m, int x) {  // perm^{-m}(x) = perm^{q-m}(x)
        return power[static_cast<std::size_t>((q - m) % q)][static_cast<std::size_t>(x)];
    };
    auto id = [q](int x, int m) { return x * q + m; };
    int arrows = n_points * q;
    std::vector<int> rg(static_cast<std::size_t>(arrows)), sc(static_cast<std::size_t>(arrows)),
        iv(static_cast<std::size_t>(arrows)), ua(static_cast<std::size_t>(n_points));
    for (int x = 0; x < n_points; ++x)
        for (int m = 0; m < q; ++m) {
            int a = id(x, m);
            rg[static_cast<std::size_t>(a)] = x;
            sc[static_cast<std::size_t>(a)] = inv_power(m, x);
            iv[static_cast<std::size_t>(a)] = id(inv_power(m, x), (q - m) % q);
        }
    for (int x = 0; x < n_points; ++x) ua[static_cast<std::size_t>(x)] = id(x, 0);
    std::vector<int> comp(static_cast<std::size_t>(arrows) * static_cast<std::size_t>(arrows), -1);
    for (int x = 0; x < n_points; ++x)
        for (int m = 0; m < q; ++m)
            for (int l = 0; l < q; ++l)
                comp[static_cast<std::size_t>(id(x, m)) * static_cast<std::size_t>(arrows) +
                     static_cast<std::size_t>(id(inv_power(m, x), l))] = id(x, (m + l) % q);
    return FiniteGroupoid(n_points, rg, sc, iv, ua, comp);
}

inline FiniteGroupoid disjoint_union(const FiniteGroupoid& g1, const FiniteGroupoid& g2) {
    int u1 = g1.unit_count(), a1 = g1.arrow_count();
    int units = u1 + g2.unit_count();
    int arrows = a1 + g2.arrow_count();
    std::vector<int> rg, sc, iv, ua;
    rg.reserve(static_cast<std::size_t>(arrows));
    for (int a = 0; a < a1; ++a) {
        rg.push_back(g1.r(a));
        sc.push_back(g1.s(a));
        iv.push_back(g1.inv(a));
    }
    for (int a = 0; a < g2.arrow_count(); ++a) {
        rg.push_back(g2.r(a) + u1);
        sc.push_back(g2.s(a) + u1);
        iv.push_back(g2.inv(a) + a1);
    }
    for (int x = 0; x < u1; ++x) ua.push_back(g1.unit_arrow(x));
    for (int x = 0; x < g2.unit_count(); ++x) ua.push_back(g2.unit_arrow(x) + a1);
    std::vector<int> comp(static_cast<std::size_t>(arrows) * static_cast<std::size_t>(arrows), -1);
    for (int a = 0; a < a1; ++a)
        for (int b = 0; b < a1; ++b)
            if (g1.composable(a, b))
                comp[static_cast<std::size_t>(a) * static_cast<std::size_t>(arrows) +
                     static_cast<std::size_t>(b)] = g1.compose(a, b);
    for (int a = 0; a < g2.arrow_count(); ++a)
        for (int b = 0; b < g2.arrow_count(); ++b)
            if (g2.composable(a, b))
                comp[static_cast<std::size_t>(a + a1) * static_cast<std::size_t>(arrows) +
                     static_cast<std::size_t>(b + a1)] = g2.compose(a, b) + a1;
    return FiniteGroupoid(units, rg, sc, iv, ua, comp);
}

// --- cocycles ----------------------------------------------------------------

struct CocycleReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Unit-modulus function on composable pairs.  Stored dense over arrow pairs;
// entries on non-composable pairs are unused.
class Cocycle2 {
  public:
    static Cocycle2 trivial(const FiniteGroupoid& g) {
        Cocycle2 c;
        c.n_ = g.arrow_count();
        c.vals_.assign(static_cast<std::size_t>(c.n_) * static_cast<std::size_t>(c.n_),
                       cdouble(1.0, 0.0));
        return c;
    }
    static Cocycle2 from_values(const FiniteGroupoid& g, std::vector<cdouble> vals) {
        if (vals.size() != static_cast<std::size_t>(g.arrow_count()) *
                               static_cast<std::size_t>(g.arrow_count()))
            throw std::invalid_argument("cocycle table size mismatch");
        Cocycle2 c;
        c.n_ = g.arrow_count();
        c.vals_ = std::move(vals);
        return c;
    }

    cdouble operator()(int a, int b) const {
        if (a < 0 || a >= n_ || b < 0 || b >= n_)
            throw std::out_of_range("cocycle index out of range");
        return vals_[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) +
                     static_cast<std::size_t>(b)];
    }
    void set(int a, int b, cdouble v) {
        vals_[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) +
              static_cast<std::size_t>(b)] = v;
    }
    int arrow_count() const { return n_; }

  private:
    int n_ = 0;
    std::vector<cdouble> vals_;
};

constexpr double kAlgebraTol = 1e-12;  // exact identities up to roundoff
constexpr double kNormTol = 1e-10;     // identities through singular values

// Exhaustive check: unit modulus, the associativity-compatibility identity
// on every composable triple, and normalization at the units.
inline CocycleReport validate_cocycle(const FiniteGroupoid& g, const Cocycle2& sigma) {
    CocycleReport rep;
    if (sigma.arrow_count() != g.arrow_count()) {
        rep.violations.push_back("cocycle is sized for a different groupoid");
        return rep;
    }
    int n = g.arrow_count();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (!g.composable(a, b)) continue;
            if (std::abs(std::abs(sigma(a, b)) - 1.0) > kAlgebraTol)
                rep.violations.push_back("modulus != 1 at pair (" + std::to_string(a) + "," +
                                         std::to_string(b) + ")");
        }
    for (int x = 0; x < g.unit_count(); ++x) {
        int e = g.unit_arrow(x);
        if (std::abs(sigma(e, e) - cdouble(1.0, 0.0)) > kAlgebraTol)
            rep.violations.push_back("not normalized at unit " + std::to_string(x));
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (!g.composable(a, b)) continue;
            int ab = g.compose(a, b);
            for (int c = 0; c < n; ++c) {
                if (!g.composable(b, c)) continue;
                int bc = g.compose(b, c);
                cdouble lhs = sigma(a, bc) * sigma(b, c);
                cdouble rhs = sigma(ab, c) * sigma(a, b);
                if (std::abs(lhs - rhs) > kAlgebraTol)
                    rep.violations.push_back("pair-composition identity fails at triple (" +
                                             std::to_string(a) + "," + std::to_string(b) + "," +
                                             std::to_string(c) + ")");
            }
        }
    return rep;
}

// sigma(a, b) = tau(a) tau(b) / tau(ab) for a unit-modulus arrow function tau.
inline Cocycle2 coboundary(const FiniteGroupoid& g, const std::vector<cdouble>& tau) {
    if (tau.size() != static_cast<std::size_t>(g.arrow_count()))
        throw std::invalid_argument("phase function size mismatch");
    for (cdouble t : tau)
        if (std::abs(std::abs(t) - 1.0) > kAlgebraTol)
            throw std::invalid_argument("phase function must have unit modulus");
    Cocycle2 out = Cocycle2::trivial(g);
    for (int a = 0; a < g.arrow_count(); ++a)
        for (int b = 0; b < g.arrow_count(); ++b)
            if (g.composable(a, b))
                out.set(a, b,
                        tau[static_cast<std::size_t>(a)] * tau[static_cast<std::size_t>(b)] /
                            tau[static_cast<std::size_t>(g.compose(a, b))]);
    return out;
}

// Multiply by the coboundary of tau(gamma) = sigma(e_{r(gamma)}, e_{r(gamma)})^{-1};
// the result agrees with sigma up to coboundary and is normalized.
inline Cocycle2 normalize(const FiniteGroupoid& g, const Cocycle2& sigma) {
    std::vector<cdouble> tau(static_cast<std::size_t>(g.arrow_count()));
    for (int a = 0; a < g.arrow_count(); ++a) {
        int e = g.unit_arrow(g.r(a));
        tau[static_cast<std::size_t>(a)] = cdouble(1.0, 0.0) / sigma(e, e);
    }
    Cocycle2 out = Cocycle2::trivial(g);
    for (int a = 0; a < g.arrow_count(); ++a)
        for (int b = 0; b < g.arrow_count(); ++b)
            if (g.composable(a, b))
                out.set(a, b,
                        sigma(a, b) * tau[static_cast<std::size_t>(a)] *
                            tau[static_cast<std::size_t>(b)] /
                            tau[static_cast<std::size_t>(g.compose(a, b))]);
    return out;
}

// Unit-modulus multiplicative arrow function (1-dimensional module).
struct Module1Cocycle {
    std::vector<cdouble> values;  // indexed by arrow
};

inline CocycleReport validate_module(const FiniteGroupoid& g, const Module1Cocycle& delta) {
    CocycleReport rep;
    if (delta.values.size() != static_cast<std::size_t>(g.arrow_count())) {
        rep.violations.push_back("module is sized for a different groupoid");
        return rep;
    }
    for (int a = 0; a < g.arrow_count(); ++a)
        if (std::abs(std::abs(delta.values[static_cast<std::size_t>(a)]) - 1.0) > kAlgebraTol)
            rep.violations.push_back("modulus != 1 at arrow " + std::to_string(a));
    for (int x = 0; x < g.unit_count(); ++x)
        if (std::abs(delta.values[static_cast<std::size_t>(g.unit_arrow(x))] - cdouble(1.0, 0.0)) >
            kAlgebraTol)
            rep.violations.push_back("not 1 at unit " + std::to_string(x));
    for (int a = 0; a < g.arrow_count(); ++a)
        for (int b = 0; b < g.arrow_count(); ++b) {
            if (!g.composable(a, b)) continue;
            cdouble lhs = delta.values[static_cast<std::size_t>(g.compose(a, b))];
            cdouble rhs = delta.values[static_cast<std::size_t>(a)] *
                          delta.values[static_cast<std::size_t>(b)];
            if (std::abs(lhs - rhs) > kAlgebraTol)
                rep.violations.push_back("not multiplicative at pair (" + std::to_string(a) + "," +
                                         std::to_string(b) + ")");
        }
    return rep;
}

// --- the twisted convolution algebra -----------------------------------------

using ArrowFunction = std::vector<cdouble>;  // one value per arrow

inline void check_sizes(const FiniteGroupoid& g, const ArrowFunction& f) {
    if (f.size() != static_cast<std::size_t>(g.arrow_count()))
        throw std::invalid_argument("arrow function size mismatch");
}

inline ArrowFunction unit_indicator(const FiniteGroupoid& g) {
    ArrowFunction f(static_cast<std::size_t>(g.arrow_count()), cdouble(0.0, 0.0));
    for (int x = 0; x < g.unit_count(); ++x)
        f[static_cast<std::size_t>(g.unit_arrow(x))] = cdouble(1.0, 0.0);
    return f;
}

// (fg)(gamma) = sum over eta in the range fiber of r(gamma) of
//               sigma(eta, eta^{-1} gamma) f(eta) g(eta^{-1} gamma).
inline ArrowFunction convolve(const FiniteGroupoid& g, const Cocycle2& sigma,
                              const ArrowFunction& f, const ArrowFunction& h) {
    check_sizes(g, f);
    check_sizes(g, h);
    ArrowFunction out(f.size(), cdouble(0.0, 0.0));
    for (int c = 0; c < g.arrow_count(); ++c) {
        cdouble acc(0.0, 0.0);
        for (int eta : g.range_fiber(g.r(c))) {
            int rest = g.compose(g.inv(eta), c);
            acc += sigma(eta, rest) * f[static_cast<std::size_t>(eta)] *
                   h[static_cast<std::size_t>(rest)];
        }
        out[static_cast<std::size_t>(c)] = acc;
    }
    return out;
}

// f*(gamma) = conj(sigma(gamma, gamma^{-1})) conj(f(gamma^{-1})).
inline ArrowFunction star(const FiniteGroupoid& g, const Cocycle2& sigma, const ArrowFunction& f) {
    check_sizes(g, f);
    ArrowFunction out(f.size());
    for (int a = 0; a < g.arrow_count(); ++a)
        out[static_cast<std::size_t>(a)] =
            std::conj(sigma(a, g.inv(a))) * std::conj(f[static_cast<std::size_t>(g.inv(a))]);
    return out;
}

// Matrix of left twisted convolution by f on the basis Gamma^x (ascending
// arrow order): pi_x(f)[i, j] = f(gamma_i^{-1} gamma_j) sigma(gamma_i,
// gamma_i^{-1} gamma_j).
inline Eigen::MatrixXcd left_regular(const FiniteGroupoid& g, const Cocycle2& sigma,
                                     const ArrowFunction& f, int x) {
    check_sizes(g, f);
    const std::vector<int>& fiber = g.range_fiber(x);
    Eigen::Index n = static_cast<Eigen::Index>(fiber.size());
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            int gi = fiber[static_cast<std::size_t>(i)];
            int gj = fiber[static_cast<std::size_t>(j)];
            int rest = g.compose(g.inv(gi), gj);
            m(i, j) = f[static_cast<std::size_t>(rest)] * sigma(gi, rest);
        }
    return m;
}

inline double operator_norm(const Eigen::MatrixXcd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

// sup over units of the operator norm of the left-regular matrix.
inline double reduced_norm(const FiniteGroupoid& g, const Cocycle2& sigma, const ArrowFunction& f) {
    double best = 0.0;
    for (int x = 0; x < g.unit_count(); ++x)
        best = std::max(best, operator_norm(left_regular(g, sigma, f, x)));
    return best;
}

// max over units of the larger of the range-fiber and source-fiber absolute
// sums; dominates the reduced norm and needs no cocycle (|sigma| = 1).
inline double norm_inf1(const FiniteGroupoid& g, const ArrowFunction& f) {
    check_sizes(g, f);
    double best = 0.0;
    for (int x = 0; x < g.unit_count(); ++x) {
        double row = 0.0, col = 0.0;
        for (int a : g.range_fiber(x)) row += std::abs(f[static_cast<std::size_t>(a)]);
        for (int a : g.source_fiber(x)) col += std::abs(f[static_cast<std::size_t>(a)]);
        best = std::max({best, row, col});
    }
    return best;
}

// --- invariant subsets and restriction ---------------------------------------

struct InvariantSet {
    std::vector<int> units;  // ascending
    bool minimal = false;    // single orbit
};

// All nonempty unions of orbits; minimal ones are the single orbits.
inline std::vector<InvariantSet> invariant_subsets(const FiniteGroupoid& g) {
    int k = g.orbit_count();
    if (k > 20) throw std::invalid_argument("too many orbits to enumerate all unions");
    std::vector<std::vector<int>> orbit_units(static_cast<std::size_t>(k));
    for (int x = 0; x < g.unit_count(); ++x)
        orbit_units[static_cast<std::size_t>(g.orbit_of()[static_cast<std::size_t>(x)])].push_back(x);
    std::vector<InvariantSet> out;
    for (unsigned long mask = 1; mask < (1ul << k); ++mask) {
        InvariantSet s;
        for (int i = 0; i < k; ++i)
            if (mask & (1ul << i))
                s.units.insert(s.units.end(), orbit_units[static_cast<std::size_t>(i)].begin(),
                               orbit_units[static_cast<std::size_t>(i)].end());
        std::sort(s.units.begin(), s.units.end());
        s.minimal = (mask & (mask - 1)) == 0;
        out.push_back(std::move(s));
    }
    return out;
}

// Restriction of a groupoid to an invariant unit set M, keeping the maps
// back to the ambient indices.  Arrows keep their ambient relative order so
// that restricted convolution sums run over the same summands in the same
// order (bitwise-equal results).
struct Restriction {
    FiniteGroupoid sub;
    std::vector<int> parent_unit;   // sub unit -> ambient unit
    std::vector<int> parent_arrow;  // sub arrow -> ambient arrow
};

inline Restriction restrict_groupoid(const FiniteGroupoid& g, const std::vector<int>& m_units) {
    std::vector<bool> in_m(static_cast<std::size_t>(g.unit_count()), false);
    for (int x : m_units) {
        if (x < 0 || x >= g.unit_count()) throw std::out_of_range("unit out of range");
        in_m[static_cast<std::size_t>(x)] = true;
    }
    for (int a = 0; a < g.arrow_count(); ++a)
        if (in_m[static_cast<std::size_t>(g.r(a))] != in_m[static_cast<std::size_t>(g.s(a))])
            throw std::invalid_argument("unit set is not invariant");
    std::vector<int> unit_new(static_cast<std::size_t>(g.unit_count()), -1), parent_unit;
    for (int x = 0; x < g.unit_count(); ++x)
        if (in_m[static_cast<std::size_t>(x)]) {
            unit_new[static_cast<std::size_t>(x)] = static_cast<int>(parent_unit.size());
            parent_unit.push_back(x);
        }
    if (parent_unit.empty()) throw std::invalid_argument("empty unit set");
    std::vector<int> arrow_new(static_cast<std::size_t>(g.arrow_count()), -1), parent_arrow;
    for (int a = 0; a < g.arrow_count(); ++a)
        if (in_m[static_cast<std::size_t>(g.r(a))]) {
            arrow_new[static_cast<std::size_t>(a)] = static_cast<int>(parent_arrow.size());
            parent_arrow.push_back(a);
        }
    int units = static_cast<int>(parent_unit.size());
    int arrows = static_cast<int>(parent_arrow.size());
    std::vector<int> rg(static_cast<std::size_t>(arrows)), sc(static_cast<std::size_t>(arrows)),
        iv(static_cast<std::size_t>(arrows)), ua(static_cast<std::size_t>(units));
    for (int a = 0; a < arrows; ++a) {
        int pa = parent_arrow[static_cast<std::size_t>(a)];
        rg[static_cast<std::size_t>(a)] = unit_new[static_cast<std::size_t>(g.r(pa))];
        sc[static_cast<std::size_t>(a)] = unit_new[static_cast<std::size_t>(g.s(pa))];
        iv[static_cast<std::size_t>(a)] = arrow_new[static_cast<std::size_t>(g.inv(pa))];
    }
    for (int x = 0; x < units; ++x)
        ua[static_cast<std::size_t>(x)] =
            arrow_new[static_cast<std::size_t>(g.unit_arrow(parent_unit[static_cast<std::size_t>(x)]))];
    std::vector<int> comp(static_cast<std::size_t>(arrows) * static_cast<std::size_t>(arrows), -1);
    for (int a = 0; a < arrows; ++a)
        for (int b = 0; b < arrows; ++b) {
            int pa = parent_arrow[static_cast<std::size_t>(a)];
            int pb = parent_arrow[static_cast<std::size_t>(b)];
            if (g.composable(pa, pb))
                comp[static_cast<std::size_t>(a) * static_cast<std::size_t>(arrows) +
                     static_cast<std::size_t>(b)] =
                    arrow_new[static_cast<std::size_t>(g.compose(pa, pb))];
        }
    return Restriction{FiniteGroupoid(units, rg, sc, iv, ua, comp), std::move(parent_unit),
                       std::move(parent_arrow)};
}

inline ArrowFunction restrict_function(const Restriction& res, const ArrowFunction& f) {
    ArrowFunction out(res.parent_arrow.size());
    for (std::size_t a = 0; a < res.parent_arrow.size(); ++a)
        out[a] = f[static_cast<std::size_t>(res.parent_arrow[a])];
    return out;
}

inline Cocycle2 restrict_cocycle(const Restriction& res, const Cocycle2& sigma) {
    int n = static_cast<int>(res.parent_arrow.size());
    Cocycle2 out = Cocycle2::trivial(res.sub);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (res.sub.composable(a, b))
                out.set(a, b,
                        sigma(res.parent_arrow[static_cast<std::size_t>(a)],
                              res.parent_arrow[static_cast<std::size_t>(b)]));
    return out;
}

// --- spectra of normal elements ----------------------------------------------

struct NormalSpectrum {
    bool self_adjoint = false;
    spectra::CompactRealSet real_points;  // filled when self-adjoint
    std::vector<cdouble> points;          // always filled (complex eigenvalues)
};

// Union over one unit per orbit of the eigenvalues of the left-regular
// matrices.  Requires f normal (f*f = ff* in reduced norm); self-adjoint
// input is detected and reported as a real point set.
inline NormalSpectrum spectrum_of_normal(const FiniteGroupoid& g, const Cocycle2& sigma,
                                         const ArrowFunction& f, double merge_eps = 1e-10) {
    check_sizes(g, f);
    ArrowFunction fs = star(g, sigma, f);
    ArrowFunction lhs = convolve(g, sigma, fs, f);
    ArrowFunction rhs = convolve(g, sigma, f, fs);
    ArrowFunction diff(lhs.size());
    for (std::size_t i = 0; i < lhs.size(); ++i) diff[i] = lhs[i] - rhs[i];
    if (reduced_norm(g, sigma, diff) >= kAlgebraTol)
        throw std::invalid_argument("element is not normal");
    bool sa = true;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(f[i] - fs[i]) > kAlgebraTol) sa = false;

    NormalSpectrum out;
    out.self_adjoint = sa;
    std::vector<double> reals;
    for (int x : g.orbit_representatives()) {
        Eigen::MatrixXcd m = left_regular(g, sigma, f, x);
        if (m.rows() == 0) continue;
        if (sa) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
            if (es.info() != Eigen::Success)
                throw std::runtime_error("eigenvalue iteration failed");
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                reals.push_back(es.eigenvalues()(i));
                out.points.emplace_back(es.eigenvalues()(i), 0.0);
            }
        } else {
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
            if (es.info() != Eigen::Success)
                throw std::runtime_error("eigenvalue iteration failed");
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
                out.points.push_back(es.eigenvalues()(i));
        }
    }
    if (sa) out.real_points = spectra::CompactRealSet::from_points(reals, merge_eps);
    return out;
}

// --- serialization -------------------------------------------------------

// Plain text: a version line, unit/arrow counts, one line per arrow
// (id r s inv unit-flag), then the composable pairs as "a b ab".
inline std::string to_text(const FiniteGroupoid& g) {
    std::ostringstream os;
    os << "groupoid-v1\n";
    os << "units " << g.unit_count() << "\n";
    os << "arrows " << g.arrow_count() << "\n";
    for (int a = 0; a < g.arrow_count(); ++a)
        os << a << " " << g.r(a) << " " << g.s(a) << " " << g.inv(a) << "\n";
    for (int x = 0; x < g.unit_count(); ++x) os << "unit " << x << " " << g.unit_arrow(x) << "\n";
    for (int a = 0; a < g.arrow_count(); ++a)
        for (int b = 0; b < g.arrow_count(); ++b)
            if (g.composable(a, b)) os << "compose " << a << " " << b << " " << g.compose(a, b) << "\n";
    return os.str();
}

inline FiniteGroupoid groupoid_from_text(const std::string& text) {
    auto lines = detail::split_lines(text);
    std::size_t i = 0;
    auto next = [&]() -> std::string {
        while (i < lines.size() && detail::trim(lines[i]).empty()) ++i;
        if (i >= lines.size()) throw std::invalid_argument("truncated groupoid text");
        return std::string(detail::trim(lines[i++]));
    };
    if (next() != "groupoid-v1") throw std::invalid_argument("unknown groupoid format");
    auto take_count = [&](const std::string& key) {
        auto parts = detail::split(next(), ' ');
        if (parts.size() != 2 || parts[0] != key)
            throw std::invalid_argument("expected '" + key + " N'");
        return static_cast<int>(detail::parse_int(parts[1]));
    };
    int units = take_count("units");
    int arrows = take_count("arrows");
    if (units <= 0 || arrows < 0) throw std::invalid_argument("bad counts");
    std::vector<int> rg(static_cast<std::size_t>(arrows)), sc(static_cast<std::size_t>(arrows)),
        iv(static_cast<std::size_t>(arrows)), ua(static_cast<std::size_t>(units), -1);
    for (int a = 0; a < arrows; ++a) {
        auto parts = detail::split(next(), ' ');
        if (parts.size() != 4 || detail::parse_int(parts[0]) != a)
            throw std::invalid_argument("bad arrow row");
        rg[static_cast<std::size_t>(a)] = static_cast<int>(detail::parse_int(parts[1]));
        sc[static_cast<std::size_t>(a)] = static_cast<int>(detail::parse_int(parts[2]));
        iv[static_cast<std::size_t>(a)] = static_cast<int>(detail::parse_int(parts[3]));
    }
    std::vector<int> comp(static_cast<std::size_t>(arrows) * static_cast<std::size_t>(arrows), -1);
    while (i < lines.size()) {
        std::string_view line = detail::trim(lines[i]);
        if (line.empty()) {
            ++i;
            continue;
        }
        auto parts = detail::split(line, ' ');
        if (parts[0] == "unit" && parts.size() == 3) {
            ua[static_cast<std::size_t>(detail::parse_int(parts[1]))] =
                static_cast<int>(detail::parse_int(parts[2]));
        } else if (parts[0] == "compose" && parts.size() == 4) {
            std::size_t a = static_cast<std::size_t>(detail::parse_int(parts[1]));
            std::size_t b = static_cast<std::size_t>(detail::parse_int(parts[2]));
            if (a >= static_cast<std::size_t>(arrows) || b >= static_cast<std::size_t>(arrows))
                throw std::invalid_argument("compose row out of range");
            comp[a * static_cast<std::size_t>(arrows) + b] =
                static_cast<int>(detail::parse_int(parts[3]));
        } else {
            throw std::invalid_argument("unrecognized groupoid row");
        }
        ++i;
    }
    return FiniteGroupoid(units, rg, sc, iv, ua, comp);
}

// Cocycle rows: "a b re im" for each composable pair.
inline std::string cocycle_to_text(const FiniteGroupoid& g, const Cocycle2& sigma) {
    std::ostringstream os;
    os << "cocycle-v1\n";
    for (int a = 0; a < g.arrow_count(); ++a)
        for (int b = 0; b < g.arrow_count(); ++b)
            if (g.composable(a, b))
                os << a << " " << b << " " << detail::format_g17(sigma(a, b).real()) << " "
                   << detail::format_g17(sigma(a, b).imag()) << "\n";
    return os.str();
}

inline Cocycle2 cocycle_from_text(const FiniteGroupoid& g, const std::string& text) {
    auto lines = detail::split_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && detail::trim(lines[i]).empty()) ++i;
    if (i >= lines.size() || detail::trim(lines[i]) != "cocycle-v1")
        throw std::invalid_argument("unknown cocycle format");
    ++i;
    Cocycle2 out = Cocycle2::trivial(g);
    for (; i < lines.size(); ++i) {
        std::string_view line = detail::trim(lines[i]);
        if (line.empty()) continue;
        auto parts = detail::split(line, ' ');
        if (parts.size() != 4) throw std::invalid_argument("bad cocycle row");
        int a = static_cast<int>(detail::parse_int(parts[0]));
        int b = static_cast<int>(detail::parse_int(parts[1]));
        if (!g.composable(a, b)) throw std::invalid_argument("cocycle row on non-composable pair");
        out.set(a, b, cdouble(detail::parse_double(parts[2]), detail::parse_double(parts[3])));
    }
    return out;
}

// --- random instances for batteries -------------------------------------

// Disjoint unions of small pair groupoids, set groupoids, and cyclic
// crossed products: closed under everything in scope and guaranteed to
// exercise multiple orbits.
inline FiniteGroupoid random_groupoid(std::mt19937& rng, int max_components = 3) {
    std::uniform_int_distribution<int> comp_count(1, max_components);
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_int_distribution<int> pts(1, 4);
    std::optional<FiniteGroupoid> acc;
    int components = comp_count(rng);
    for (int c = 0; c < components; ++c) {
        FiniteGroupoid piece = [&]() -> FiniteGroupoid {
            switch (kind(rng)) {
                case 0: return pair_groupoid(pts(rng));
                case 1: return set_groupoid(pts(rng));
                default: {
                    int n = pts(rng);
                    std::uniform_int_distribution<int> qd(1, 4);
                    int q = qd(rng);
                    // Random permutation with order dividing q: shuffle, then
                    // cut into cycles whose lengths divide q.
                    std::vector<int> order(static_cast<std::size_t>(n));
                    std::iota(order.begin(), order.end(), 0);
                    std::shuffle(order.begin(), order.end(), rng);
                    std::vector<int> perm(static_cast<std::size_t>(n));
                    std::vector<int> lengths;
                    for (int len = 1; len <= q; ++len)
                        if (q % len == 0) lengths.push_back(len);
                    std::size_t at = 0;
                    while (at < order.size()) {
                        std::vector<int> usable;
                        for (int len : lengths)
                            if (static_cast<std::size_t>(len) <= order.size() - at)
                                usable.push_back(len);
                        int len = usable[static_cast<std::size_t>(std::uniform_int_distribution<int>(
                            0, static_cast<int>(usable.size()) - 1)(rng))];
                        for (int j = 0; j < len; ++j)
                            perm[static_cast<std::size_t>(order[at + static_cast<std::size_t>(j)])] =
                                order[at + static_cast<std::size_t>((j + 1) % len)];
                        at += static_cast<std::size_t>(len);
                    }
                    return crossed_product(n, q, perm);
                }
            }
        }();
        if (!acc)
            acc.emplace(std::move(piece));
        else
            acc.emplace(disjoint_union(*acc, piece));
    }
    return *acc;
}

// Random normalized coboundary: tau = 1 on unit arrows, random phases
// elsewhere (kept compatible with inversion only through the coboundary
// formula itself).
inline Cocycle2 random_normalized_cocycle(const FiniteGroupoid& g, std::mt19937& rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::vector<cdouble> tau(static_cast<std::size_t>(g.arrow_count()));
    for (int a = 0; a < g.arrow_count(); ++a)
        tau[static_cast<std::size_t>(a)] = std::polar(1.0, angle(rng));
    for (int x = 0; x < g.unit_count(); ++x)
        tau[static_cast<std::size_t>(g.unit_arrow(x))] = cdouble(1.0, 0.0);
    return coboundary(g, tau);
}

inline ArrowFunction random_arrow_function(const FiniteGroupoid& g, std::mt19937& rng) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    ArrowFunction f(static_cast<std::size_t>(g.arrow_count()));
    for (auto& v : f) v = cdouble(coef(rng), coef(rng));
    return f;
}

// Random self-adjoint element: f + f*, halved.
inline ArrowFunction random_self_adjoint(const FiniteGroupoid& g, const Cocycle2& sigma,
                                         std::mt19937& rng) {
    ArrowFunction f = random_arrow_function(g, rng);
    ArrowFunction fs = star(g, sigma, f);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.5 * (f[i] + fs[i]);
    return f;
}

}  // namespace aqlab::groupoids
