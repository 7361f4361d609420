#pragma once

// Symbolic dynamics over the integers: bi-infinite configurations given by
// explicit generators (periodic words, mechanical words, substitution fixed
// points, one-junction splices), subshifts with exact word dictionaries, and
// two compatible dyadic metrics: the dictionary metric between subshifts and
// the point-Hausdorff metric between their underlying point sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "aqlab/detail/text.hpp"

namespace aqlab::symdyn {

// --- alphabet and words ---------------------------------------------------

class Alphabet {
public:
    explicit Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.empty()) throw std::invalid_argument("alphabet must be nonempty");
        for (std::size_t i = 0; i < labels_.size(); ++i)
            for (std::size_t j = i + 1; j < labels_.size(); ++j)
                if (labels_[i] == labels_[j])
                    throw std::invalid_argument("duplicate alphabet label '" + labels_[i] + "'");
    }

    static Alphabet binary01() { return Alphabet({"0", "1"}); }
    static Alphabet ab() { return Alphabet({"a", "b"}); }

    int size() const { return static_cast<int>(labels_.size()); }

    const std::string& label(int symbol) const {
        if (symbol < 0 || symbol >= size()) throw std::out_of_range("symbol out of range");
        return labels_[static_cast<std::size_t>(symbol)];
    }

    int symbol_of(const std::string& label) const {
        for (int i = 0; i < size(); ++i)
            if (labels_[static_cast<std::size_t>(i)] == label) return i;
        throw std::invalid_argument("label '" + label + "' not in alphabet");
    }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.labels_ == b.labels_; }

private:
    std::vector<std::string> labels_;
};

using Word = std::vector<int>;

// Words print as concatenated labels when every label is one character
// (the usual case), otherwise space-separated.
inline std::string render(const Alphabet& a, const Word& w) {
    bool compact = true;
    for (int s = 0; s < a.size(); ++s)
        if (a.label(s).size() != 1) compact = false;
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!compact && i > 0) out += ' ';
        out += a.label(w[i]);
    }
    return out;
}

inline Word parse_word(const Alphabet& a, const std::string& text) {
    Word w;
    bool compact = true;
    for (int s = 0; s < a.size(); ++s)
        if (a.label(s).size() != 1) compact = false;
    if (compact) {
        for (char c : text) w.push_back(a.symbol_of(std::string(1, c)));
    } else {
        for (auto part : detail::split(text, ' '))
            if (!part.empty()) w.push_back(a.symbol_of(std::string(part)));
    }
    return w;
}

namespace detail2 {

inline long long floor_div(long long a, long long b) {
    long long q = a / b, r = a % b;
    return (r != 0 && r < 0) ? q - 1 : q;
}

inline long long pos_mod(long long a, long long b) {
    long long r = a % b;
    return r < 0 ? r + b : r;
}

} // namespace detail2

// --- mechanical words -----------------------------------------------------

// s_n = floor((n+1)a + t) - floor(na + t), the lower mechanical word.  The
// floating-point form is meant for irrational slopes; rational slopes should
// go through the exact integer form below, where breakpoints land exactly.
inline int mechanical_symbol(double alpha, double theta, long long n) {
    double a = std::floor((static_cast<double>(n) + 1.0) * alpha + theta);
    double b = std::floor(static_cast<double>(n) * alpha + theta);
    return static_cast<int>(a - b);
}

inline int mechanical_symbol_rational(long long p, long long q, long long theta_num, long long n) {
    using detail2::floor_div;
    return static_cast<int>(floor_div((n + 1) * p + theta_num, q) - floor_div(n * p + theta_num, q));
}

inline Word mechanical_word(double alpha, double theta, long long lo, long long hi) {
    Word w;
    for (long long n = lo; n <= hi; ++n) w.push_back(mechanical_symbol(alpha, theta, n));
    return w;
}

// --- substitutions --------------------------------------------------------

struct Substitution {
    Alphabet alphabet;
    std::vector<Word> rules;  // image of each symbol

    Substitution(Alphabet a, std::vector<Word> r) : alphabet(std::move(a)), rules(std::move(r)) {
        if (static_cast<int>(rules.size()) != alphabet.size())
            throw std::invalid_argument("substitution needs a rule per symbol");
        for (const auto& img : rules)
            for (int s : img)
                if (s < 0 || s >= alphabet.size())
                    throw std::invalid_argument("substitution image uses a foreign symbol");
    }

    Word apply(const Word& w) const {
        Word out;
        for (int s : w) {
            const Word& img = rules[static_cast<std::size_t>(s)];
            out.insert(out.end(), img.begin(), img.end());
        }
        return out;
    }
};

inline Word substitution_iterate(const Substitution& sub, int seed, int iterations) {
    if (iterations < 0) throw std::invalid_argument("iteration count must be >= 0");
    Word w{seed};
    for (int i = 0; i < iterations; ++i) w = sub.apply(w);
    return w;
}

// --- configurations -------------------------------------------------------

// A bi-infinite symbol sequence with an explicit, total generator.  Values
// are immutable; translated() produces a new configuration reading the same
// underlying sequence at shifted coordinates: translated(h).at(n) == at(n+h).
class Configuration {
public:
    enum class Kind { Periodic, Mechanical, MechanicalRational, Splice, SubstitutionFix };

    static Configuration periodic(Alphabet a, Word w, long long phase = 0) {
        if (w.empty()) throw std::invalid_argument("periodic word must be nonempty");
        for (int s : w) a.label(s);  // bounds check
        Configuration c(Kind::Periodic, std::move(a));
        c.word_ = std::move(w);
        c.offset_ = phase;
        return c;
    }

    // Irrational slopes; alphabet is {0,1}.
    static Configuration mechanical(double alpha, double theta) {
        if (!(alpha >= 0.0 && alpha < 1.0) || !(theta >= 0.0 && theta < 1.0))
            throw std::invalid_argument("mechanical parameters must lie in [0,1)");
        Configuration c(Kind::Mechanical, Alphabet::binary01());
        c.alpha_ = alpha;
        c.theta_ = theta;
        return c;
    }

    // Exact rational slope p/q with phase theta_num/q; integer arithmetic
    // throughout, so breakpoints are handled exactly.
    static Configuration mechanical_rational(long long p, long long q, long long theta_num = 0) {
        if (q < 1 || p < 0 || p > q) throw std::invalid_argument("need 0 <= p <= q, q >= 1");
        Configuration c(Kind::MechanicalRational, Alphabet::binary01());
        c.p_ = p;
        c.q_ = q;
        c.theta_num_ = detail2::pos_mod(theta_num, q);
        return c;
    }

    // left^inf . right^inf with the junction between coordinates -1 and 0.
    static Configuration splice(Alphabet a, int left, int right) {
        a.label(left);
        a.label(right);
        Configuration c(Kind::Splice, std::move(a));
        c.left_ = left;
        c.right_ = right;
        return c;
    }

    // Two-sided fixed point of a power of the substitution.  A pair of
    // letters (l, r) is chosen with S^k(l) ending in l, S^k(r) starting
    // with r, and the junction word "lr" admissible for the system, then
    // coordinates n >= 0 read lim S^{km}(r) and n < 0 read lim S^{km}(l)
    // from the right end.  Exists for every primitive substitution.
    static Configuration substitution_fixed_point(Substitution sub, int seed);

    const Alphabet& alphabet() const { return alphabet_; }
    Kind kind() const { return kind_; }

    int at(long long n) const {
        switch (kind_) {
        case Kind::Periodic: {
            auto idx = detail2::pos_mod(n + offset_, static_cast<long long>(word_.size()));
            return word_[static_cast<std::size_t>(idx)];
        }
        case Kind::Mechanical:
            return mechanical_symbol(alpha_, theta_, n + offset_);
        case Kind::MechanicalRational:
            return mechanical_symbol_rational(p_, q_, theta_num_, n + offset_);
        case Kind::Splice:
            return (n + offset_) < 0 ? left_ : right_;
        case Kind::SubstitutionFix:
            return substitution_at(n + offset_);
        }
        throw std::logic_error("unreachable");
    }

    // Inclusive window; empty when lo > hi.
    Word window(long long lo, long long hi) const {
        if (lo > hi) return {};
        if (kind_ == Kind::SubstitutionFix) return substitution_window(lo + offset_, hi + offset_);
        Word w;
        w.reserve(static_cast<std::size_t>(hi - lo + 1));
        for (long long n = lo; n <= hi; ++n) w.push_back(at(n));
        return w;
    }

    Configuration translated(long long h) const {
        Configuration c = *this;
        c.offset_ += h;
        return c;
    }

    // Structural identity of the generator, offsets included.
    friend bool operator==(const Configuration& x, const Configuration& y) {
        return x.descriptor() == y.descriptor();
    }

    // Stable, human-readable descriptor; doubles carry 17 digits so equal
    // descriptors mean equal generators.
    std::string descriptor() const {
        std::string d;
        switch (kind_) {
        case Kind::Periodic:
            d = "periodic:" + render(alphabet_, word_) + ":" + std::to_string(offset_);
            break;
        case Kind::Mechanical:
            d = "mechanical:" + detail::format_g17(alpha_) + ":" + detail::format_g17(theta_) +
                ":" + std::to_string(offset_);
            break;
        case Kind::MechanicalRational:
            d = "mechanical_rational:" + std::to_string(p_) + "/" + std::to_string(q_) + ":" +
                std::to_string(theta_num_) + ":" + std::to_string(offset_);
            break;
        case Kind::Splice:
            d = "splice:" + alphabet_.label(left_) + ":" + alphabet_.label(right_) + ":" +
                std::to_string(offset_);
            break;
        case Kind::SubstitutionFix: {
            d = "substitution:";
            for (int s = 0; s < alphabet_.size(); ++s)
                d += alphabet_.label(s) + ">" + render(alphabet_, sub_->rules[static_cast<std::size_t>(s)]) + ";";
            d += "seed=" + alphabet_.label(seed_) + ":" + std::to_string(offset_);
            break;
        }
        }
        return d;
    }

    // Canonical identity of the orbit closure this configuration generates:
    // translation offsets are dropped, and parameters that do not change the
    // closure (mechanical phase, periodic rotation) are normalized away.
    std::string orbit_descriptor() const;

    // Accessors for serialization.
    const Word& periodic_word() const { return word_; }
    long long offset() const { return offset_; }
    double mech_alpha() const { return alpha_; }
    double mech_theta() const { return theta_; }
    long long mech_p() const { return p_; }
    long long mech_q() const { return q_; }
    long long mech_theta_num() const { return theta_num_; }
    int splice_left() const { return left_; }
    int splice_right() const { return right_; }
    const Substitution& substitution() const { return *sub_; }
    int substitution_seed() const { return seed_; }

private:
    Configuration(Kind k, Alphabet a) : kind_(k), alphabet_(std::move(a)) {}

    int substitution_at(long long n) const { return substitution_window(n, n)[0]; }

    Word substitution_window(long long lo, long long hi) const {
        Word out;
        out.reserve(static_cast<std::size_t>(hi - lo + 1));
        if (lo < 0) {
            Word left{sub_left_};
            while (static_cast<long long>(left.size()) < -lo) {
                std::size_t before = left.size();
                for (int i = 0; i < sub_power_; ++i) left = sub_->apply(left);
                if (left.size() <= before)
                    throw std::runtime_error("substitution does not grow");
                if (left.size() > (1u << 26))
                    throw std::runtime_error("substitution window too deep");
            }
            for (long long n = lo; n <= std::min<long long>(hi, -1); ++n)
                out.push_back(left[left.size() - static_cast<std::size_t>(-n)]);
        }
        if (hi >= 0) {
            Word right{sub_right_};
            while (static_cast<long long>(right.size()) <= hi) {
                std::size_t before = right.size();
                for (int i = 0; i < sub_power_; ++i) right = sub_->apply(right);
                if (right.size() <= before)
                    throw std::runtime_error("substitution does not grow");
                if (right.size() > (1u << 26))
                    throw std::runtime_error("substitution window too deep");
            }
            for (long long n = std::max<long long>(lo, 0); n <= hi; ++n)
                out.push_back(right[static_cast<std::size_t>(n)]);
        }
        return out;
    }

    Kind kind_;
    Alphabet alphabet_;
    long long offset_ = 0;
    // periodic
    Word word_;
    // mechanical
    double alpha_ = 0.0, theta_ = 0.0;
    long long p_ = 0, q_ = 1, theta_num_ = 0;
    // splice
    int left_ = 0, right_ = 0;
    // substitution
    std::shared_ptr<const Substitution> sub_;
    int seed_ = 0;
    int sub_left_ = 0, sub_right_ = 0, sub_power_ = 1;
};

namespace detail2 {

// Smallest period d of w (d divides |w| and w is (prefix d)^{|w|/d}).
inline std::size_t primitive_period(const Word& w) {
    for (std::size_t d = 1; d <= w.size(); ++d) {
        if (w.size() % d != 0) continue;
        bool ok = true;
        for (std::size_t i = d; i < w.size() && ok; ++i)
            if (w[i] != w[i - d]) ok = false;
        if (ok) return d;
    }
    return w.size();
}

// Lexicographically smallest rotation of the primitive root: the canonical
// name of the periodic orbit generated by w.
inline Word canonical_necklace(const Word& w) {
    Word root(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(primitive_period(w)));
    Word best = root;
    for (std::size_t r = 1; r < root.size(); ++r) {
        Word rot;
        rot.insert(rot.end(), root.begin() + static_cast<std::ptrdiff_t>(r), root.end());
        rot.insert(rot.end(), root.begin(), root.begin() + static_cast<std::ptrdiff_t>(r));
        best = std::min(best, rot);
    }
    return best;
}

} // namespace detail2

inline Configuration Configuration::substitution_fixed_point(Substitution sub, int seed) {
    sub.alphabet.label(seed);
    auto shared = std::make_shared<const Substitution>(std::move(sub));
    const Alphabet& a = shared->alphabet;

    // Length-2 factors of the system, from a long iterate of the seed.
    Word probe{seed};
    for (int it = 0; it < 40 && probe.size() < 4096; ++it) probe = shared->apply(probe);
    std::set<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i + 1 < probe.size(); ++i) pairs.insert({probe[i], probe[i + 1]});

    for (int k = 1; k <= 8; ++k) {
        std::vector<bool> ends(static_cast<std::size_t>(a.size())), starts(static_cast<std::size_t>(a.size()));
        for (int c = 0; c < a.size(); ++c) {
            Word img{c};
            for (int i = 0; i < k; ++i) img = shared->apply(img);
            if (img.size() >= 2) {
                if (img.front() == c) starts[static_cast<std::size_t>(c)] = true;
                if (img.back() == c) ends[static_cast<std::size_t>(c)] = true;
            }
        }
        for (int l = 0; l < a.size(); ++l)
            for (int r = 0; r < a.size(); ++r)
                if (ends[static_cast<std::size_t>(l)] && starts[static_cast<std::size_t>(r)] &&
                    pairs.count({l, r})) {
                    Configuration c(Kind::SubstitutionFix, a);
                    c.sub_ = shared;
                    c.seed_ = seed;
                    c.sub_left_ = l;
                    c.sub_right_ = r;
                    c.sub_power_ = k;
                    return c;
                }
    }
    throw std::invalid_argument("no two-sided fixed point found (substitution not primitive?)");
}

inline std::string Configuration::orbit_descriptor() const {
    switch (kind_) {
    case Kind::Periodic:
        return "orbit-periodic:" + render(alphabet_, detail2::canonical_necklace(word_));
    case Kind::Mechanical:
        // For irrational slopes the closure is slope-determined; the phase
        // only selects a point of it.
        return "orbit-mechanical:" + detail::format_g17(alpha_);
    case Kind::MechanicalRational: {
        Word one_period;
        for (long long n = 0; n < q_; ++n)
            one_period.push_back(mechanical_symbol_rational(p_, q_, theta_num_, n));
        return "orbit-periodic:" + render(alphabet_, detail2::canonical_necklace(one_period));
    }
    case Kind::Splice:
        return "orbit-splice:" + alphabet_.label(left_) + ":" + alphabet_.label(right_);
    case Kind::SubstitutionFix: {
        std::string d = "orbit-substitution:";
        for (int s = 0; s < alphabet_.size(); ++s)
            d += alphabet_.label(s) + ">" + render(alphabet_, sub_->rules[static_cast<std::size_t>(s)]) + ";";
        return d + "seed=" + alphabet_.label(seed_);
    }
    }
    throw std::logic_error("unreachable");
}

// --- subshifts -------------------------------------------------------------

// Continued-fraction machinery, used both by the approximant pipeline and by
// the dictionary window rule for irrational mechanical slopes.
struct Rational {
    long long p = 0, q = 1;
};

inline std::vector<Rational> continued_fraction_convergents(double alpha, int count) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("slope must lie in (0,1)");
    std::vector<Rational> out;
    // h/k recurrences seeded for [0; a1, a2, ...]; the trivial 0/1 term is
    // not reported.
    long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double x = alpha;
    for (int i = 0; i < count; ++i) {
        if (x < 1e-15) break;  // expansion terminated: alpha is (numerically) rational
        double inv = 1.0 / x;
        double a_real = std::floor(inv);
        if (a_real > 1e15) break;
        long long a = static_cast<long long>(a_real);
        long long h = a * h0 + h1, k = a * k0 + k1;
        h1 = h0; h0 = h;
        k1 = k0; k0 = k;
        out.push_back({h, k});
        x = inv - a_real;
    }
    return out;
}

class Subshift {
public:
    enum class Kind { OrbitClosure, FullShift };

    static Subshift full_shift(Alphabet a) {
        Subshift s(Kind::FullShift, std::move(a));
        s.key_ = "full";
        return s;
    }

    static Subshift orbit_closure(Configuration g) {
        return orbit_closure(std::vector<Configuration>{std::move(g)});
    }

    static Subshift orbit_closure(std::vector<Configuration> gens) {
        if (gens.empty()) throw std::invalid_argument("need at least one generator");
        for (std::size_t i = 1; i < gens.size(); ++i)
            if (!(gens[i].alphabet() == gens[0].alphabet()))
                throw std::invalid_argument("generators over different alphabets");
        Subshift s(Kind::OrbitClosure, gens[0].alphabet());
        std::vector<std::string> keys;
        for (const auto& g : gens) keys.push_back(g.orbit_descriptor());
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        for (const auto& k : keys) s.key_ += k + "|";
        s.generators_ = std::move(gens);
        return s;
    }

    static Subshift periodic(Alphabet a, Word w) {
        if (w.empty()) throw std::invalid_argument("periodic word must be nonempty");
        Word canon = detail2::canonical_necklace(w);
        return orbit_closure(Configuration::periodic(std::move(a), std::move(canon)));
    }

    Kind kind() const { return kind_; }
    const Alphabet& alphabet() const { return alphabet_; }
    const std::vector<Configuration>& representatives() const { return generators_; }

    // Number of points of a periodic orbit.  Periodic generators report
    // their primitive word length; rational mechanical generators are
    // periodic too, with primitive period read off one slope-denominator
    // window.
    long long period() const {
        if (kind_ == Kind::OrbitClosure && generators_.size() == 1) {
            const Configuration& g = generators_[0];
            if (g.kind() == Configuration::Kind::Periodic)
                return static_cast<long long>(g.periodic_word().size());
            if (g.kind() == Configuration::Kind::MechanicalRational)
                return static_cast<long long>(
                    detail2::primitive_period(g.window(0, g.mech_q() - 1)));
        }
        throw std::logic_error("period() requires a periodic orbit");
    }

    // Exact set of admissible length-n words.  Orbit closures are scanned
    // over generator windows of half-length max(64n, 4096); mechanical
    // generators get two completeness boosters: rational slopes sweep a
    // phase grid of q+1 rationals, irrational slopes extend the scan to
    // n * q_m for the largest convergent denominator q_m <= max(64, n).
    std::set<Word> language(int n) const {
        if (n < 1) throw std::invalid_argument("word length must be >= 1");
        std::set<Word> words;
        if (kind_ == Kind::FullShift) {
            double total = std::pow(alphabet_.size(), n);
            if (total > (1 << 22)) throw std::invalid_argument("full-shift dictionary too large");
            Word w(static_cast<std::size_t>(n), 0);
            while (true) {
                words.insert(w);
                int i = n - 1;
                while (i >= 0 && w[static_cast<std::size_t>(i)] == alphabet_.size() - 1) {
                    w[static_cast<std::size_t>(i)] = 0;
                    --i;
                }
                if (i < 0) break;
                ++w[static_cast<std::size_t>(i)];
            }
            return words;
        }
        for (const auto& g : generators_) {
            long long half = std::max<long long>(64LL * n, 4096);
            if (g.kind() == Configuration::Kind::Mechanical) {
                long long qm = 1;
                for (const auto& c : continued_fraction_convergents(g.mech_alpha(), 40))
                    if (c.q <= std::max<long long>(64, n)) qm = std::max(qm, c.q);
                half = std::max(half, qm * n);
            }
            scan_into(g, half, n, words);
            if (g.kind() == Configuration::Kind::MechanicalRational) {
                for (long long t = 0; t <= g.mech_q(); ++t) {
                    auto phase = Configuration::mechanical_rational(g.mech_p(), g.mech_q(), t);
                    scan_into(phase, std::max<long long>(g.mech_q(), n), n, words);
                }
            }
        }
        return words;
    }

    friend bool operator==(const Subshift& a, const Subshift& b) {
        return a.kind_ == b.kind_ && a.alphabet_ == b.alphabet_ && a.key_ == b.key_;
    }

    const std::string& canonical_key() const { return key_; }

private:
    Subshift(Kind k, Alphabet a) : kind_(k), alphabet_(std::move(a)) {}

    static void scan_into(const Configuration& g, long long half, int n, std::set<Word>& words) {
        Word strip = g.window(-half, half + n - 1);
        for (std::size_t k = 0; k + static_cast<std::size_t>(n) <= strip.size(); ++k)
            words.insert(Word(strip.begin() + static_cast<std::ptrdiff_t>(k),
                              strip.begin() + static_cast<std::ptrdiff_t>(k) + n));
    }

    Kind kind_;
    Alphabet alphabet_;
    std::vector<Configuration> generators_;
    std::string key_;
};

// --- metrics ---------------------------------------------------------------

// A value in {0} U {2^-n : n >= 0}; the only numbers either metric can take.
struct DyadicDistance {
    bool zero = true;
    int exponent = 0;

    static DyadicDistance zero_value() { return {}; }
    static DyadicDistance pow2(int n) {
        if (n < 0) throw std::invalid_argument("exponent must be >= 0");
        return {false, n};
    }

    double value() const { return zero ? 0.0 : std::ldexp(1.0, -exponent); }

    friend bool operator==(const DyadicDistance& a, const DyadicDistance& b) {
        return a.zero == b.zero && (a.zero || a.exponent == b.exponent);
    }
    friend bool operator<(const DyadicDistance& a, const DyadicDistance& b) {
        return a.value() < b.value();
    }
    friend bool operator<=(const DyadicDistance& a, const DyadicDistance& b) {
        return a.value() <= b.value();
    }
};

// Dictionary metric: 2^{-n*} with n* the first word length at which the
// languages differ, 0 if they agree through the horizon.
inline DyadicDistance subshift_distance(const Subshift& x, const Subshift& y, int horizon) {
    if (!(x.alphabet() == y.alphabet()))
        throw std::invalid_argument("subshift_distance needs a common alphabet");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (x == y) return DyadicDistance::zero_value();
    for (int n = 1; n <= horizon; ++n)
        if (x.language(n) != y.language(n)) return DyadicDistance::pow2(n);
    return DyadicDistance::zero_value();
}

// Raised when a window-W computation can only certify "distance <= 2^-W",
// which the point metric treats as no answer at all.
class WindowTooSmall : public std::runtime_error {
public:
    explicit WindowTooSmall(int window)
        : std::runtime_error("window " + std::to_string(window) +
                             " too small to certify a positive distance") {}
};

// Hausdorff distance between the point sets of two subshifts in the metric
// d(x,y) = 2^{-min{|n| : x_n != y_n}}.  Works on depth-W window sets, which
// determine the answer exactly whenever it exceeds 2^{-W}; an uncertifiable
// result raises WindowTooSmall instead of guessing.
inline DyadicDistance point_hausdorff_distance(const Subshift& x, const Subshift& y, int window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (!(x.alphabet() == y.alphabet()))
        throw std::invalid_argument("point_hausdorff_distance needs a common alphabet");
    if (x == y) return DyadicDistance::zero_value();

    const int W = window;
    const int L = 2 * W + 1;             // indices 0..2W, center W
    const int agree_all = W + 1;          // sentinel: no mismatch inside the window
    std::vector<Word> wx, wy;
    for (auto& w : x.language(L)) wx.push_back(w);
    for (auto& w : y.language(L)) wy.push_back(w);

    auto mismatch_depth = [&](const Word& u, const Word& v) {
        // min |j - W| over mismatches, scanned outward from the center.
        if (u[static_cast<std::size_t>(W)] != v[static_cast<std::size_t>(W)]) return 0;
        for (int d = 1; d <= W; ++d)
            if (u[static_cast<std::size_t>(W - d)] != v[static_cast<std::size_t>(W - d)] ||
                u[static_cast<std::size_t>(W + d)] != v[static_cast<std::size_t>(W + d)])
                return d;
        return agree_all;
    };

    auto directed = [&](const std::vector<Word>& from, const std::vector<Word>& to) {
        // Returns min over u of (max over v of mismatch depth); the distance
        // sup_u min_v 2^-depth is 2^-(that).  agree_all means uncertified 0.
        int worst = agree_all;
        for (const auto& u : from) {
            int best = 0;
            for (const auto& v : to) {
                best = std::max(best, mismatch_depth(u, v));
                if (best == agree_all) break;
            }
            worst = std::min(worst, best);
            if (worst == 0) break;
        }
        return worst;
    };

    int exp_xy = directed(wx, wy);
    int exp_yx = directed(wy, wx);
    int e = std::min(exp_xy, exp_yx);
    if (e == agree_all) throw WindowTooSmall(W);
    return DyadicDistance::pow2(e);
}

// All distinct periodic orbits of period <= max_period, each named by its
// lexicographically smallest primitive representative.
inline std::vector<Word> periodic_orbit_words(const Alphabet& a, int max_period) {
    if (max_period < 1) throw std::invalid_argument("max_period must be >= 1");
    double total = 0;
    for (int len = 1; len <= max_period; ++len) total += std::pow(a.size(), len);
    if (total > (1 << 24)) throw std::invalid_argument("too many periodic words to enumerate");
    std::set<Word> canon;
    for (int len = 1; len <= max_period; ++len) {
        Word w(static_cast<std::size_t>(len), 0);
        while (true) {
            canon.insert(detail2::canonical_necklace(w));
            int i = len - 1;
            while (i >= 0 && w[static_cast<std::size_t>(i)] == a.size() - 1) {
                w[static_cast<std::size_t>(i)] = 0;
                --i;
            }
            if (i < 0) break;
            ++w[static_cast<std::size_t>(i)];
        }
    }
    return {canon.begin(), canon.end()};
}

struct PeriodicApproximation {
    DyadicDistance distance;
    Word best_word;  // shortest minimizer, ties broken lexicographically
};

// Minimum point-Hausdorff distance from y to any periodic orbit of period
// <= max_period.  Window certification failures propagate.
inline PeriodicApproximation min_distance_to_periodic(const Subshift& y, int max_period) {
    int window = std::max(8, max_period + 2);
    std::optional<PeriodicApproximation> best;
    for (const auto& w : periodic_orbit_words(y.alphabet(), max_period)) {
        Subshift orbit = Subshift::periodic(y.alphabet(), w);
        DyadicDistance d = point_hausdorff_distance(y, orbit, window);
        bool take = !best || d < best->distance;
        if (best && d == best->distance) {
            auto rank = [&](const Word& u) {
                return std::pair<std::size_t, std::string>(u.size(), render(y.alphabet(), u));
            };
            take = rank(w) < rank(best->best_word);
        }
        if (take) best = PeriodicApproximation{d, w};
    }
    return *best;
}

// --- convergent approximants ------------------------------------------------

struct ConvergentApproximant {
    long long p = 0, q = 1;
    Subshift orbit;
};

struct ConvergentList {
    std::vector<ConvergentApproximant> items;
    bool exhausted = false;  // the expansion terminated early: alpha is rational
};

// Continued-fraction convergents p/q of an irrational slope, each paired
// with the periodic orbit of the mechanical word of slope p/q, phase 0.
inline ConvergentList convergent_approximants(double alpha, int count) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    auto convs = continued_fraction_convergents(alpha, count);
    ConvergentList out;
    out.exhausted = static_cast<int>(convs.size()) < count;
    for (const auto& c : convs)
        out.items.push_back({c.p, c.q,
                             Subshift::orbit_closure(Configuration::mechanical_rational(c.p, c.q, 0))});
    return out;
}

} // namespace aqlab::symdyn
