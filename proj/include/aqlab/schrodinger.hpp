#pragma once

// Covariant hopping + potential operators over symbolic configurations.
// Coefficients are locally constant: tables over centered windows of
// half-width `radius`, with a fallback for unlisted windows.  Self-adjointness
// is a property of the tables (rules R1-R3 below) checked by finite
// enumeration, after which every assembled finite-volume matrix is Hermitian
// by construction.
//
// Conventions, fixed once:
//  * sites are labeled by integers (d=1) or integer pairs (d=2);
//  * the matrix entry from site g to site g+k is the hop amplitude for
//    displacement k evaluated at the window of the configuration centered
//    at g, i.e. M[g, g+k] = t_k(x[g-radius .. g+radius]);
//  * the diagonal is the potential at the same window.
//
// The rules:
//  R1  the potential is real (enforced by the type);
//  R2  the displacement set K satisfies K = -K;
//  R3  t_{-k}(w[k-r .. k+r]) = conj(t_k(w[-r .. r])) for every word w over
//      the joint window [-r, |k|+r] (both hops read the same bond).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aqlab/detail/text.hpp"
#include "aqlab/groupoids.hpp"
#include "aqlab/spectra.hpp"
#include "aqlab/symdyn.hpp"

namespace aqlab::schrodinger {

using cdouble = std::complex<double>;
using HopVec = std::array<long long, 2>;  // d=1 stores {h, 0}

inline constexpr int kMaxSites = 2048;  // dense-matrix budget

struct HopTable {
    std::map<std::string, cdouble> by_word;
    cdouble fallback{0.0, 0.0};

    cdouble at(const std::string& w) const {
        auto it = by_word.find(w);
        return it == by_word.end() ? fallback : it->second;
    }
};

struct PotentialTable {
    std::map<std::string, double> by_word;
    double fallback = 0.0;

    double at(const std::string& w) const {
        auto it = by_word.find(w);
        return it == by_word.end() ? fallback : it->second;
    }
};

struct OperatorSpec {
    int dimension = 1;
    symdyn::Alphabet alphabet = symdyn::Alphabet::binary01();
    int radius = 0;
    std::map<HopVec, HopTable> hopping;  // keys are the displacement set K
    PotentialTable potential;

    long long max_hop() const {
        long long m = 0;
        for (const auto& [k, tab] : hopping)
            m = std::max({m, std::abs(k[0]), std::abs(k[1])});
        return m;
    }
};

// Nearest-neighbor operator with constant hop 1 and a potential keyed on the
// letter under the site (radius 0); lambda = 0 gives the free Laplacian.
inline OperatorSpec letter_potential_spec(const symdyn::Alphabet& a, int letter, double lambda) {
    OperatorSpec spec;
    spec.dimension = 1;
    spec.alphabet = a;
    spec.radius = 0;
    spec.hopping[{1, 0}] = HopTable{{}, cdouble(1.0, 0.0)};
    spec.hopping[{-1, 0}] = HopTable{{}, cdouble(1.0, 0.0)};
    if (lambda != 0.0) spec.potential.by_word[a.label(letter)] = lambda;
    return spec;
}

struct Violation {
    std::string rule;  // "R2", "R3", "structure"
    HopVec k{0, 0};
    std::string word;  // joint window for R3, empty otherwise
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

namespace detail3 {

// All words of the given length, odometer order; sizes are capped by callers.
inline bool next_word(symdyn::Word& w, int letters) {
    for (std::size_t i = w.size(); i-- > 0;) {
        if (w[i] + 1 < letters) {
            ++w[i];
            return true;
        }
        w[i] = 0;
    }
    return false;
}

} // namespace detail3

// Checks R2 and R3 over the full table domain (all words, listed or not, so
// the fallbacks participate).  R1 holds by the potential's type.  Structural
// problems (zero hops, wrong dimension use, non-constant d=2 tables) are
// reported under rule "structure".
inline ValidationReport validate(const OperatorSpec& spec) {
    ValidationReport rep;
    auto flag = [&rep](std::string rule, HopVec k, std::string word, std::string detail) {
        rep.violations.push_back({std::move(rule), k, std::move(word), std::move(detail)});
    };
    if (spec.dimension != 1 && spec.dimension != 2)
        flag("structure", {0, 0}, "", "dimension must be 1 or 2");
    if (spec.radius < 0) flag("structure", {0, 0}, "", "radius must be >= 0");
    for (const auto& [k, tab] : spec.hopping) {
        if (k[0] == 0 && k[1] == 0) flag("structure", k, "", "zero displacement");
        if (spec.dimension == 1 && k[1] != 0)
            flag("structure", k, "", "one-dimensional spec with planar hop");
        if (spec.dimension == 2 && !tab.by_word.empty())
            flag("structure", k, "", "planar specs take constant amplitudes");
    }
    if (spec.dimension == 2 && !spec.potential.by_word.empty())
        flag("structure", {0, 0}, "", "planar specs take a constant potential");
    if (!rep.ok()) return rep;

    for (const auto& [k, tab] : spec.hopping) {
        HopVec minus{-k[0], -k[1]};
        if (spec.hopping.find(minus) == spec.hopping.end())
            flag("R2", k, "", "missing opposite displacement");
    }
    if (!rep.ok()) return rep;

    if (spec.dimension == 2) {
        for (const auto& [k, tab] : spec.hopping) {
            HopVec minus{-k[0], -k[1]};
            cdouble other = spec.hopping.at(minus).fallback;
            if (std::abs(tab.fallback - std::conj(other)) > 0.0)
                flag("R3", k, "", "amplitudes of opposite hops are not conjugate");
        }
        return rep;
    }

    for (const auto& [k, tab] : spec.hopping) {
        long long h = k[0];
        if (h <= 0) continue;  // each pair {k, -k} checked once
        const HopTable& back = spec.hopping.at(HopVec{-h, 0});
        int joint_len = static_cast<int>(h) + 2 * spec.radius + 1;
        double words = std::pow(static_cast<double>(spec.alphabet.size()), joint_len);
        if (words > static_cast<double>(1 << 22))
            throw std::runtime_error("window enumeration too large to validate");
        symdyn::Word w(static_cast<std::size_t>(joint_len), 0);
        int width = 2 * spec.radius + 1;
        do {
            symdyn::Word front(w.begin(), w.begin() + width);
            symdyn::Word rear(w.begin() + h, w.begin() + h + width);
            cdouble lhs = tab.at(symdyn::render(spec.alphabet, front));
            cdouble rhs = back.at(symdyn::render(spec.alphabet, rear));
            if (std::abs(rhs - std::conj(lhs)) > 0.0)
                flag("R3", k, symdyn::render(spec.alphabet, w),
                     "opposite hop is not the conjugate across the bond");
        } while (detail3::next_word(w, spec.alphabet.size()));
    }
    return rep;
}

inline void require_valid(const OperatorSpec& spec) {
    ValidationReport rep = validate(spec);
    if (!rep.ok())
        throw std::invalid_argument("operator tables violate rule " + rep.violations[0].rule +
                                    ": " + rep.violations[0].detail);
}

enum class Boundary { Open, Periodic };

// Primitive period of configurations that genuinely repeat; disengaged for
// the aperiodic kinds.
inline std::optional<long long> configuration_period(const symdyn::Configuration& x) {
    using Kind = symdyn::Configuration::Kind;
    if (x.kind() == Kind::Periodic)
        return static_cast<long long>(symdyn::detail2::primitive_period(x.periodic_word()));
    if (x.kind() == Kind::MechanicalRational)
        return static_cast<long long>(symdyn::detail2::primitive_period(x.window(0, x.mech_q() - 1)));
    return std::nullopt;
}

// Matrix of the operator on the sites lo..hi.  Open boundary drops hops that
// leave the box; periodic boundary wraps them and requires the box length to
// be a multiple of the configuration's primitive period (otherwise wrapped
// entries would break Hermiticity).
inline spectra::HermitianMatrix assemble_finite(const OperatorSpec& spec,
                                                const symdyn::Configuration& x, long long lo,
                                                long long hi,
                                                Boundary boundary = Boundary::Open) {
    if (spec.dimension != 1) throw std::invalid_argument("line assembly needs a 1d spec");
    require_valid(spec);
    if (!(x.alphabet() == spec.alphabet))
        throw std::invalid_argument("configuration alphabet differs from the spec's");
    if (hi < lo) throw std::invalid_argument("empty site box");
    long long n = hi - lo + 1;
    if (n > kMaxSites) throw std::invalid_argument("site box exceeds the dense-matrix budget");
    if (boundary == Boundary::Periodic) {
        auto p = configuration_period(x);
        if (!p) throw std::invalid_argument("periodic boundary needs a periodic configuration");
        if (n % *p != 0)
            throw std::invalid_argument("periodic boundary needs a box that is a multiple of " +
                                        std::to_string(*p) + " sites");
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (long long g = lo; g <= hi; ++g) {
        std::string w = symdyn::render(spec.alphabet, x.window(g - spec.radius, g + spec.radius));
        Eigen::Index row = g - lo;
        m(row, row) += spec.potential.at(w);
        for (const auto& [k, tab] : spec.hopping) {
            long long target = g + k[0];
            if (boundary == Boundary::Open) {
                if (target < lo || target > hi) continue;
                m(row, target - lo) += tab.at(w);
            } else {
                long long col = symdyn::detail2::pos_mod(target - lo, n);
                m(row, col) += tab.at(w);
            }
        }
    }
    return spectra::HermitianMatrix(std::move(m));
}

// Max entry deviation between the shift of H_x and H over the shifted
// configuration, compared on the sub-box shrunk by `margin` where no
// boundary truncation can differ.  Zero exactly for any valid spec.
inline double covariance_check(const OperatorSpec& spec, const symdyn::Configuration& x,
                               long long shift, long long lo, long long hi, long long margin) {
    if (spec.dimension != 1) throw std::invalid_argument("covariance check is one-dimensional");
    long long reach = spec.radius + spec.max_hop();
    if (margin < reach || margin < std::abs(shift) + spec.max_hop())
        throw std::invalid_argument("margin must cover the hop range and the shift");
    if (lo + margin > hi - margin) throw std::invalid_argument("box too small for the margin");
    spectra::HermitianMatrix a = assemble_finite(spec, x, lo, hi, Boundary::Open);
    // In the shift convention used for windows, the translate of x placing
    // old coordinate -shift at the origin:
    spectra::HermitianMatrix b =
        assemble_finite(spec, x.translated(-shift), lo, hi, Boundary::Open);
    double worst = 0.0;
    for (long long g = lo + margin; g <= hi - margin; ++g)
        for (const auto& [k, tab] : spec.hopping) {
            long long target = g + k[0];
            cdouble lhs = b.matrix()(g - lo, target - lo);
            cdouble rhs = a.matrix()(g - shift - lo, target - shift - lo);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    for (long long g = lo + margin; g <= hi - margin; ++g)
        worst = std::max(worst, std::abs(b.matrix()(g - lo, g - lo) -
                                         a.matrix()(g - shift - lo, g - shift - lo)));
    return worst;
}

// --- planar magnetic assembly -------------------------------------------

// Flux per unit plaquette: uniform, or a sparse map from the plaquette's
// lower-left corner (unlisted plaquettes carry zero flux).
struct FluxField {
    bool uniform = true;
    double b = 0.0;
    std::map<std::pair<long long, long long>, double> plaquette;

    static FluxField constant(double b) {
        FluxField f;
        f.uniform = true;
        f.b = b;
        return f;
    }
    static FluxField from_map(std::map<std::pair<long long, long long>, double> plaq) {
        FluxField f;
        f.uniform = false;
        f.plaquette = std::move(plaq);
        return f;
    }

    double at(long long c, long long r) const {
        double v = b;
        if (!uniform) {
            auto it = plaquette.find({c, r});
            v = it == plaquette.end() ? 0.0 : it->second;
        }
        if (!std::isfinite(v)) throw std::invalid_argument("flux must be finite");
        return v;
    }
};

namespace detail3 {

// Phase angle of the vertical edge (c, r) -> (c, r+1): total flux of the
// plaquettes left of the edge in its row.  Horizontal edges carry no phase.
inline double up_edge_angle(const FluxField& flux, long long c, long long r) {
    double angle = 0.0;
    for (long long cc = 0; cc < c; ++cc) angle += flux.at(cc, r);
    return angle;
}

// Phase angle along the x-then-y lattice path from p to q.
inline double path_angle(const FluxField& flux, std::pair<long long, long long> p,
                         std::pair<long long, long long> q) {
    double angle = 0.0;
    long long c = q.first;
    if (q.second >= p.second)
        for (long long r = p.second; r < q.second; ++r) angle += up_edge_angle(flux, c, r);
    else
        for (long long r = q.second; r < p.second; ++r) angle -= up_edge_angle(flux, c, r);
    return angle;
}

// One well-defined phase per unordered site pair: the path is anchored at
// the lexicographically smaller endpoint, so the reverse hop gets exactly
// the conjugate and the assembled matrix is Hermitian.
inline double hop_angle(const FluxField& flux, std::pair<long long, long long> from,
                        std::pair<long long, long long> to) {
    if (from <= to) return path_angle(flux, from, to);
    return -path_angle(flux, to, from);
}

} // namespace detail3

// Operator on the box [0,L1) x [0,L2) with every hop multiplied by its
// gauge phase; open boundary.  The product of the four phases around the
// plaquette at (c, r), traversed counterclockwise, is e^{i flux(c, r)}.
inline spectra::HermitianMatrix magnetic_assemble(const OperatorSpec& spec, const FluxField& flux,
                                                  long long l1, long long l2) {
    if (spec.dimension != 2) throw std::invalid_argument("magnetic assembly needs a 2d spec");
    require_valid(spec);
    if (l1 <= 0 || l2 <= 0) throw std::invalid_argument("empty site box");
    long long n = l1 * l2;
    if (n > kMaxSites) throw std::invalid_argument("site box exceeds the dense-matrix budget");
    auto index = [l1](long long c, long long r) { return r * l1 + c; };
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (long long r = 0; r < l2; ++r)
        for (long long c = 0; c < l1; ++c) {
            m(index(c, r), index(c, r)) += spec.potential.fallback;
            for (const auto& [k, tab] : spec.hopping) {
                long long tc = c + k[0], tr = r + k[1];
                if (tc < 0 || tc >= l1 || tr < 0 || tr >= l2) continue;
                double angle = detail3::hop_angle(flux, {c, r}, {tc, tr});
                m(index(c, r), index(tc, tr)) += tab.fallback * std::polar(1.0, angle);
            }
        }
    return spectra::HermitianMatrix(std::move(m));
}

// Finite translation-by-a matrix with the uniform-field compensating phase:
// (U(a) psi)(x) = e^{i B a2 (x1 - a1/2)} psi(x - a), rows for sites whose
// preimage leaves the box are zero.
inline Eigen::MatrixXcd magnetic_translation(double b, HopVec a, long long l1, long long l2) {
    long long n = l1 * l2;
    auto index = [l1](long long c, long long r) { return r * l1 + c; };
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, n);
    for (long long r = 0; r < l2; ++r)
        for (long long c = 0; c < l1; ++c) {
            long long pc = c - a[0], pr = r - a[1];
            if (pc < 0 || pc >= l1 || pr < 0 || pr >= l2) continue;
            double angle = b * static_cast<double>(a[1]) *
                           (static_cast<double>(c) - static_cast<double>(a[0]) / 2.0);
            u(index(c, r), index(pc, pr)) = std::polar(1.0, angle);
        }
    return u;
}

// Max deviation, over rows of sites at least `margin` from the boundary, of
// U(a) U(b) - e^{-i B (a x b)/2} U(a+b).  The phase is the field times the
// signed area of the triangle (x, x-a, x-a-b); its sign for this orientation
// is pinned by tests, not assumed.
inline double magnetic_translation_check(double b, HopVec a, HopVec bb, long long l1, long long l2,
                                         long long margin) {
    long long need = std::max(std::abs(a[0]) + std::abs(bb[0]), std::abs(a[1]) + std::abs(bb[1]));
    if (margin < need) throw std::invalid_argument("margin must cover both translations");
    if (2 * margin >= l1 || 2 * margin >= l2)
        throw std::invalid_argument("box too small for the margin");
    Eigen::MatrixXcd ua = magnetic_translation(b, a, l1, l2);
    Eigen::MatrixXcd ub = magnetic_translation(b, bb, l1, l2);
    Eigen::MatrixXcd uab = magnetic_translation(b, {a[0] + bb[0], a[1] + bb[1]}, l1, l2);
    double wedge = static_cast<double>(a[0] * bb[1] - a[1] * bb[0]);
    Eigen::MatrixXcd lhs = ua * ub;
    Eigen::MatrixXcd rhs = std::polar(1.0, -b * wedge / 2.0) * uab;
    auto index = [l1](long long c, long long r) { return r * l1 + c; };
    double worst = 0.0;
    for (long long r = margin; r < l2 - margin; ++r)
        for (long long c = margin; c < l1 - margin; ++c)
            worst = std::max(worst,
                             (lhs.row(index(c, r)) - rhs.row(index(c, r))).cwiseAbs().maxCoeff());
    return worst;
}

// --- the magnetic cocycle on a finite quotient ----------------------------

struct MagneticCocycle {
    groupoids::FiniteGroupoid groupoid;  // the group (Z_q)^2 as a groupoid
    groupoids::Cocycle2 sigma;           // sigma(n, m) = e^{i B (n1 m2 - n2 m1)}
};

namespace detail3 {

// e^{2 pi i num/den}, exact on quarter turns.
inline cdouble root_of_unity(long long num, long long den) {
    num %= den;
    if (num < 0) num += den;
    if ((4 * num) % den == 0) {
        switch ((4 * num) / den) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    return std::polar(1.0, 2.0 * M_PI * static_cast<double>(num) / static_cast<double>(den));
}

} // namespace detail3

// The uniform-field pair phase descends to the quotient group (Z_q)^2 when
// B q is a multiple of 2 pi; the result is a valid normalized 2-cocycle.
inline MagneticCocycle cocycle_from_flux(double b, int q) {
    // The groupoid constructor sweeps all composable triples (q^6 here), so
    // keep the quotient small.
    if (q <= 0 || q > 16) throw std::invalid_argument("quotient order out of range");
    double turns = b * static_cast<double>(q) / (2.0 * M_PI);
    long long j = std::llround(turns);
    if (std::abs(turns - static_cast<double>(j)) > 1e-12)
        throw std::invalid_argument("flux does not descend to this quotient");

    int arrows = q * q;
    auto id = [q](int n1, int n2) { return n1 * q + n2; };
    std::vector<int> rg(static_cast<std::size_t>(arrows), 0), sc(static_cast<std::size_t>(arrows), 0),
        iv(static_cast<std::size_t>(arrows)), ua = {id(0, 0)};
    std::vector<int> comp(static_cast<std::size_t>(arrows) * static_cast<std::size_t>(arrows));
    for (int n1 = 0; n1 < q; ++n1)
        for (int n2 = 0; n2 < q; ++n2)
            iv[static_cast<std::size_t>(id(n1, n2))] = id((q - n1) % q, (q - n2) % q);
    for (int a = 0; a < arrows; ++a)
        for (int c = 0; c < arrows; ++c)
            comp[static_cast<std::size_t>(a) * static_cast<std::size_t>(arrows) +
                 static_cast<std::size_t>(c)] =
                id((a / q + c / q) % q, (a % q + c % q) % q);
    groupoids::FiniteGroupoid g(1, rg, sc, iv, ua, comp);

    groupoids::Cocycle2 sigma = groupoids::Cocycle2::trivial(g);
    for (int a = 0; a < arrows; ++a)
        for (int c = 0; c < arrows; ++c) {
            long long wedge = static_cast<long long>(a / q) * (c % q) -
                              static_cast<long long>(a % q) * (c / q);
            sigma.set(a, c, detail3::root_of_unity(j * wedge, q));
        }
    return MagneticCocycle{std::move(g), std::move(sigma)};
}

// --- serialization -------------------------------------------------------

// Versioned plain text.  Layout (one datum per line, words last so labels
// may contain spaces):
//   operator-spec-v1
//   dimension D
//   alphabet N label...
//   radius R
//   potential-default V
//   potential V WORD
//   hop-default K1 K2 RE IM
//   hop K1 K2 RE IM WORD
inline std::string to_text(const OperatorSpec& spec) {
    std::ostringstream os;
    os << "operator-spec-v1\n";
    os << "dimension " << spec.dimension << "\n";
    os << "alphabet " << spec.alphabet.size();
    for (int i = 0; i < spec.alphabet.size(); ++i) os << " " << spec.alphabet.label(i);
    os << "\n";
    os << "radius " << spec.radius << "\n";
    os << "potential-default " << detail::format_g17(spec.potential.fallback) << "\n";
    for (const auto& [w, v] : spec.potential.by_word)
        os << "potential " << detail::format_g17(v) << " " << w << "\n";
    for (const auto& [k, tab] : spec.hopping) {
        os << "hop-default " << k[0] << " " << k[1] << " " << detail::format_g17(tab.fallback.real())
           << " " << detail::format_g17(tab.fallback.imag()) << "\n";
        for (const auto& [w, v] : tab.by_word)
            os << "hop " << k[0] << " " << k[1] << " " << detail::format_g17(v.real()) << " "
               << detail::format_g17(v.imag()) << " " << w << "\n";
    }
    return os.str();
}

inline OperatorSpec operator_spec_from_text(const std::string& text) {
    auto lines = detail::split_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && detail::trim(lines[i]).empty()) ++i;
    if (i >= lines.size() || detail::trim(lines[i]) != "operator-spec-v1")
        throw std::invalid_argument("unknown operator spec format");
    ++i;
    OperatorSpec spec;
    bool saw_alphabet = false;
    // Tail of `parts` from `from` onward, rejoined on single spaces (word keys).
    auto tail = [](const std::vector<std::string_view>& parts, std::size_t from) {
        std::string out;
        for (std::size_t j = from; j < parts.size(); ++j) {
            if (j > from) out += ' ';
            out += std::string(parts[j]);
        }
        return out;
    };
    for (; i < lines.size(); ++i) {
        std::string_view line = detail::trim(lines[i]);
        if (line.empty()) continue;
        auto parts = detail::split(line, ' ');
        const std::string_view key = parts[0];
        if (key == "dimension" && parts.size() == 2) {
            spec.dimension = static_cast<int>(detail::parse_int(parts[1]));
        } else if (key == "alphabet" && parts.size() >= 2) {
            std::size_t count = static_cast<std::size_t>(detail::parse_int(parts[1]));
            if (parts.size() != 2 + count) throw std::invalid_argument("bad alphabet row");
            std::vector<std::string> labels;
            for (std::size_t j = 0; j < count; ++j) labels.emplace_back(parts[2 + j]);
            spec.alphabet = symdyn::Alphabet(labels);
            saw_alphabet = true;
        } else if (key == "radius" && parts.size() == 2) {
            spec.radius = static_cast<int>(detail::parse_int(parts[1]));
        } else if (key == "potential-default" && parts.size() == 2) {
            spec.potential.fallback = detail::parse_double(parts[1]);
        } else if (key == "potential" && parts.size() >= 3) {
            spec.potential.by_word[tail(parts, 2)] = detail::parse_double(parts[1]);
        } else if (key == "hop-default" && parts.size() == 5) {
            HopVec k{detail::parse_int(parts[1]), detail::parse_int(parts[2])};
            spec.hopping[k].fallback =
                cdouble(detail::parse_double(parts[3]), detail::parse_double(parts[4]));
        } else if (key == "hop" && parts.size() >= 6) {
            HopVec k{detail::parse_int(parts[1]), detail::parse_int(parts[2])};
            spec.hopping[k].by_word[tail(parts, 5)] =
                cdouble(detail::parse_double(parts[3]), detail::parse_double(parts[4]));
        } else {
            throw std::invalid_argument("unrecognized operator spec row");
        }
    }
    if (!saw_alphabet) throw std::invalid_argument("operator spec lacks an alphabet");
    return spec;
}

// --- random valid specs for batteries -------------------------------------

// Random one-dimensional spec that satisfies R1-R3 by construction: for each
// positive displacement the amplitude is a function of the bond suffix (the
// window letters both endpoints can see), and the opposite hop is its
// conjugate read from the matching prefix.
inline OperatorSpec random_valid_spec(std::mt19937& rng, int max_radius = 1,
                                      long long max_hop = 2) {
    std::uniform_int_distribution<int> radius_pick(0, max_radius);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> coef(-1.5, 1.5);
    OperatorSpec spec;
    spec.dimension = 1;
    spec.alphabet = coin(rng) ? symdyn::Alphabet::binary01() : symdyn::Alphabet::ab();
    spec.radius = radius_pick(rng);
    int width = 2 * spec.radius + 1;

    std::vector<long long> hops;
    for (long long h = 1; h <= max_hop; ++h)
        if (coin(rng)) hops.push_back(h);
    if (hops.empty()) hops.push_back(1);

    for (long long h : hops) {
        int dep = std::max(0, width - static_cast<int>(h));  // letters both endpoints see
        std::map<std::string, cdouble> bond;
        symdyn::Word s(static_cast<std::size_t>(dep), 0);
        if (dep > 0) {
            do {
                bond[symdyn::render(spec.alphabet, s)] = cdouble(coef(rng), coef(rng));
            } while (detail3::next_word(s, spec.alphabet.size()));
        }
        cdouble bond_default(coef(rng), coef(rng));
        HopTable fwd, bwd;
        fwd.fallback = bond_default;
        bwd.fallback = std::conj(bond_default);
        symdyn::Word w(static_cast<std::size_t>(width), 0);
        do {
            std::string full = symdyn::render(spec.alphabet, w);
            if (dep > 0) {
                symdyn::Word suffix(w.end() - dep, w.end());
                symdyn::Word prefix(w.begin(), w.begin() + dep);
                fwd.by_word[full] = bond.at(symdyn::render(spec.alphabet, suffix));
                bwd.by_word[full] = std::conj(bond.at(symdyn::render(spec.alphabet, prefix)));
            }
        } while (detail3::next_word(w, spec.alphabet.size()));
        spec.hopping[{h, 0}] = std::move(fwd);
        spec.hopping[{-h, 0}] = std::move(bwd);
    }

    spec.potential.fallback = coef(rng);
    symdyn::Word w(static_cast<std::size_t>(width), 0);
    do {
        spec.potential.by_word[symdyn::render(spec.alphabet, w)] = coef(rng);
    } while (detail3::next_word(w, spec.alphabet.size()));
    return spec;
}

}  // namespace aqlab::schrodinger
