#pragma once

// Floquet-Bloch reduction for one-dimensional operators over periodic
// configurations: momentum fibers, band spectra with an auditable edge
// refinement certificate, the fiber/finite-volume gluing identity, and the
// Harper (magnetic Bloch) fibers at rational flux with butterfly output.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aqlab/detail/text.hpp"
#include "aqlab/schrodinger.hpp"
#include "aqlab/spectra.hpp"
#include "aqlab/symdyn.hpp"

namespace aqlab::bloch {

using cdouble = std::complex<double>;

namespace detail4 {

inline constexpr double kInvPhi = 0.61803398874989484820;  // golden ratio - 1

// Momentum reduced into [0, 2*pi).  fmod is exact, so two momenta whose
// difference is a representable multiple of 2*pi reduce to the same double
// and therefore yield bitwise-identical fibers.
inline double reduce_momentum(double k) {
    if (!std::isfinite(k)) throw std::invalid_argument("momentum must be finite");
    const double two_pi = 2.0 * M_PI;
    double r = std::fmod(k, two_pi);
    if (r < 0.0) r += two_pi;       // fmod keeps the sign of k
    if (r == two_pi) r = 0.0;       // a tiny negative r rounds up to 2*pi itself
    return r;
}

struct Refined {
    double where = 0.0;      // abscissa of the best probe
    double value = 0.0;      // best value seen
    double last_move = 0.0;  // improvement across the final stopping window
    bool exhausted = false;  // probe budget ran out with the movement still >= tol
};

// Golden-section minimization on [a, b].  Stops once twelve consecutive
// steps together improve the best value by less than tol.  The window is
// deliberately wide: the incumbent probe can sit closer to the minimizer
// than any probe of the next few steps and stall the estimate while the
// bracket is still coarse, so the rule waits until the bracket has shrunk by
// a factor of ~320 without progress.  The caller reads what happened off the
// certificate fields instead of an exception: a band edge that missed its
// tolerance is still a band edge.
template <class F>
Refined golden_min(F&& f, double a, double b, double tol, int max_windows = 40) {
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    Refined out;
    out.value = std::min(fc, fd);
    out.where = fc <= fd ? c : d;
    out.last_move = 0.0;
    for (int w = 0; w < max_windows; ++w) {
        double window_start = out.value;
        for (int step = 0; step < 12; ++step) {
            if (fc <= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - kInvPhi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + kInvPhi * (b - a);
                fd = f(d);
            }
            if (std::min(fc, fd) < out.value) {
                out.value = std::min(fc, fd);
                out.where = fc <= fd ? c : d;
            }
        }
        out.last_move = window_start - out.value;
        if (out.last_move < tol) return out;
    }
    out.exhausted = true;
    return out;
}

// Fiber matrix without the per-call validation; callers check the spec once.
// Entry accumulation mirrors assemble_finite with periodic boundary exactly
// (diagonal first, then hops in table order), and the phase multiplication is
// skipped at zero angle, so the zero-momentum fiber equals the p-site ring
// matrix bit for bit.
inline spectra::HermitianMatrix fiber_matrix(const schrodinger::OperatorSpec& spec,
                                             const symdyn::Configuration& x, long long p,
                                             double kr) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(p, p);
    for (long long g = 0; g < p; ++g) {
        std::string w = symdyn::render(spec.alphabet, x.window(g - spec.radius, g + spec.radius));
        m(g, g) += spec.potential.at(w);
        for (const auto& [hop, tab] : spec.hopping) {
            long long col = symdyn::detail2::pos_mod(g + hop[0], p);
            cdouble amp = tab.at(w);
            double angle = kr * static_cast<double>(hop[0]);
            if (angle != 0.0) amp *= std::polar(1.0, angle);
            m(g, col) += amp;
        }
    }
    return spectra::HermitianMatrix(std::move(m));
}

inline long long checked_period(const schrodinger::OperatorSpec& spec,
                                const symdyn::Configuration& x) {
    if (spec.dimension != 1)
        throw std::invalid_argument("momentum fibers need a one-dimensional spec");
    schrodinger::require_valid(spec);
    if (!(x.alphabet() == spec.alphabet))
        throw std::invalid_argument("configuration alphabet differs from the spec's");
    auto p = schrodinger::configuration_period(x);
    if (!p) throw std::invalid_argument("momentum fibers need a periodic configuration");
    if (*p > schrodinger::kMaxSites)
        throw std::invalid_argument("period exceeds the dense-matrix budget");
    return *p;
}

}  // namespace detail4

// One momentum fiber of a periodic operator: the p x p matrix whose entry
// (m, (m+h) mod p) accumulates t_h at the window of site m times e^{i k h},
// with the true integer hop h in the phase, plus the potential on the
// diagonal.  The union of the fiber spectra over k recovers the spectrum of
// the full line operator.
struct BlochFiber {
    long long period;
    double momentum;  // reduced representative in [0, 2*pi)
    spectra::HermitianMatrix matrix;
};

inline BlochFiber fiber(const schrodinger::OperatorSpec& spec, const symdyn::Configuration& x,
                        double k) {
    long long p = detail4::checked_period(spec, x);
    double kr = detail4::reduce_momentum(k);
    return {p, kr, detail4::fiber_matrix(spec, x, p, kr)};
}

struct RefinementCertificate {
    int grid = 0;             // momentum samples per axis before refinement
    double edge_error = 0.0;  // worst final improvement among the refined edges
    bool budget_exhausted = false;
};

namespace detail4 {

inline void note_edge(RefinementCertificate& cert, const Refined& r) {
    cert.edge_error = std::max(cert.edge_error, r.last_move);
    cert.budget_exhausted = cert.budget_exhausted || r.exhausted;
}

}  // namespace detail4

// Band j is the range of the j-th sorted eigenvalue over the momentum torus;
// the eigenvalue curves are continuous through crossings, so per-index
// [min, max] intervals union to the right set even when bands touch.
struct BandSpectrum {
    std::vector<spectra::Interval> bands;  // per eigenvalue index, ascending
    spectra::CompactRealSet set;           // union of the band intervals
    RefinementCertificate certificate;
};

// Band edges located by grid sampling plus golden-section refinement of every
// bracketed local extremum of every eigenvalue curve.  The certificate
// records the grid and the worst stopping movement; exhaustion is reported
// there, never thrown.
inline BandSpectrum band_spectrum(const schrodinger::OperatorSpec& spec,
                                  const symdyn::Configuration& x, int grid, double tol) {
    if (grid < 8) throw std::invalid_argument("momentum grid needs at least 8 points");
    if (!(tol > 0.0)) throw std::invalid_argument("edge tolerance must be positive");
    const long long p = detail4::checked_period(spec, x);
    const double two_pi = 2.0 * M_PI;

    auto level = [&](double k, long long j) {
        Eigen::VectorXd ev = detail4::fiber_matrix(spec, x, p, detail4::reduce_momentum(k))
                                 .eigenvalues();
        return ev[j];
    };

    std::vector<std::vector<double>> sample(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i)
        sample[i] = spectra::hermitian_eigenvalues(detail4::fiber_matrix(
            spec, x, p, detail4::reduce_momentum(two_pi * static_cast<double>(i) / grid)));

    BandSpectrum out;
    out.certificate.grid = grid;
    for (long long j = 0; j < p; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int i = 0; i < grid; ++i) {
            lo = std::min(lo, sample[i][j]);
            hi = std::max(hi, sample[i][j]);
        }
        for (int i = 0; i < grid; ++i) {
            double prev = sample[(i + grid - 1) % grid][j];
            double here = sample[i][j];
            double next = sample[(i + 1) % grid][j];
            double ka = two_pi * static_cast<double>(i - 1) / grid;
            double kb = two_pi * static_cast<double>(i + 1) / grid;
            if (here <= prev && here <= next) {
                auto r = detail4::golden_min([&](double k) { return level(k, j); }, ka, kb, tol);
                lo = std::min(lo, r.value);
                detail4::note_edge(out.certificate, r);
            }
            if (here >= prev && here >= next) {
                auto r = detail4::golden_min([&](double k) { return -level(k, j); }, ka, kb, tol);
                hi = std::max(hi, -r.value);
                detail4::note_edge(out.certificate, r);
            }
        }
        out.bands.push_back({lo, hi});
    }
    out.set = spectra::CompactRealSet(out.bands);
    return out;
}

// Concatenated fiber eigenvalues at the gluing momenta 2*pi*j/(p*cells)
// against the (p*cells)-site ring, as sorted multisets.  The two agree in
// exact arithmetic; the return value is the worst pairwise deviation.
inline double bloch_vs_finite_volume(const schrodinger::OperatorSpec& spec,
                                     const symdyn::Configuration& x, long long cells) {
    const long long p = detail4::checked_period(spec, x);
    if (cells < 1) throw std::invalid_argument("cell count must be >= 1");
    const long long n = p * cells;
    if (n < 2) throw std::invalid_argument("gluing needs at least two sites");
    if (n > schrodinger::kMaxSites)
        throw std::invalid_argument("cells exceed the dense-matrix budget");

    std::vector<double> glued;
    glued.reserve(static_cast<std::size_t>(n));
    for (long long j = 0; j < cells; ++j) {
        double k = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(n);
        std::vector<double> ev = spectra::hermitian_eigenvalues(
            detail4::fiber_matrix(spec, x, p, detail4::reduce_momentum(k)));
        glued.insert(glued.end(), ev.begin(), ev.end());
    }
    std::sort(glued.begin(), glued.end());

    std::vector<double> direct = spectra::hermitian_eigenvalues(
        schrodinger::assemble_finite(spec, x, 0, n - 1, schrodinger::Boundary::Periodic));

    double dev = 0.0;
    for (std::size_t i = 0; i < glued.size(); ++i)
        dev = std::max(dev, std::abs(glued[i] - direct[i]));
    return dev;
}

// Row-sum bound: every fiber row is dominated by sum_h max|t_h| + max|v|
// uniformly in momentum, so no spectral point can exceed it.
inline double schur_bound(const schrodinger::OperatorSpec& spec) {
    double pot = std::abs(spec.potential.fallback);
    for (const auto& [w, v] : spec.potential.by_word) pot = std::max(pot, std::abs(v));
    double total = pot;
    for (const auto& [hop, tab] : spec.hopping) {
        double amp = std::abs(tab.fallback);
        for (const auto& [w, v] : tab.by_word) amp = std::max(amp, std::abs(v));
        total += amp;
    }
    return total;
}

// Landau-gauge magnetic fiber at rational flux pflux/qflux per plaquette:
// diagonal 2*lambda*cos(2*pi*(pflux/qflux)*m + k2), unit hops to m +- 1 mod
// q, and the wrap entries carry e^{-+ i*q*k1}.  Coinciding entries (q <= 2)
// accumulate.
inline spectra::HermitianMatrix hofstadter_fiber(long long pflux, long long qflux, double lambda,
                                                 double k1, double k2) {
    if (qflux < 1) throw std::invalid_argument("flux denominator must be positive");
    if (std::gcd(pflux, qflux) != 1)
        throw std::invalid_argument("flux fraction must be in lowest terms");
    const long long q = qflux;
    const double flux_angle =
        2.0 * M_PI * static_cast<double>(pflux) / static_cast<double>(qflux);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(q, q);
    for (long long s = 0; s < q; ++s) {
        m(s, s) += 2.0 * lambda * std::cos(flux_angle * static_cast<double>(s) + k2);
        if (s + 1 < q)
            m(s, s + 1) += 1.0;
        else
            m(s, 0) += std::polar(1.0, -static_cast<double>(q) * k1);
        if (s >= 1)
            m(s, s - 1) += 1.0;
        else
            m(0, q - 1) += std::polar(1.0, static_cast<double>(q) * k1);
    }
    return spectra::HermitianMatrix(std::move(m));
}

// Union over the momentum torus of the per-band [min, max] intervals, edges
// refined from the best grid point by coordinate-wise golden sweeps with the
// same certificate discipline as band_spectrum.
inline BandSpectrum hofstadter_spectrum(long long pflux, long long qflux, double lambda,
                                        int grid, double tol) {
    if (grid < 8) throw std::invalid_argument("momentum grid needs at least 8 points");
    if (!(tol > 0.0)) throw std::invalid_argument("edge tolerance must be positive");
    const double two_pi = 2.0 * M_PI;
    auto levels = [&](double k1, double k2) {
        return spectra::hermitian_eigenvalues(hofstadter_fiber(pflux, qflux, lambda, k1, k2));
    };

    std::vector<std::vector<std::vector<double>>> sample(static_cast<std::size_t>(grid));
    for (int i1 = 0; i1 < grid; ++i1) {
        sample[i1].resize(static_cast<std::size_t>(grid));
        for (int i2 = 0; i2 < grid; ++i2)
            sample[i1][i2] = levels(two_pi * static_cast<double>(i1) / grid,
                                    two_pi * static_cast<double>(i2) / grid);
    }

    BandSpectrum out;
    out.certificate.grid = grid;
    const double half = two_pi / static_cast<double>(grid);
    for (long long j = 0; j < qflux; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        int lo1 = 0, lo2 = 0, hi1 = 0, hi2 = 0;
        for (int i1 = 0; i1 < grid; ++i1)
            for (int i2 = 0; i2 < grid; ++i2) {
                double v = sample[i1][i2][j];
                if (v < lo) { lo = v; lo1 = i1; lo2 = i2; }
                if (v > hi) { hi = v; hi1 = i1; hi2 = i2; }
            }

        // Minimizes sign * level_j by alternating line searches; one full
        // sweep that moves the value by less than tol ends the descent.
        auto refine = [&](double sign, int s1, int s2, double seed) {
            double k1 = two_pi * static_cast<double>(s1) / grid;
            double k2 = two_pi * static_cast<double>(s2) / grid;
            detail4::Refined out_edge;
            out_edge.value = seed;
            for (int sweep = 0; sweep < 16; ++sweep) {
                double before = out_edge.value;
                auto r1 = detail4::golden_min(
                    [&](double t) { return sign * levels(t, k2)[j]; }, k1 - half, k1 + half, tol);
                if (r1.value < out_edge.value) {
                    out_edge.value = r1.value;
                    k1 = r1.where;
                }
                auto r2 = detail4::golden_min(
                    [&](double t) { return sign * levels(k1, t)[j]; }, k2 - half, k2 + half, tol);
                if (r2.value < out_edge.value) {
                    out_edge.value = r2.value;
                    k2 = r2.where;
                }
                out_edge.last_move = before - out_edge.value;
                if (out_edge.last_move < tol) return out_edge;
            }
            out_edge.exhausted = true;
            return out_edge;
        };

        detail4::Refined lo_edge = refine(1.0, lo1, lo2, lo);
        detail4::Refined hi_edge = refine(-1.0, hi1, hi2, -hi);
        detail4::note_edge(out.certificate, lo_edge);
        detail4::note_edge(out.certificate, hi_edge);
        out.bands.push_back({lo_edge.value, -hi_edge.value});
    }
    out.set = spectra::CompactRealSet(out.bands);
    return out;
}

// --- butterfly output ------------------------------------------------------

struct FluxFraction {
    long long p = 0;
    long long q = 1;
};

inline bool operator==(const FluxFraction& a, const FluxFraction& b) {
    return a.p == b.p && a.q == b.q;
}

// All reduced fractions p/q in [0, 1] with q <= q_max, ascending.
inline std::vector<FluxFraction> farey_fluxes(long long q_max) {
    if (q_max < 1) throw std::invalid_argument("flux denominator cap must be >= 1");
    std::vector<FluxFraction> out;
    for (long long q = 1; q <= q_max; ++q)
        for (long long p = 0; p <= q; ++p)
            if (std::gcd(p, q) == 1) out.push_back({p, q});
    std::sort(out.begin(), out.end(),
              [](const FluxFraction& a, const FluxFraction& b) { return a.p * b.q < b.p * a.q; });
    return out;
}

struct ButterflyRow {
    long long pflux = 0;
    long long qflux = 1;
    double flux = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
};

inline std::vector<ButterflyRow> butterfly_rows(const std::vector<FluxFraction>& fluxes,
                                                double lambda, int grid, double tol) {
    std::vector<ButterflyRow> rows;
    for (const auto& f : fluxes) {
        BandSpectrum s = hofstadter_spectrum(f.p, f.q, lambda, grid, tol);
        for (const auto& band : s.bands)
            rows.push_back({f.p, f.q, static_cast<double>(f.p) / static_cast<double>(f.q),
                            band.lo, band.hi});
    }
    return rows;
}

inline std::string butterfly_csv(const std::vector<ButterflyRow>& rows) {
    std::string out = "pflux,qflux,flux_real,band_lo,band_hi\n";
    for (const auto& r : rows)
        out += std::to_string(r.pflux) + "," + std::to_string(r.qflux) + "," +
               detail::format_g17(r.flux) + "," + detail::format_g17(r.band_lo) + "," +
               detail::format_g17(r.band_hi) + "\n";
    return out;
}

}  // namespace aqlab::bloch
