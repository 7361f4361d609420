#pragma once

// Compact subsets of the real line represented as finite unions of closed
// intervals, the Hausdorff metric between them computed in closed form, and
// a checked dense Hermitian eigensolver.  These are the value types every
// spectral computation in the library produces and consumes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aqlab/detail/text.hpp"

namespace aqlab::spectra {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline bool operator==(const Interval& a, const Interval& b) {
    return a.lo == b.lo && a.hi == b.hi;
}

// Finite union of closed intervals [lo_i, hi_i], kept sorted with strictly
// positive gaps between consecutive parts.  The constructor normalizes any
// finite list: parts are sorted and overlapping or touching parts coalesce.
class CompactRealSet {
public:
    CompactRealSet() = default;

    explicit CompactRealSet(std::vector<Interval> parts) {
        for (const auto& iv : parts) {
            if (!(iv.lo <= iv.hi))
                throw std::invalid_argument("interval with lo > hi");
            if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
                throw std::invalid_argument("interval bound not finite");
        }
        std::sort(parts.begin(), parts.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        for (const auto& iv : parts) {
            if (!parts_.empty() && iv.lo <= parts_.back().hi)
                parts_.back().hi = std::max(parts_.back().hi, iv.hi);
            else
                parts_.push_back(iv);
        }
    }

    // Closure of a finite point sample: consecutive points closer than
    // merge_eps land in one interval.  merge_eps = 0 keeps exact duplicates
    // only; it is the right choice for finite-volume eigenvalue lists.
    static CompactRealSet from_points(std::vector<double> pts, double merge_eps) {
        if (merge_eps < 0.0)
            throw std::invalid_argument("merge_eps must be >= 0");
        if (pts.empty()) return {};
        std::sort(pts.begin(), pts.end());
        std::vector<Interval> parts;
        parts.push_back({pts.front(), pts.front()});
        for (double p : pts) {
            if (!std::isfinite(p)) throw std::invalid_argument("point not finite");
            if (p - parts.back().hi <= merge_eps)
                parts.back().hi = std::max(parts.back().hi, p);
            else
                parts.push_back({p, p});
        }
        return CompactRealSet(std::move(parts));
    }

    bool empty() const { return parts_.empty(); }
    const std::vector<Interval>& intervals() const { return parts_; }

    double min() const { require_nonempty(); return parts_.front().lo; }
    double max() const { require_nonempty(); return parts_.back().hi; }

    bool contains(double x, double tol = 0.0) const {
        for (const auto& iv : parts_)
            if (x >= iv.lo - tol && x <= iv.hi + tol) return true;
        return false;
    }

    friend bool operator==(const CompactRealSet& a, const CompactRealSet& b) {
        return a.parts_ == b.parts_;
    }

private:
    void require_nonempty() const {
        if (parts_.empty()) throw std::logic_error("empty set has no extremes");
    }

    std::vector<Interval> parts_;
};

inline CompactRealSet set_union(const CompactRealSet& a, const CompactRealSet& b) {
    std::vector<Interval> parts = a.intervals();
    parts.insert(parts.end(), b.intervals().begin(), b.intervals().end());
    return CompactRealSet(std::move(parts));
}

inline double distance_point_to_set(double x, const CompactRealSet& s) {
    if (s.empty()) throw std::invalid_argument("distance to empty set");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& iv : s.intervals()) {
        if (x < iv.lo)       best = std::min(best, iv.lo - x);
        else if (x > iv.hi)  best = std::min(best, x - iv.hi);
        else                 return 0.0;
    }
    return best;
}

// One-sided distance sup_{x in a} dist(x, b), evaluated exactly: the
// supremum of the piecewise-linear function dist(., b) over a union of
// intervals is attained at an interval endpoint of a or at a gap midpoint
// of b that lies inside a.  No sampling is involved.
inline double directed_hausdorff(const CompactRealSet& a, const CompactRealSet& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("Hausdorff distance needs nonempty sets");
    double d = 0.0;
    for (const auto& iv : a.intervals()) {
        d = std::max(d, distance_point_to_set(iv.lo, b));
        d = std::max(d, distance_point_to_set(iv.hi, b));
    }
    const auto& bp = b.intervals();
    for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
        double mid = 0.5 * (bp[j].hi + bp[j + 1].lo);
        if (a.contains(mid))
            d = std::max(d, std::min(mid - bp[j].hi, bp[j + 1].lo - mid));
    }
    return d;
}

inline double hausdorff_distance(const CompactRealSet& a, const CompactRealSet& b) {
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

// --- serialization -------------------------------------------------------
//
// CSV: header "lo,hi", one row per interval.  JSON: array of [lo, hi]
// pairs.  Both carry 17 significant digits, so a write/read cycle
// reproduces the set bit for bit.

inline std::string to_csv(const CompactRealSet& s) {
    std::string out = "lo,hi\n";
    for (const auto& iv : s.intervals())
        out += detail::format_g17(iv.lo) + "," + detail::format_g17(iv.hi) + "\n";
    return out;
}

inline CompactRealSet set_from_csv(const std::string& text) {
    std::vector<Interval> parts;
    bool seen_header = false;
    for (auto line : detail::split_lines(text)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        if (!seen_header) {
            if (line != "lo,hi")
                throw std::invalid_argument("expected header 'lo,hi'");
            seen_header = true;
            continue;
        }
        auto cells = detail::split(line, ',');
        if (cells.size() != 2)
            throw std::invalid_argument("expected two cells per row");
        parts.push_back({detail::parse_double(cells[0]), detail::parse_double(cells[1])});
    }
    if (!seen_header) throw std::invalid_argument("missing header row");
    return CompactRealSet(std::move(parts));
}

inline std::string to_json(const CompactRealSet& s) {
    std::string out = "[";
    bool first = true;
    for (const auto& iv : s.intervals()) {
        if (!first) out += ",";
        first = false;
        out += "[" + detail::format_g17(iv.lo) + "," + detail::format_g17(iv.hi) + "]";
    }
    return out + "]";
}

inline CompactRealSet set_from_json(const std::string& text) {
    std::vector<Interval> parts;
    std::size_t i = 0;
    auto skip_ws = [&] { while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };
    auto expect = [&](char c) {
        skip_ws();
        if (i >= text.size() || text[i] != c)
            throw std::invalid_argument(std::string("expected '") + c + "' in interval list");
        ++i;
    };
    auto number = [&] {
        skip_ws();
        std::size_t start = i;
        while (i < text.size() && text[i] != ',' && text[i] != ']') ++i;
        return detail::parse_double(detail::trim(std::string_view(text).substr(start, i - start)));
    };
    expect('[');
    skip_ws();
    if (i < text.size() && text[i] == ']') return {};
    while (true) {
        expect('[');
        double lo = number();
        expect(',');
        double hi = number();
        expect(']');
        parts.push_back({lo, hi});
        skip_ws();
        if (i < text.size() && text[i] == ',') { ++i; continue; }
        expect(']');
        break;
    }
    return CompactRealSet(std::move(parts));
}

// --- Hermitian matrices --------------------------------------------------

// Dense complex matrix checked for conjugate symmetry on construction.
// The tolerance is absolute; assembled operators are expected to be
// Hermitian to rounding error, and anything worse is a bug upstream.
class HermitianMatrix {
public:
    explicit HermitianMatrix(Eigen::MatrixXcd m, double herm_tol = 1e-12)
        : m_(std::move(m)) {
        if (m_.rows() != m_.cols())
            throw std::invalid_argument("matrix not square");
        double dev = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
        if (m_.rows() == 0) dev = 0.0;
        if (dev > herm_tol)
            throw std::invalid_argument("matrix not Hermitian; max deviation " +
                                        detail::format_g17(dev));
    }

    Eigen::Index dim() const { return m_.rows(); }
    const Eigen::MatrixXcd& matrix() const { return m_; }

    struct EigenSystem {
        Eigen::VectorXd values;     // ascending
        Eigen::MatrixXcd vectors;   // columns, orthonormal
        double max_residual = 0.0;  // max_i |A v_i - lambda_i v_i|_2
    };

    // Values only, ascending.  Solver failure surfaces as an exception.
    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("Hermitian eigensolver did not converge");
        return es.eigenvalues();
    }

    EigenSystem eigensystem() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("Hermitian eigensolver did not converge");
        EigenSystem sys;
        sys.values = es.eigenvalues();
        sys.vectors = es.eigenvectors();
        Eigen::MatrixXcd resid = m_ * sys.vectors - sys.vectors * sys.values.asDiagonal();
        sys.max_residual = resid.rows() == 0 ? 0.0 : resid.colwise().norm().maxCoeff();
        return sys;
    }

private:
    Eigen::MatrixXcd m_;
};

inline std::vector<double> hermitian_eigenvalues(const HermitianMatrix& h) {
    Eigen::VectorXd v = h.eigenvalues();
    return {v.data(), v.data() + v.size()};
}

} // namespace aqlab::spectra
