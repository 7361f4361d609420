#pragma once

// Experiment drivers behind the `aqlab` command line: a versioned key-value
// configuration format, deterministic JSON result records with certificates,
// and one driver per experiment — single-model band computation, spectral
// convergence along mechanical convergents, degree-two polynomial norm
// continuity, the Hofstadter flux sweep, the periodic-approximation
// counterexample, and a randomized groupoid-identity battery.
//
// Determinism contract: identical configuration (seed included) produces a
// byte-identical record apart from the trailing wall-clock field, so records
// diff cleanly across runs and machines with the same libm.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aqlab/bloch.hpp"
#include "aqlab/groupoids.hpp"
#include "aqlab/schrodinger.hpp"
#include "aqlab/spectra.hpp"
#include "aqlab/symdyn.hpp"

namespace aqlab::harness {

using json = nlohmann::ordered_json;
// Insertion-ordered JSON: field order is part of the determinism contract.
using ResultRecord = nlohmann::ordered_json;

// --- run status -------------------------------------------------------------

// Also the process exit code, so scripts can branch on the outcome.  An
// invariant violation outranks a degraded certificate when both occur.
enum class RunStatus { Ok = 0, InvariantViolation = 1, CertificateDegradation = 2 };

inline const char* status_label(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return "ok";
        case RunStatus::InvariantViolation: return "invariant-violation";
        default: return "certificate-degradation";
    }
}

inline int exit_code(RunStatus s) { return static_cast<int>(s); }

inline RunStatus worse(RunStatus a, RunStatus b) {
    if (a == RunStatus::InvariantViolation || b == RunStatus::InvariantViolation)
        return RunStatus::InvariantViolation;
    if (a == RunStatus::CertificateDegradation || b == RunStatus::CertificateDegradation)
        return RunStatus::CertificateDegradation;
    return RunStatus::Ok;
}

// --- configuration ----------------------------------------------------------

inline constexpr const char* kConfigVersion = "aqlab-config-v1";
inline constexpr const char* kRecordVersion = "aqlab-result-v1";

inline const std::set<std::string, std::less<>>& known_experiments() {
    static const std::set<std::string, std::less<>> names = {
        "bands", "converge", "p2check", "butterfly", "counterexample", "groupoid-selftest"};
    return names;
}

inline const std::set<std::string, std::less<>>& known_config_keys() {
    static const std::set<std::string, std::less<>> keys = {
        "experiment", "model",  "spec_path", "word",  "lambda", "alpha",
        "approximants", "grid", "tol",       "seed",  "count",  "max_period",
        "q_max",        "fluxes", "cells",   "poly",  "format", "out"};
    return keys;
}

// Flat `key value` text with a version header; '#' lines are comments.  The
// experiment name is pulled out, everything else stays as ordered raw text so
// the record can echo the inputs verbatim.
struct ExperimentConfig {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(std::string_view key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }

    bool has(std::string_view key) const { return find(key) != nullptr; }

    std::string get(std::string_view key, const std::string& fallback) const {
        const std::string* v = find(key);
        return v ? *v : fallback;
    }

    double get_double(std::string_view key, double fallback) const {
        const std::string* v = find(key);
        if (!v) return fallback;
        try {
            return detail::parse_double(*v);
        } catch (const std::exception&) {
            throw std::invalid_argument("config key '" + std::string(key) +
                                        "' is not a number: '" + *v + "'");
        }
    }

    long long get_int(std::string_view key, long long fallback) const {
        const std::string* v = find(key);
        if (!v) return fallback;
        try {
            return detail::parse_int(*v);
        } catch (const std::exception&) {
            throw std::invalid_argument("config key '" + std::string(key) +
                                        "' is not an integer: '" + *v + "'");
        }
    }
};

// Replaces the value of `key`, or appends the pair; used by the CLI to fold
// command-line flags into a file-loaded configuration.
inline void set_entry(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (known_config_keys().count(key) == 0)
        throw std::invalid_argument("unknown config key '" + key + "'");
    if (key == "experiment") {
        if (known_experiments().count(value) == 0)
            throw std::invalid_argument("unknown experiment '" + value + "'");
        c.experiment = value;
        return;
    }
    for (auto& [k, v] : c.entries)
        if (k == key) {
            v = value;
            return;
        }
    c.entries.emplace_back(key, value);
}

inline ExperimentConfig config_from_text(const std::string& text) {
    auto lines = detail::split_lines(text);
    std::size_t i = 0;
    auto skippable = [](std::string_view line) { return line.empty() || line.front() == '#'; };
    while (i < lines.size() && skippable(detail::trim(lines[i]))) ++i;
    if (i >= lines.size() || detail::trim(lines[i]) != kConfigVersion)
        throw std::invalid_argument(std::string("config must start with '") + kConfigVersion + "'");
    ++i;

    ExperimentConfig out;
    std::set<std::string, std::less<>> seen;
    for (; i < lines.size(); ++i) {
        std::string_view line = detail::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        std::size_t sp = line.find(' ');
        if (sp == std::string_view::npos)
            throw std::invalid_argument("config line needs 'key value': '" + std::string(line) +
                                        "'");
        std::string key(line.substr(0, sp));
        std::string value(detail::trim(line.substr(sp + 1)));
        if (known_config_keys().count(key) == 0)
            throw std::invalid_argument("unknown config key '" + key + "'");
        if (value.empty()) throw std::invalid_argument("config key '" + key + "' has no value");
        if (!seen.insert(key).second)
            throw std::invalid_argument("duplicate config key '" + key + "'");
        if (key == "experiment") {
            if (known_experiments().count(value) == 0)
                throw std::invalid_argument("unknown experiment '" + value + "'");
            out.experiment = value;
        } else {
            if (key == "tol" && !(detail::parse_double(value) > 0.0))
                throw std::invalid_argument("config key 'tol' must be positive");
            out.entries.emplace_back(std::move(key), std::move(value));
        }
    }
    if (out.experiment.empty()) throw std::invalid_argument("config must name an experiment");
    return out;
}

inline std::string to_text(const ExperimentConfig& c) {
    std::string out = std::string(kConfigVersion) + "\n";
    out += "experiment " + c.experiment + "\n";
    for (const auto& [k, v] : c.entries) out += k + " " + v + "\n";
    return out;
}

// --- flat-file helpers --------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("short write to '" + path + "'");
}

inline ExperimentConfig config_from_file(const std::string& path) {
    return config_from_text(read_text_file(path));
}

// --- quadratic polynomials ----------------------------------------------------

// p(X) = c0 + c1 X + c2 X^2.  Degree at most two is the hypothesis under
// which norm continuity is equivalent to spectral continuity, and it keeps
// sup |p| over an interval union exactly computable.
struct Quadratic {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;

    double operator()(double x) const { return (c2 * x + c1) * x + c0; }
    double slope(double x) const { return 2.0 * c2 * x + c1; }
};

// Comma-separated coefficients, constant term first: "0,1" is X and
// "0,0,1" is X^2.  A fourth coefficient would leave the degree-two regime.
inline Quadratic quadratic_from_text(std::string_view text) {
    auto parts = detail::split(detail::trim(text), ',');
    if (parts.empty() || parts.size() > 3)
        throw std::invalid_argument("polynomial needs 1 to 3 coefficients: '" +
                                    std::string(text) + "'");
    Quadratic p;
    p.c0 = detail::parse_double(detail::trim(parts[0]));
    if (parts.size() > 1) p.c1 = detail::parse_double(detail::trim(parts[1]));
    if (parts.size() > 2) p.c2 = detail::parse_double(detail::trim(parts[2]));
    return p;
}

// Exact sup of |p| over a finite interval union: |p| is piecewise monotone
// with its only interior critical point at the parabola vertex, so interval
// endpoints plus the vertex (when inside) exhaust the candidates.
inline double sup_abs_on(const Quadratic& p, const spectra::CompactRealSet& s) {
    if (s.empty()) throw std::invalid_argument("sup over an empty set");
    double best = 0.0;
    for (const auto& iv : s.intervals()) {
        best = std::max({best, std::abs(p(iv.lo)), std::abs(p(iv.hi))});
        if (p.c2 != 0.0) {
            double vertex = -p.c1 / (2.0 * p.c2);
            if (vertex >= iv.lo && vertex <= iv.hi) best = std::max(best, std::abs(p(vertex)));
        }
    }
    return best;
}

// Largest |p'| over the convex hull of two sets; p' is affine, so the hull
// endpoints suffice.  This is the Lipschitz constant entering the norm
// continuity bound |sup_A |p| - sup_B |p|| <= Lip * d_H(A, B).
inline double lipschitz_on_hull(const Quadratic& p, const spectra::CompactRealSet& a,
                                const spectra::CompactRealSet& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("hull of an empty set");
    double lo = std::min(a.min(), b.min());
    double hi = std::max(a.max(), b.max());
    return std::max(std::abs(p.slope(lo)), std::abs(p.slope(hi)));
}

// --- distance rendering ---------------------------------------------------------

// A distance prints as a bare number only when its certified error is at most
// 10% of the value; otherwise the honest output is the enclosing interval.
inline std::string format_distance(double value, double certified_error) {
    if (!std::isfinite(value) || value < 0.0)
        throw std::invalid_argument("distance must be finite and nonnegative");
    if (!std::isfinite(certified_error) || certified_error < 0.0)
        throw std::invalid_argument("certified error must be finite and nonnegative");
    if (certified_error <= 0.1 * value) return detail::format_g17(value);
    return "[" + detail::format_g17(std::max(0.0, value - certified_error)) + ", " +
           detail::format_g17(value + certified_error) + "]";
}

// --- record plumbing -------------------------------------------------------------

namespace detail5 {

class WallTimer {
  public:
    double ms() const {
        auto dt = std::chrono::steady_clock::now() - t0_;
        return std::chrono::duration<double, std::milli>(dt).count();
    }

  private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

inline json interval_json(const spectra::Interval& iv) { return json::array({iv.lo, iv.hi}); }

inline json set_json(const spectra::CompactRealSet& s) {
    json out = json::array();
    for (const auto& iv : s.intervals()) out.push_back(interval_json(iv));
    return out;
}

inline json bands_json(const std::vector<spectra::Interval>& bands) {
    json out = json::array();
    for (const auto& iv : bands) out.push_back(interval_json(iv));
    return out;
}

inline json certificate_json(const bloch::RefinementCertificate& c) {
    json out;
    out["grid"] = c.grid;
    out["edge_error"] = c.edge_error;
    out["budget_exhausted"] = c.budget_exhausted;
    return out;
}

inline ResultRecord new_record(const ExperimentConfig& c) {
    ResultRecord rec;
    rec["schema_version"] = kRecordVersion;
    rec["experiment"] = c.experiment;
    json inputs;
    for (const auto& [k, v] : c.entries) inputs[k] = v;
    rec["inputs"] = inputs;
    return rec;
}

// Status and wall clock go last: everything above them is deterministic.
inline void stamp(ResultRecord& rec, const WallTimer& t, RunStatus s) {
    rec["status"] = status_label(s);
    rec["wall_ms"] = t.ms();
}

}  // namespace detail5

struct RunOutcome {
    ResultRecord record;
    RunStatus status = RunStatus::Ok;
};

// --- models -----------------------------------------------------------------------

inline double golden_slope() { return 0.5 * (std::sqrt(5.0) - 1.0); }

// Nearest-neighbor hop 1 with potential +lambda on 'a' and -lambda on 'b';
// on the two-letter alternating word this is the staggered chain.
inline schrodinger::OperatorSpec staggered_spec(double lambda) {
    schrodinger::OperatorSpec spec;
    spec.dimension = 1;
    spec.alphabet = symdyn::Alphabet::ab();
    spec.radius = 0;
    spec.hopping[{1, 0}] = schrodinger::HopTable{{}, schrodinger::cdouble(1.0, 0.0)};
    spec.hopping[{-1, 0}] = schrodinger::HopTable{{}, schrodinger::cdouble(1.0, 0.0)};
    spec.potential.by_word["a"] = lambda;
    spec.potential.by_word["b"] = -lambda;
    return spec;
}

struct Model {
    std::string name;
    schrodinger::OperatorSpec spec;
    std::string default_word;  // periodic configuration used when none is given
};

// Built-in models plus `file`, which loads a serialized operator from
// `spec_path`.  `lambda` scales the potential of the built-ins.
inline Model model_from_config(const ExperimentConfig& c, const std::string& fallback_model) {
    std::string name = c.get("model", fallback_model);
    double lambda = c.get_double("lambda", 1.0);
    Model m;
    m.name = name;
    if (name == "laplacian") {
        m.spec = schrodinger::letter_potential_spec(symdyn::Alphabet::binary01(), 1, 0.0);
        m.default_word = "0";
    } else if (name == "fibonacci") {
        m.spec = schrodinger::letter_potential_spec(symdyn::Alphabet::binary01(), 1, lambda);
        m.default_word = "0";
    } else if (name == "alternating") {
        m.spec = staggered_spec(lambda);
        m.default_word = "ab";
    } else if (name == "file") {
        const std::string* path = c.find("spec_path");
        if (!path) throw std::invalid_argument("model 'file' needs a spec_path");
        m.spec = schrodinger::operator_spec_from_text(read_text_file(*path));
        m.default_word = m.spec.alphabet.label(0);
    } else {
        throw std::invalid_argument("unknown model '" + name + "'");
    }
    schrodinger::require_valid(m.spec);
    return m;
}

// slope in (0,1); the literal "golden" picks the inverse golden ratio.
inline double alpha_from_config(const ExperimentConfig& c) {
    std::string text = c.get("alpha", "golden");
    if (text == "golden") return golden_slope();
    double alpha = detail::parse_double(text);
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    return alpha;
}

// --- convergent approximants ----------------------------------------------------

struct ApproximantSpectrum {
    long long p;
    long long q;
    symdyn::Subshift orbit;
    bloch::BandSpectrum spectrum;
};

// Band spectra of the operator over each mechanical convergent orbit of the
// slope.  A rational slope terminates the continued fraction early, which is
// a configuration error here, not a degraded result.
inline std::vector<ApproximantSpectrum> convergent_spectra(const schrodinger::OperatorSpec& spec,
                                                           double alpha, int count, int grid,
                                                           double tol) {
    auto list = symdyn::convergent_approximants(alpha, count);
    if (list.exhausted)
        throw std::invalid_argument("slope is rational; convergents need an irrational slope");
    std::vector<ApproximantSpectrum> out;
    out.reserve(list.items.size());
    for (const auto& item : list.items) {
        auto x = symdyn::Configuration::mechanical_rational(item.p, item.q, 0);
        out.push_back({item.p, item.q, item.orbit, bloch::band_spectrum(spec, x, grid, tol)});
    }
    return out;
}

namespace detail5 {

// Dictionary horizon deep enough to separate every listed convergent orbit
// from the limit subshift: a period-q orbit already disagrees with it on
// words no longer than q.
inline int dictionary_horizon(const std::vector<ApproximantSpectrum>& items) {
    long long deepest = 0;
    for (const auto& item : items) deepest = std::max(deepest, item.q);
    return static_cast<int>(std::max<long long>(64, deepest + 8));
}

}  // namespace detail5

// --- experiment drivers --------------------------------------------------------

// Band spectrum of one periodic configuration, with an optional gluing
// cross-check against the finite ring on `cells` periods.
inline RunOutcome run_bands(const ExperimentConfig& c) {
    detail5::WallTimer timer;
    Model m = model_from_config(c, "laplacian");
    std::string word_text = c.get("word", m.default_word);
    symdyn::Word w = symdyn::parse_word(m.spec.alphabet, word_text);
    if (w.empty()) throw std::invalid_argument("word must be nonempty");
    auto x = symdyn::Configuration::periodic(m.spec.alphabet, w);
    int grid = static_cast<int>(c.get_int("grid", 16));
    double tol = c.get_double("tol", 1e-9);

    auto bs = bloch::band_spectrum(m.spec, x, grid, tol);

    ResultRecord rec = detail5::new_record(c);
    json resolved;
    resolved["model"] = m.name;
    resolved["word"] = symdyn::render(m.spec.alphabet, w);
    resolved["grid"] = grid;
    resolved["tol"] = tol;
    rec["resolved"] = resolved;
    rec["bands"] = detail5::bands_json(bs.bands);
    rec["set"] = detail5::set_json(bs.set);
    rec["certificate"] = detail5::certificate_json(bs.certificate);

    RunStatus status = RunStatus::Ok;
    long long cells = c.get_int("cells", 0);
    if (cells > 0) {
        double deviation = bloch::bloch_vs_finite_volume(m.spec, x, cells);
        rec["gluing_cells"] = cells;
        rec["gluing_deviation"] = deviation;
        if (!(deviation <= 1e-8)) status = RunStatus::InvariantViolation;
    }
    if (bs.certificate.budget_exhausted) status = worse(status, RunStatus::CertificateDegradation);

    std::string csv = "band,lo,hi\n";
    for (std::size_t j = 0; j < bs.bands.size(); ++j)
        csv += std::to_string(j) + "," + detail::format_g17(bs.bands[j].lo) + "," +
               detail::format_g17(bs.bands[j].hi) + "\n";
    rec["csv"] = csv;

    detail5::stamp(rec, timer, status);
    return {std::move(rec), status};
}

// Spectra along mechanical convergents: pairwise Hausdorff matrix, the
// distance-to-finest table with the dictionary distance to the limit
// subshift alongside, and consecutive distances.  Spectral and symbolic
// convergence are two readings of the same table.
inline RunOutcome run_converge(const ExperimentConfig& c) {
    detail5::WallTimer timer;
    Model m = model_from_config(c, "fibonacci");
    int count = static_cast<int>(c.get_int("approximants", 8));
    if (count < 2) throw std::invalid_argument("approximants must be >= 2");
    double alpha = alpha_from_config(c);
    int grid = static_cast<int>(c.get_int("grid", 16));
    double tol = c.get_double("tol", 1e-10);

    auto items = convergent_spectra(m.spec, alpha, count, grid, tol);
    auto limit = symdyn::Subshift::orbit_closure(symdyn::Configuration::mechanical(alpha, 0.0));
    int horizon = detail5::dictionary_horizon(items);

    const std::size_t n = items.size();
    std::vector<double> dict(n);
    for (std::size_t i = 0; i < n; ++i)
        dict[i] = symdyn::subshift_distance(items[i].orbit, limit, horizon).value();

    std::vector<std::vector<double>> dh(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            dh[i][j] = dh[j][i] =
                spectra::hausdorff_distance(items[i].spectrum.set, items[j].spectrum.set);

    ResultRecord rec = detail5::new_record(c);
    json resolved;
    resolved["model"] = m.name;
    resolved["alpha"] = alpha;
    resolved["approximants"] = count;
    resolved["grid"] = grid;
    resolved["tol"] = tol;
    resolved["dictionary_horizon"] = horizon;
    rec["resolved"] = resolved;

    RunStatus status = RunStatus::Ok;
    json steps = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        json step;
        step["p"] = items[i].p;
        step["q"] = items[i].q;
        step["dict_distance"] = dict[i];
        step["bands"] = detail5::bands_json(items[i].spectrum.bands);
        step["set"] = detail5::set_json(items[i].spectrum.set);
        step["certificate"] = detail5::certificate_json(items[i].spectrum.certificate);
        steps.push_back(std::move(step));
        if (items[i].spectrum.certificate.budget_exhausted)
            status = worse(status, RunStatus::CertificateDegradation);
    }
    rec["approximants"] = std::move(steps);
    rec["hausdorff_matrix"] = dh;

    auto edge_err = [&](std::size_t i, std::size_t j) {
        return items[i].spectrum.certificate.edge_error +
               items[j].spectrum.certificate.edge_error;
    };

    json to_finest = json::array();
    std::string csv = "q,dict_to_limit,spectral_to_finest,certified_error\n";
    for (std::size_t i = 0; i < n; ++i) {
        double err = edge_err(i, n - 1);
        json row;
        row["q"] = items[i].q;
        row["dict_to_limit"] = dict[i];
        row["spectral_to_finest"] = dh[i][n - 1];
        row["certified_error"] = err;
        row["display"] = format_distance(dh[i][n - 1], i + 1 == n ? 0.0 : err);
        to_finest.push_back(std::move(row));
        csv += std::to_string(items[i].q) + "," + detail::format_g17(dict[i]) + "," +
               detail::format_g17(dh[i][n - 1]) + "," + detail::format_g17(err) + "\n";
    }
    rec["to_finest"] = std::move(to_finest);

    json consecutive = json::array();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        json row;
        row["q_from"] = items[i].q;
        row["q_to"] = items[i + 1].q;
        row["distance"] = dh[i][i + 1];
        row["certified_error"] = edge_err(i, i + 1);
        row["display"] = format_distance(dh[i][i + 1], edge_err(i, i + 1));
        consecutive.push_back(std::move(row));
    }
    rec["consecutive"] = std::move(consecutive);
    rec["csv"] = csv;

    detail5::stamp(rec, timer, status);
    return {std::move(rec), status};
}

// Norm continuity for polynomials of degree at most two: along the same
// convergent spectra as `converge`, checks |sup|p| - sup|p|| against the
// Lipschitz bound on every consecutive pair.  The bound is widened by the
// certified edge error of both spectra, since the inequality holds for the
// true sets, not the computed ones.
inline RunOutcome run_p2check(const ExperimentConfig& c) {
    detail5::WallTimer timer;
    Model m = model_from_config(c, "fibonacci");
    int count = static_cast<int>(c.get_int("approximants", 8));
    if (count < 2) throw std::invalid_argument("approximants must be >= 2");
    double alpha = alpha_from_config(c);
    int grid = static_cast<int>(c.get_int("grid", 16));
    double tol = c.get_double("tol", 1e-10);

    std::vector<std::pair<std::string, Quadratic>> polys;
    const std::string poly_text = c.get("poly", "0,1");  // keeps the views below alive
    for (auto part : detail::split(poly_text, ';')) {
        std::string text(detail::trim(part));
        if (text.empty()) continue;
        polys.emplace_back(text, quadratic_from_text(text));
    }
    if (polys.empty()) throw std::invalid_argument("poly lists no polynomials");

    auto items = convergent_spectra(m.spec, alpha, count, grid, tol);
    const std::size_t n = items.size();

    ResultRecord rec = detail5::new_record(c);
    json resolved;
    resolved["model"] = m.name;
    resolved["alpha"] = alpha;
    resolved["approximants"] = count;
    resolved["grid"] = grid;
    resolved["tol"] = tol;
    rec["resolved"] = resolved;

    RunStatus status = RunStatus::Ok;
    json steps = json::array();
    for (const auto& item : items) {
        json step;
        step["p"] = item.p;
        step["q"] = item.q;
        step["set"] = detail5::set_json(item.spectrum.set);
        step["certificate"] = detail5::certificate_json(item.spectrum.certificate);
        steps.push_back(std::move(step));
        if (item.spectrum.certificate.budget_exhausted)
            status = worse(status, RunStatus::CertificateDegradation);
    }
    rec["approximants"] = std::move(steps);

    json checks = json::array();
    std::string csv = "poly,q_from,q_to,norm_from,norm_to,delta,lipschitz,hausdorff,bound,ok\n";
    for (const auto& [text, p] : polys) {
        json entry;
        entry["poly"] = text;
        entry["coefficients"] = json::array({p.c0, p.c1, p.c2});
        std::vector<double> norms(n);
        for (std::size_t i = 0; i < n; ++i) norms[i] = sup_abs_on(p, items[i].spectrum.set);
        entry["norms"] = norms;
        json pairs = json::array();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double delta = std::abs(norms[i] - norms[i + 1]);
            double lip = lipschitz_on_hull(p, items[i].spectrum.set, items[i + 1].spectrum.set);
            double dist = spectra::hausdorff_distance(items[i].spectrum.set,
                                                      items[i + 1].spectrum.set);
            double err = items[i].spectrum.certificate.edge_error +
                         items[i + 1].spectrum.certificate.edge_error;
            double bound = lip * (dist + err) + 1e-12;
            bool ok = delta <= bound;
            if (!ok) status = worse(status, RunStatus::InvariantViolation);
            json pair;
            pair["q_from"] = items[i].q;
            pair["q_to"] = items[i + 1].q;
            pair["delta_norm"] = delta;
            pair["lipschitz"] = lip;
            pair["hausdorff"] = dist;
            pair["bound"] = bound;
            pair["ok"] = ok;
            pairs.push_back(std::move(pair));
            csv += text + "," + std::to_string(items[i].q) + "," + std::to_string(items[i + 1].q) +
                   "," + detail::format_g17(norms[i]) + "," + detail::format_g17(norms[i + 1]) +
                   "," + detail::format_g17(delta) + "," + detail::format_g17(lip) + "," +
                   detail::format_g17(dist) + "," + detail::format_g17(bound) + "," +
                   (ok ? "1" : "0") + "\n";
        }
        entry["pairs"] = std::move(pairs);
        checks.push_back(std::move(entry));
    }
    rec["polynomials"] = std::move(checks);
    rec["csv"] = csv;

    detail5::stamp(rec, timer, status);
    return {std::move(rec), status};
}

// "p/q" with coprime integer parts.
inline bloch::FluxFraction flux_from_text(std::string_view text) {
    auto parts = detail::split(detail::trim(text), '/');
    if (parts.size() != 2)
        throw std::invalid_argument("flux needs the form p/q: '" + std::string(text) + "'");
    bloch::FluxFraction f{detail::parse_int(detail::trim(parts[0])),
                          detail::parse_int(detail::trim(parts[1]))};
    if (f.q < 1) throw std::invalid_argument("flux denominator must be >= 1");
    if (std::gcd(f.p, f.q) != 1)
        throw std::invalid_argument("flux must be reduced: '" + std::string(text) + "'");
    return f;
}

// Hofstadter spectra over a flux list (explicit `fluxes`, or all reduced
// fractions up to `q_max`), the plot-ready CSV, and the continuity table of
// Hausdorff distances between adjacent fluxes.
inline RunOutcome run_butterfly(const ExperimentConfig& c) {
    detail5::WallTimer timer;
    double lambda = c.get_double("lambda", 1.0);
    int grid = static_cast<int>(c.get_int("grid", 12));
    double tol = c.get_double("tol", 1e-8);

    std::vector<bloch::FluxFraction> fluxes;
    if (const std::string* list = c.find("fluxes")) {
        std::string spaced = *list;
        std::replace(spaced.begin(), spaced.end(), ',', ' ');
        for (auto part : detail::split(spaced, ' '))
            if (!detail::trim(part).empty()) fluxes.push_back(flux_from_text(part));
        if (fluxes.empty()) throw std::invalid_argument("fluxes lists no fractions");
    } else {
        fluxes = bloch::farey_fluxes(c.get_int("q_max", 6));
    }
    std::stable_sort(fluxes.begin(), fluxes.end(),
                     [](const bloch::FluxFraction& a, const bloch::FluxFraction& b) {
                         return a.p * b.q < b.p * a.q;
                     });

    std::vector<bloch::BandSpectrum> spectra_by_flux;
    spectra_by_flux.reserve(fluxes.size());
    for (const auto& f : fluxes)
        spectra_by_flux.push_back(bloch::hofstadter_spectrum(f.p, f.q, lambda, grid, tol));

    ResultRecord rec = detail5::new_record(c);
    json resolved;
    resolved["lambda"] = lambda;
    resolved["grid"] = grid;
    resolved["tol"] = tol;
    resolved["flux_count"] = fluxes.size();
    rec["resolved"] = resolved;

    RunStatus status = RunStatus::Ok;
    std::vector<bloch::ButterflyRow> rows;
    json flux_entries = json::array();
    for (std::size_t i = 0; i < fluxes.size(); ++i) {
        const auto& f = fluxes[i];
        const auto& s = spectra_by_flux[i];
        for (const auto& band : s.bands)
            rows.push_back({f.p, f.q, static_cast<double>(f.p) / static_cast<double>(f.q),
                            band.lo, band.hi});
        json entry;
        entry["p"] = f.p;
        entry["q"] = f.q;
        entry["flux"] = static_cast<double>(f.p) / static_cast<double>(f.q);
        entry["bands"] = detail5::bands_json(s.bands);
        entry["set"] = detail5::set_json(s.set);
        entry["certificate"] = detail5::certificate_json(s.certificate);
        flux_entries.push_back(std::move(entry));
        if (s.certificate.budget_exhausted)
            status = worse(status, RunStatus::CertificateDegradation);
    }
    rec["fluxes"] = std::move(flux_entries);

    json continuity = json::array();
    for (std::size_t i = 0; i + 1 < fluxes.size(); ++i) {
        double dist =
            spectra::hausdorff_distance(spectra_by_flux[i].set, spectra_by_flux[i + 1].set);
        double err = spectra_by_flux[i].certificate.edge_error +
                     spectra_by_flux[i + 1].certificate.edge_error;
        json row;
        row["from"] = std::to_string(fluxes[i].p) + "/" + std::to_string(fluxes[i].q);
        row["to"] = std::to_string(fluxes[i + 1].p) + "/" + std::to_string(fluxes[i + 1].q);
        row["distance"] = dist;
        row["certified_error"] = err;
        row["display"] = format_distance(dist, err);
        continuity.push_back(std::move(row));
    }
    rec["continuity"] = std::move(continuity);
    rec["csv"] = bloch::butterfly_csv(rows);

    detail5::stamp(rec, timer, status);
    return {std::move(rec), status};
}

// Splice-junction obstruction: no periodic orbit of period <= max_period
// comes closer than 1/2 to the splice orbit closure, while the mechanical
// convergent orbits of an irrational slope do approximate its subshift, with
// dictionary distances strictly decreasing.  Both halves are exact dyadic
// numbers; failure of either is an invariant violation.
inline RunOutcome run_counterexample(const ExperimentConfig& c) {
    detail5::WallTimer timer;
    int max_period = static_cast<int>(c.get_int("max_period", 6));
    int count = static_cast<int>(c.get_int("approximants", 6));
    if (count < 2) throw std::invalid_argument("approximants must be >= 2");
    double alpha = alpha_from_config(c);

    auto ab = symdyn::Alphabet::ab();
    auto splice = symdyn::Subshift::orbit_closure(symdyn::Configuration::splice(ab, 0, 1));
    auto best = symdyn::min_distance_to_periodic(splice, max_period);
    bool bound_holds = best.distance.value() >= 0.5;

    auto list = symdyn::convergent_approximants(alpha, count);
    if (list.exhausted)
        throw std::invalid_argument("slope is rational; convergents need an irrational slope");
    auto limit = symdyn::Subshift::orbit_closure(symdyn::Configuration::mechanical(alpha, 0.0));
    long long deepest = 0;
    for (const auto& item : list.items) deepest = std::max(deepest, item.q);
    int horizon = static_cast<int>(std::max<long long>(64, deepest + 8));

    std::vector<double> control;
    control.reserve(list.items.size());
    for (const auto& item : list.items)
        control.push_back(symdyn::subshift_distance(item.orbit, limit, horizon).value());
    bool strictly_decreasing = true;
    for (std::size_t i = 0; i + 1 < control.size(); ++i)
        if (!(control[i + 1] < control[i])) strictly_decreasing = false;

    RunStatus status = (bound_holds && strictly_decreasing) ? RunStatus::Ok
                                                            : RunStatus::InvariantViolation;

    ResultRecord rec = detail5::new_record(c);
    json resolved;
    resolved["max_period"] = max_period;
    resolved["alpha"] = alpha;
    resolved["approximants"] = count;
    resolved["dictionary_horizon"] = horizon;
    rec["resolved"] = resolved;
    rec["bound"] = best.distance.value();
    rec["best_word"] = symdyn::render(ab, best.best_word);
    rec["bound_holds"] = bound_holds;
    json rows = json::array();
    std::string csv = "q,dict_distance\n";
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        json row;
        row["p"] = list.items[i].p;
        row["q"] = list.items[i].q;
        row["dict_distance"] = control[i];
        rows.push_back(std::move(row));
        csv += std::to_string(list.items[i].q) + "," + detail::format_g17(control[i]) + "\n";
    }
    rec["control"] = std::move(rows);
    rec["control_strictly_decreasing"] = strictly_decreasing;
    rec["csv"] = csv;

    detail5::stamp(rec, timer, status);
    return {std::move(rec), status};
}

// --- groupoid identity battery ---------------------------------------------------

namespace detail5 {

inline double max_abs_diff(const groupoids::ArrowFunction& a, const groupoids::ArrowFunction& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

struct InvariantStat {
    std::string name;
    double tolerance = 0.0;
    long long checks = 0;
    long long failures = 0;
    double worst = 0.0;

    void note(double deviation) {
        ++checks;
        worst = std::max(worst, deviation);
        if (!(deviation <= tolerance)) ++failures;
    }
};

}  // namespace detail5

// Accumulators for the identity battery, one per invariant.  Tolerances are
// the groupoidlab constants; restriction and the quarter-turn magnetic
// cocycle are exact-zero checks.
struct BatteryStats {
    detail5::InvariantStat assoc{"convolution-associativity", groupoids::kAlgebraTol};
    detail5::InvariantStat invol{"star-involution", groupoids::kAlgebraTol};
    detail5::InvariantStat antihom{"star-antihomomorphism", groupoids::kAlgebraTol};
    detail5::InvariantStat cstar{"c-star-identity", groupoids::kNormTol};
    detail5::InvariantStat covar{"covariance", groupoids::kAlgebraTol};
    detail5::InvariantStat restr{"restriction-exactness", 0.0};
    detail5::InvariantStat specu{"spectrum-union", groupoids::kNormTol};
    detail5::InvariantStat twist{"coboundary-twist", groupoids::kNormTol};
    detail5::InvariantStat magnetic{"magnetic-half-flux", 0.0};

    std::vector<const detail5::InvariantStat*> all() const {
        return {&assoc, &invol, &antihom, &cstar, &covar, &restr, &specu, &twist, &magnetic};
    }

    long long total_failures() const {
        long long total = 0;
        for (const auto* s : all()) total += s->failures;
        return total;
    }
};

// One random groupoid + cocycle + element draw, pushed through every algebra
// identity.
inline void groupoid_battery_step(std::mt19937& rng, BatteryStats& stats) {
    using namespace groupoids;
    auto& [assoc, invol, antihom, cstar, covar, restr, specu, twist, magnetic] = stats;
    (void)magnetic;  // checked once per run, not per instance

    auto g = random_groupoid(rng);
    auto sigma = random_normalized_cocycle(g, rng);
    ArrowFunction f1 = random_arrow_function(g, rng);
    ArrowFunction f2 = random_arrow_function(g, rng);
    ArrowFunction f3 = random_arrow_function(g, rng);

    assoc.note(detail5::max_abs_diff(convolve(g, sigma, convolve(g, sigma, f1, f2), f3),
                                     convolve(g, sigma, f1, convolve(g, sigma, f2, f3))));
    invol.note(detail5::max_abs_diff(star(g, sigma, star(g, sigma, f1)), f1));
    antihom.note(detail5::max_abs_diff(star(g, sigma, convolve(g, sigma, f1, f2)),
                                       convolve(g, sigma, star(g, sigma, f2),
                                                star(g, sigma, f1))));
    double nf = reduced_norm(g, sigma, f1);
    cstar.note(std::abs(reduced_norm(g, sigma, convolve(g, sigma, star(g, sigma, f1), f1)) -
                        nf * nf));

    for (int x = 0; x < g.unit_count(); ++x)
        for (int y = x + 1; y < g.unit_count(); ++y) {
            if (g.orbit_of()[static_cast<std::size_t>(x)] !=
                g.orbit_of()[static_cast<std::size_t>(y)])
                continue;
            Eigen::JacobiSVD<Eigen::MatrixXcd> sx(left_regular(g, sigma, f1, x));
            Eigen::JacobiSVD<Eigen::MatrixXcd> sy(left_regular(g, sigma, f1, y));
            covar.note((sx.singularValues() - sy.singularValues()).cwiseAbs().maxCoeff());
        }

    for (const auto& s : invariant_subsets(g)) {
        auto res = restrict_groupoid(g, s.units);
        auto sub_sigma = restrict_cocycle(res, sigma);
        restr.note(detail5::max_abs_diff(
            restrict_function(res, convolve(g, sigma, f1, f2)),
            convolve(res.sub, sub_sigma, restrict_function(res, f1), restrict_function(res, f2))));
        restr.note(detail5::max_abs_diff(restrict_function(res, star(g, sigma, f1)),
                                         star(res.sub, sub_sigma, restrict_function(res, f1))));
    }

    ArrowFunction sa = random_self_adjoint(g, sigma, rng);
    auto via_orbits = spectrum_of_normal(g, sigma, sa, 1e-12);
    std::vector<double> all;
    for (int x = 0; x < g.unit_count(); ++x) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(left_regular(g, sigma, sa, x),
                                                           Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue iteration failed");
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            all.push_back(es.eigenvalues()(i));
    }
    specu.note(spectra::hausdorff_distance(via_orbits.real_points,
                                           spectra::CompactRealSet::from_points(all, 1e-12)));

    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::vector<cdouble> tau(static_cast<std::size_t>(g.arrow_count()));
    for (auto& t : tau) t = std::polar(1.0, angle(rng));
    for (int x = 0; x < g.unit_count(); ++x)
        tau[static_cast<std::size_t>(g.unit_arrow(x))] = cdouble(1.0, 0.0);
    auto dtau = coboundary(g, tau);
    auto twisted = Cocycle2::trivial(g);
    for (int a = 0; a < g.arrow_count(); ++a)
        for (int b = 0; b < g.arrow_count(); ++b)
            if (g.composable(a, b)) twisted.set(a, b, sigma(a, b) * dtau(a, b));
    if (!validate_cocycle(g, twisted).ok()) {
        twist.note(std::numeric_limits<double>::infinity());
    } else {
        ArrowFunction fadj = f1;
        for (int a = 0; a < g.arrow_count(); ++a)
            fadj[static_cast<std::size_t>(a)] *= std::conj(tau[static_cast<std::size_t>(a)]);
        twist.note(std::abs(reduced_norm(g, sigma, f1) - reduced_norm(g, twisted, fadj)));
    }
}

// Randomized identity battery over `count` instances plus one exact check of
// the quarter-turn magnetic cocycle on the order-two quotient.  Any failure
// is an invariant violation.
inline RunOutcome run_groupoid_selftest(const ExperimentConfig& c) {
    detail5::WallTimer timer;
    long long seed = c.get_int("seed", 1);
    long long count = c.get_int("count", 100);
    if (count < 1) throw std::invalid_argument("count must be >= 1");

    BatteryStats stats;
    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    for (long long t = 0; t < count; ++t) groupoid_battery_step(rng, stats);

    auto mc = schrodinger::cocycle_from_flux(M_PI, 2);
    if (!groupoids::validate_cocycle(mc.groupoid, mc.sigma).ok()) {
        stats.magnetic.note(std::numeric_limits<double>::infinity());
    } else {
        double worst = 0.0;
        const auto& g = mc.groupoid;
        for (int a = 0; a < g.arrow_count(); ++a)
            for (int b = 0; b < g.arrow_count(); ++b) {
                if (!g.composable(a, b)) continue;
                int ab = g.compose(a, b);
                for (int d = 0; d < g.arrow_count(); ++d) {
                    if (!g.composable(b, d)) continue;
                    worst = std::max(worst, std::abs(mc.sigma(a, b) * mc.sigma(ab, d) -
                                                     mc.sigma(a, g.compose(b, d)) *
                                                         mc.sigma(b, d)));
                }
            }
        stats.magnetic.note(worst);
    }

    ResultRecord rec = detail5::new_record(c);
    json resolved;
    resolved["seed"] = seed;
    resolved["count"] = count;
    rec["resolved"] = resolved;
    json rows = json::array();
    std::string csv = "invariant,checks,failures,worst,tolerance\n";
    for (const auto* s : stats.all()) {
        json row;
        row["name"] = s->name;
        row["checks"] = s->checks;
        row["failures"] = s->failures;
        row["worst"] = s->worst;
        row["tolerance"] = s->tolerance;
        rows.push_back(std::move(row));
        csv += s->name + "," + std::to_string(s->checks) + "," + std::to_string(s->failures) +
               "," + detail::format_g17(s->worst) + "," + detail::format_g17(s->tolerance) + "\n";
    }
    rec["invariants"] = std::move(rows);
    rec["total_failures"] = stats.total_failures();
    rec["csv"] = csv;

    RunStatus status =
        stats.total_failures() == 0 ? RunStatus::Ok : RunStatus::InvariantViolation;
    detail5::stamp(rec, timer, status);
    return {std::move(rec), status};
}

// --- dispatch ---------------------------------------------------------------------

inline RunOutcome run_experiment(const ExperimentConfig& c) {
    if (c.experiment == "bands") return run_bands(c);
    if (c.experiment == "converge") return run_converge(c);
    if (c.experiment == "p2check") return run_p2check(c);
    if (c.experiment == "butterfly") return run_butterfly(c);
    if (c.experiment == "counterexample") return run_counterexample(c);
    if (c.experiment == "groupoid-selftest") return run_groupoid_selftest(c);
    throw std::invalid_argument("unknown experiment '" + c.experiment + "'");
}

}  // namespace aqlab::harness
