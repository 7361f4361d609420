// Command-line front end: one verb per experiment driver, flags layered over
// an optional configuration file, results written as a JSON record plus a
// CSV table in the output directory.  Exit code is the run status (0 ok,
// 1 invariant violation, 2 certificate degradation) or 64 for unusable
// configuration.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "aqlab/harness.hpp"

namespace {

using aqlab::harness::ResultRecord;

const char* describe(const std::string& verb) {
    if (verb == "bands") return "band spectrum of one periodic configuration";
    if (verb == "butterfly") return "Hofstadter spectra over a flux list, with continuity table";
    if (verb == "converge") return "spectra along mechanical convergents vs the limit subshift";
    if (verb == "counterexample") return "splice-junction obstruction to periodic approximation";
    if (verb == "groupoid-selftest") return "randomized groupoid algebra identity battery";
    return "degree-two polynomial norm continuity along convergents";
}

void print_intervals(std::ostream& os, const nlohmann::ordered_json& set) {
    for (const auto& iv : set) os << " [" << iv[0].get<double>() << ", " << iv[1].get<double>() << "]";
}

// Key figures only; distances appear through their pre-rendered display
// strings, so an under-certified value prints as an interval here too.
void print_summary(const ResultRecord& rec, std::ostream& os) {
    const std::string verb = rec.at("experiment").get<std::string>();
    if (verb == "bands") {
        os << "spectrum:";
        print_intervals(os, rec.at("set"));
        os << "\n";
        const auto& cert = rec.at("certificate");
        os << "certificate: grid " << cert.at("grid").get<int>() << ", edge error "
           << cert.at("edge_error").get<double>()
           << (cert.at("budget_exhausted").get<bool>() ? " (budget exhausted)" : "") << "\n";
        if (rec.contains("gluing_deviation"))
            os << "gluing deviation over " << rec.at("gluing_cells").get<long long>()
               << " cells: " << rec.at("gluing_deviation").get<double>() << "\n";
    } else if (verb == "converge") {
        for (const auto& row : rec.at("to_finest"))
            os << "q=" << row.at("q").get<long long>() << ": dictionary "
               << row.at("dict_to_limit").get<double>() << ", spectral to finest "
               << row.at("display").get<std::string>() << "\n";
    } else if (verb == "p2check") {
        for (const auto& entry : rec.at("polynomials")) {
            bool all_ok = true;
            for (const auto& pair : entry.at("pairs"))
                all_ok = all_ok && pair.at("ok").get<bool>();
            os << "p = " << entry.at("poly").get<std::string>() << ": consistency "
               << (all_ok ? "holds" : "VIOLATED") << ", norms";
            for (const auto& n : entry.at("norms")) os << " " << n.get<double>();
            os << "\n";
        }
    } else if (verb == "butterfly") {
        os << "fluxes: " << rec.at("fluxes").size() << "\n";
        for (const auto& row : rec.at("continuity"))
            os << row.at("from").get<std::string>() << " -> " << row.at("to").get<std::string>()
               << ": " << row.at("display").get<std::string>() << "\n";
    } else if (verb == "counterexample") {
        os << "distance to the nearest periodic orbit (period <= "
           << rec.at("resolved").at("max_period").get<int>() << "): "
           << rec.at("bound").get<double>() << " at '" << rec.at("best_word").get<std::string>()
           << "', bound " << (rec.at("bound_holds").get<bool>() ? "holds" : "VIOLATED") << "\n";
        os << "control distances strictly decreasing: "
           << (rec.at("control_strictly_decreasing").get<bool>() ? "yes" : "NO") << "\n";
    } else {
        for (const auto& row : rec.at("invariants"))
            os << row.at("name").get<std::string>() << ": "
               << row.at("checks").get<long long>() << " checks, "
               << row.at("failures").get<long long>() << " failures, worst "
               << row.at("worst").get<double>() << "\n";
    }
    os << "status: " << rec.at("status").get<std::string>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral laboratory over subshifts and finite groupoids", "aqlab"};
    app.require_subcommand(1);

    std::optional<std::string> config_path, out_flag, format_flag;
    std::optional<long long> seed;
    std::optional<int> grid;
    std::optional<double> tol;

    for (const std::string& verb : aqlab::harness::known_experiments()) {
        CLI::App* sub = app.add_subcommand(verb, describe(verb));
        sub->add_option("--config", config_path, "configuration file (aqlab-config-v1)");
        sub->add_option("--out", out_flag, "output directory (default: $AQLAB_OUT, then .)");
        sub->add_option("--seed", seed, "random seed for randomized suites");
        sub->add_option("--grid", grid, "momentum samples per axis");
        sub->add_option("--tol", tol, "band-edge refinement tolerance");
        sub->add_option("--format", format_flag, "table output format")
            ->check(CLI::IsMember({"csv", "json"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints the message or the requested help
        return code == 0 ? 0 : 64;
    }
    const std::string verb = app.get_subcommands().front()->get_name();

    try {
        aqlab::harness::ExperimentConfig config;
        if (config_path) config = aqlab::harness::config_from_file(*config_path);
        aqlab::harness::set_entry(config, "experiment", verb);
        if (seed) aqlab::harness::set_entry(config, "seed", std::to_string(*seed));
        if (grid) aqlab::harness::set_entry(config, "grid", std::to_string(*grid));
        if (tol) aqlab::harness::set_entry(config, "tol", aqlab::detail::format_g17(*tol));
        if (format_flag) aqlab::harness::set_entry(config, "format", *format_flag);

        const std::string format = config.get("format", "csv");
        if (format != "csv" && format != "json")
            throw std::invalid_argument("format must be csv or json");
        std::string out_dir = out_flag ? *out_flag : config.get("out", "");
        if (out_dir.empty()) {
            const char* env = std::getenv("AQLAB_OUT");
            out_dir = env && *env ? env : ".";
        }

        aqlab::harness::RunOutcome outcome = aqlab::harness::run_experiment(config);

        std::filesystem::create_directories(out_dir);
        const std::filesystem::path base(out_dir);
        const auto record_path = base / (verb + "-record.json");
        aqlab::harness::write_text_file(record_path.string(), outcome.record.dump(2) + "\n");
        std::cout << "record: " << record_path.string() << "\n";
        if (format == "csv") {
            const auto table_path = base / (verb + "-table.csv");
            aqlab::harness::write_text_file(table_path.string(),
                                            outcome.record.at("csv").get<std::string>());
            std::cout << "table: " << table_path.string() << "\n";
        }
        print_summary(outcome.record, std::cout);
        return aqlab::harness::exit_code(outcome.status);
    } catch (const std::exception& e) {
        std::cerr << "aqlab: " << e.what() << "\n";
        return 64;
    }
}
