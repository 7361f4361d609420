#pragma once

// Structured text records for subshift descriptions:
// {alphabet, kind, parameters}, with words rendered as label strings.

#include <json.hpp>

#include "aqlab/symdyn.hpp"

namespace aqlab::symdyn {

namespace detail2 {

inline nlohmann::ordered_json configuration_record(const Configuration& c) {
    nlohmann::ordered_json j;
    const Alphabet& a = c.alphabet();
    switch (c.kind()) {
    case Configuration::Kind::Periodic:
        j["kind"] = "periodic";
        j["word"] = render(a, c.periodic_word());
        break;
    case Configuration::Kind::Mechanical:
        j["kind"] = "mechanical";
        j["alpha"] = c.mech_alpha();
        j["theta"] = c.mech_theta();
        break;
    case Configuration::Kind::MechanicalRational:
        j["kind"] = "mechanical-rational";
        j["p"] = c.mech_p();
        j["q"] = c.mech_q();
        j["theta_num"] = c.mech_theta_num();
        break;
    case Configuration::Kind::Splice:
        j["kind"] = "splice";
        j["left"] = a.label(c.splice_left());
        j["right"] = a.label(c.splice_right());
        break;
    case Configuration::Kind::SubstitutionFix: {
        j["kind"] = "substitution";
        nlohmann::ordered_json rules;
        for (int s = 0; s < a.size(); ++s)
            rules[a.label(s)] = render(a, c.substitution().rules[static_cast<std::size_t>(s)]);
        j["rules"] = rules;
        j["seed"] = a.label(c.substitution_seed());
        break;
    }
    }
    j["offset"] = c.offset();
    return j;
}

inline Configuration configuration_from_record(const Alphabet& a, const nlohmann::ordered_json& j) {
    std::string kind = j.at("kind").get<std::string>();
    long long offset = j.value("offset", 0LL);
    if (kind == "periodic")
        return Configuration::periodic(a, parse_word(a, j.at("word").get<std::string>()))
            .translated(offset);
    if (kind == "mechanical")
        return Configuration::mechanical(j.at("alpha").get<double>(), j.at("theta").get<double>())
            .translated(offset);
    if (kind == "mechanical-rational")
        return Configuration::mechanical_rational(j.at("p").get<long long>(),
                                                  j.at("q").get<long long>(),
                                                  j.at("theta_num").get<long long>())
            .translated(offset);
    if (kind == "splice")
        return Configuration::splice(a, a.symbol_of(j.at("left").get<std::string>()),
                                     a.symbol_of(j.at("right").get<std::string>()))
            .translated(offset);
    if (kind == "substitution") {
        std::vector<Word> rules(static_cast<std::size_t>(a.size()));
        for (int s = 0; s < a.size(); ++s)
            rules[static_cast<std::size_t>(s)] =
                parse_word(a, j.at("rules").at(a.label(s)).get<std::string>());
        return Configuration::substitution_fixed_point(Substitution(a, std::move(rules)),
                                                       a.symbol_of(j.at("seed").get<std::string>()))
            .translated(offset);
    }
    throw std::invalid_argument("unknown configuration kind '" + kind + "'");
}

} // namespace detail2

inline nlohmann::ordered_json to_record(const Subshift& s) {
    nlohmann::ordered_json j;
    std::vector<std::string> labels;
    for (int i = 0; i < s.alphabet().size(); ++i) labels.push_back(s.alphabet().label(i));
    j["alphabet"] = labels;
    if (s.kind() == Subshift::Kind::FullShift) {
        j["kind"] = "full-shift";
        j["parameters"] = nlohmann::ordered_json::object();
    } else {
        j["kind"] = "orbit-closure";
        nlohmann::ordered_json gens = nlohmann::ordered_json::array();
        for (const auto& g : s.representatives()) gens.push_back(detail2::configuration_record(g));
        j["parameters"] = nlohmann::ordered_json{{"generators", gens}};
    }
    return j;
}

inline Subshift subshift_from_record(const nlohmann::ordered_json& j) {
    std::vector<std::string> labels;
    for (const auto& l : j.at("alphabet")) labels.push_back(l.get<std::string>());
    Alphabet a(labels);
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "full-shift") return Subshift::full_shift(a);
    if (kind == "orbit-closure") {
        std::vector<Configuration> gens;
        for (const auto& g : j.at("parameters").at("generators"))
            gens.push_back(detail2::configuration_from_record(a, g));
        return Subshift::orbit_closure(std::move(gens));
    }
    throw std::invalid_argument("unknown subshift kind '" + kind + "'");
}

inline std::string to_record_text(const Subshift& s) { return to_record(s).dump(2); }

inline Subshift subshift_from_record_text(const std::string& text) {
    return subshift_from_record(nlohmann::ordered_json::parse(text));
}

} // namespace aqlab::symdyn
