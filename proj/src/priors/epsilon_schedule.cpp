#include "prsans/priors/epsilon_schedule.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>

#include "prsans/errors.hpp"

namespace prsans::priors {

namespace {

double parse_number(const std::string& tok, const char* what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw ConfigError("schedule", std::string("bad ") + what + " '" + tok + "'");
    }
    if (pos != tok.size())
        throw ConfigError("schedule", std::string("bad ") + what + " '" + tok + "'");
    if (!std::isfinite(v)) throw ConfigError("schedule", std::string(what) + " must be finite");
    return v;
}

}  // namespace

double EpsilonSchedule::at(int k) const {
    if (k < 0) throw ContractError("EpsilonSchedule::at: negative index");
    switch (rule) {
        case Rule::zero:
            return 0.0;
        case Rule::constant:
            return c;
        case Rule::power:
            return c / std::pow(static_cast<double>(k) + 1.0, p);
        case Rule::list:
            return static_cast<std::size_t>(k) < values.size() ? values[static_cast<std::size_t>(k)]
                                                               : 0.0;
    }
    throw ContractError("EpsilonSchedule::at: bad rule");
}

bool EpsilonSchedule::square_summable() const {
    switch (rule) {
        case Rule::zero:
            return true;
        case Rule::constant:
            return c == 0.0;
        case Rule::power:
            return c == 0.0 || p > 0.5;
        case Rule::list:
            return true;
    }
    throw ContractError("EpsilonSchedule::square_summable: bad rule");
}

std::string EpsilonSchedule::str() const {
    std::ostringstream os;
    switch (rule) {
        case Rule::zero:
            return "zero";
        case Rule::constant:
            os << "const:" << c;
            return os.str();
        case Rule::power:
            os << "pow:" << c << ":" << p;
            return os.str();
        case Rule::list:
            os << "list:";
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (i) os << ",";
                os << values[i];
            }
            return os.str();
    }
    throw ContractError("EpsilonSchedule::str: bad rule");
}

EpsilonSchedule EpsilonSchedule::parse(const std::string& text) {
    if (text == "zero") return zero();
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (colon == std::string::npos || colon + 1 == text.size())
        throw ConfigError("schedule", "unrecognized schedule '" + text + "'");
    const std::string rest = text.substr(colon + 1);
    if (head == "const") return constant(parse_number(rest, "constant"));
    if (head == "pow") {
        const auto sep = rest.find(':');
        if (sep == std::string::npos || sep + 1 == rest.size())
            throw ConfigError("schedule", "pow needs two parameters in '" + text + "'");
        return power(parse_number(rest.substr(0, sep), "coefficient"),
                     parse_number(rest.substr(sep + 1), "exponent"));
    }
    if (head == "list") {
        std::vector<double> vals;
        std::size_t start = 0;
        while (start <= rest.size()) {
            auto comma = rest.find(',', start);
            if (comma == std::string::npos) comma = rest.size();
            vals.push_back(parse_number(rest.substr(start, comma - start), "list entry"));
            start = comma + 1;
        }
        return list(std::move(vals));
    }
    throw ConfigError("schedule", "unrecognized schedule '" + text + "'");
}

EpsilonSchedule EpsilonSchedule::constant(double c) {
    if (c < 0.0) throw ConfigError("schedule", "constant level must be >= 0");
    EpsilonSchedule s;
    s.rule = Rule::constant;
    s.c = c;
    return s;
}

EpsilonSchedule EpsilonSchedule::power(double c, double p) {
    if (c < 0.0) throw ConfigError("schedule", "power coefficient must be >= 0");
    if (p < 0.0) throw ConfigError("schedule", "power exponent must be >= 0");
    EpsilonSchedule s;
    s.rule = Rule::power;
    s.c = c;
    s.p = p;
    return s;
}

EpsilonSchedule EpsilonSchedule::list(std::vector<double> values) {
    for (double v : values)
        if (v < 0.0) throw ConfigError("schedule", "list entries must be >= 0");
    EpsilonSchedule s;
    s.rule = Rule::list;
    s.values = std::move(values);
    return s;
}

}  // namespace prsans::priors
