#pragma once

#include <string>
#include <vector>

namespace prsans::priors {

// Per-call inexactness levels eps_0, eps_1, ... for a wrapped denoiser.
// Spec strings: "zero", "const:<c>", "pow:<c>:<p>" (c/(k+1)^p), and
// "list:<c0,c1,...>" which continues with zeros past the last entry.
struct EpsilonSchedule {
    enum class Rule { zero, constant, power, list };

    Rule rule = Rule::zero;
    double c = 0.0;
    double p = 1.0;
    std::vector<double> values;

    double at(int k) const;
    // Whether sum eps_k^2 is finite; this is the hypothesis the convergence
    // certificate needs, so it is decided from the rule, not sampled.
    bool square_summable() const;

    std::string str() const;
    static EpsilonSchedule parse(const std::string& text);

    static EpsilonSchedule zero() { return EpsilonSchedule{}; }
    static EpsilonSchedule constant(double c);
    static EpsilonSchedule power(double c, double p);
    static EpsilonSchedule list(std::vector<double> values);
};

}  // namespace prsans::priors
