#pragma once

#include <string>

#include "prsans/detector_image.hpp"
#include "prsans/sans/geometry.hpp"

namespace prsans::sans {

// Isotropic intensity models: pixel value = scale * P(Q) + background.
struct FormFactorModel {
    enum class Kind { sphere, guinier_porod, flat };
    Kind kind = Kind::sphere;
    double radius = 225.0;  // sphere radius, angstroms
    double rg = 80.0;       // radius of gyration, angstroms
    double porod_exponent = 4.0;
    double scale = 1.0;
    double background = 0.0;

    void validate() const;
    double evaluate(double q) const;  // scale * P(q) + background
    std::string to_json() const;
    static FormFactorModel from_json(const std::string& text);
};

// Monodisperse hard-sphere amplitude squared in u = QR:
// [3 (sin u - u cos u) / u^3]^2, P(0) = 1 by the series limit.
double sphere_form_factor(double u);

// Guinier regime exp(-q^2 Rg^2 / 3) matched to a q^-m Porod tail at
// q1 = sqrt(3 m / 2) / Rg (dimensionless prefactor chosen for C1
// continuity at q1, unit value at q = 0).
double guinier_porod_factor(double q, double rg, double m);

DetectorImage synth_clean_pattern(const FormFactorModel& model, const ScatteringGeometry& g);

}  // namespace prsans::sans
