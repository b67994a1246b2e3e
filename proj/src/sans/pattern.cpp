#include "prsans/sans/pattern.hpp"

#include <cmath>
#include <cstddef>

#include "json.hpp"
#include "prsans/errors.hpp"

namespace prsans::sans {

double sphere_form_factor(double u) {
    if (u < 0.0) throw ContractError("sphere_form_factor: negative argument");
    double a;
    if (u < 1e-4) {
        const double u2 = u * u;
        a = 1.0 - u2 / 10.0 + u2 * u2 / 280.0;
    } else {
        a = 3.0 * (std::sin(u) - u * std::cos(u)) / (u * u * u);
    }
    return a * a;
}

double guinier_porod_factor(double q, double rg, double m) {
    if (!(rg > 0.0)) throw ContractError("guinier_porod_factor: rg must be > 0");
    if (!(m > 0.0)) throw ContractError("guinier_porod_factor: exponent must be > 0");
    if (q < 0.0) throw ContractError("guinier_porod_factor: negative q");
    const double q1 = std::sqrt(1.5 * m) / rg;
    if (q <= q1) return std::exp(-q * q * rg * rg / 3.0);
    const double d = std::exp(-0.5 * m) * std::pow(q1, m);
    return d * std::pow(q, -m);
}

void FormFactorModel::validate() const {
    if (!(scale > 0.0)) throw ContractError("FormFactorModel: scale must be > 0");
    if (!(background >= 0.0)) throw ContractError("FormFactorModel: background must be >= 0");
    switch (kind) {
        case Kind::sphere:
            if (!(radius > 0.0)) throw ContractError("FormFactorModel: radius must be > 0");
            break;
        case Kind::guinier_porod:
            if (!(rg > 0.0)) throw ContractError("FormFactorModel: rg must be > 0");
            if (!(porod_exponent > 0.0))
                throw ContractError("FormFactorModel: porod_exponent must be > 0");
            break;
        case Kind::flat:
            break;
    }
}

double FormFactorModel::evaluate(double q) const {
    switch (kind) {
        case Kind::sphere:
            return scale * sphere_form_factor(q * radius) + background;
        case Kind::guinier_porod:
            return scale * guinier_porod_factor(q, rg, porod_exponent) + background;
        case Kind::flat:
            return scale + background;
    }
    throw ContractError("FormFactorModel: bad kind");
}

DetectorImage synth_clean_pattern(const FormFactorModel& model, const ScatteringGeometry& g) {
    model.validate();
    g.validate();
    DetectorImage img = make_image(g.width, g.height, 0.0f);
    img.beam_cx = g.beam_cx;
    img.beam_cy = g.beam_cy;
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < g.height; ++iy)
        for (int ix = 0; ix < g.width; ++ix)
            img.data[static_cast<std::size_t>(iy) * g.width + ix] =
                static_cast<float>(model.evaluate(q_at(g, ix, iy)));
    return img;
}

std::string FormFactorModel::to_json() const {
    nlohmann::json j;
    switch (kind) {
        case Kind::sphere:
            j["kind"] = "sphere";
            j["radius"] = radius;
            break;
        case Kind::guinier_porod:
            j["kind"] = "guinier_porod";
            j["rg"] = rg;
            j["porod_exponent"] = porod_exponent;
            break;
        case Kind::flat:
            j["kind"] = "flat";
            break;
    }
    j["scale"] = scale;
    j["background"] = background;
    return j.dump(2) + "\n";
}

FormFactorModel FormFactorModel::from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        FormFactorModel m;
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "sphere") {
            m.kind = Kind::sphere;
        } else if (kind == "guinier_porod") {
            m.kind = Kind::guinier_porod;
        } else if (kind == "flat") {
            m.kind = Kind::flat;
        } else {
            throw ConfigError("model.kind", "unknown form factor '" + kind + "'");
        }
        for (const auto& [key, value] : j.items()) {
            if (key == "kind") continue;
            if (key == "radius" && m.kind == Kind::sphere) {
                m.radius = value.get<double>();
            } else if (key == "rg" && m.kind == Kind::guinier_porod) {
                m.rg = value.get<double>();
            } else if (key == "porod_exponent" && m.kind == Kind::guinier_porod) {
                m.porod_exponent = value.get<double>();
            } else if (key == "scale") {
                m.scale = value.get<double>();
            } else if (key == "background") {
                m.background = value.get<double>();
            } else {
                throw ConfigError("model." + key, "unknown or misplaced key");
            }
        }
        m.validate();
        return m;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("model", e.what());
    }
}

}  // namespace prsans::sans
