#include "prsans/sans/geometry.hpp"

#include <cmath>
#include <cstddef>

#include "json.hpp"
#include "prsans/errors.hpp"

namespace prsans::sans {

void ScatteringGeometry::validate() const {
    if (!(wavelength > 0.0)) throw ContractError("ScatteringGeometry: wavelength must be > 0");
    if (!(sample_detector_distance > 0.0))
        throw ContractError("ScatteringGeometry: distance must be > 0");
    if (!(pixel_pitch > 0.0)) throw ContractError("ScatteringGeometry: pixel_pitch must be > 0");
    if (width < 1 || height < 1) throw ContractError("ScatteringGeometry: bad detector dims");
    // Allow the beam center slightly off-detector (half-beamstop setups),
    // but not arbitrarily far.
    const double margin = 0.5 * std::max(width, height);
    if (beam_cx < -margin || beam_cx > width + margin || beam_cy < -margin ||
        beam_cy > height + margin)
        throw ContractError("ScatteringGeometry: beam center far outside detector");
}

double q_at(const ScatteringGeometry& g, int ix, int iy) {
    const double dx = (ix + 0.5) - g.beam_cx;
    const double dy = (iy + 0.5) - g.beam_cy;
    const double r = g.pixel_pitch * std::hypot(dx, dy);
    const double theta = 0.5 * std::atan(r / g.sample_detector_distance);
    return 4.0 * 3.14159265358979323846 / g.wavelength * std::sin(theta);
}

std::vector<double> q_map(const ScatteringGeometry& g) {
    g.validate();
    std::vector<double> q(static_cast<std::size_t>(g.width) * g.height);
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < g.height; ++iy)
        for (int ix = 0; ix < g.width; ++ix)
            q[static_cast<std::size_t>(iy) * g.width + ix] = q_at(g, ix, iy);
    return q;
}

std::string ScatteringGeometry::to_json() const {
    nlohmann::json j;
    j["wavelength"] = wavelength;
    j["sample_detector_distance"] = sample_detector_distance;
    j["pixel_pitch"] = pixel_pitch;
    j["width"] = width;
    j["height"] = height;
    j["beam_cx"] = beam_cx;
    j["beam_cy"] = beam_cy;
    return j.dump(2) + "\n";
}

ScatteringGeometry ScatteringGeometry::from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        ScatteringGeometry g;
        for (const auto& [key, value] : j.items()) {
            if (key == "wavelength") {
                g.wavelength = value.get<double>();
            } else if (key == "sample_detector_distance") {
                g.sample_detector_distance = value.get<double>();
            } else if (key == "pixel_pitch") {
                g.pixel_pitch = value.get<double>();
            } else if (key == "width") {
                g.width = value.get<int>();
            } else if (key == "height") {
                g.height = value.get<int>();
            } else if (key == "beam_cx") {
                g.beam_cx = value.get<double>();
            } else if (key == "beam_cy") {
                g.beam_cy = value.get<double>();
            } else {
                throw ConfigError("geometry." + key, "unknown key");
            }
        }
        g.validate();
        return g;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("geometry", e.what());
    }
}

}  // namespace prsans::sans
