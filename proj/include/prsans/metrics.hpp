#pragma once

#include <span>
#include <string>

#include "prsans/detector_image.hpp"

namespace prsans {

// Finite sentinel reported when est == ref exactly.
inline constexpr double kSnrCapDb = 300.0;

struct MetricsRecord {
    double snr_db = 0.0;
    double rmse = 0.0;
    double nmse = 0.0;
    double mae = 0.0;
};

// snr_db = 20 log10(||ref|| / ||ref-est||), capped; rmse = ||ref-est||/sqrt(m);
// nmse = ||ref-est||^2/||ref||^2; mae = mean |diff|. All over the m valid
// pixels. Shapes and masks must agree; an all-zero reference is rejected.
MetricsRecord compute_metrics(const DetectorImage& ref, const DetectorImage& est);
MetricsRecord compute_metrics(std::span<const double> ref, std::span<const double> est);

// Header `snr_db,rmse,nmse,mae` plus one row, 6 significant digits.
std::string metrics_to_csv(const MetricsRecord& rec);

}  // namespace prsans
