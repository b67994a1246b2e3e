#include "prsans/sans/reduce.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>

#include "prsans/csv.hpp"
#include "prsans/errors.hpp"
#include "prsans/parallel.hpp"

namespace prsans::sans {

IQCurve azimuthal_average(const DetectorImage& img, const ScatteringGeometry& g, int n_bins,
                          Binning binning) {
    img.validate();
    g.validate();
    if (n_bins < 2) throw ContractError("azimuthal_average: n_bins must be >= 2");
    if (img.width != g.width || img.height != g.height)
        throw ContractError("azimuthal_average: image does not match geometry dims");

    const auto qm = q_map(g);
    const std::size_t n = qm.size();

    double qmin = std::numeric_limits<double>::infinity();
    double qmin_pos = std::numeric_limits<double>::infinity();
    double qmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (!img.valid_at(i)) continue;
        qmin = std::min(qmin, qm[i]);
        qmax = std::max(qmax, qm[i]);
        if (qm[i] > 0.0) qmin_pos = std::min(qmin_pos, qm[i]);
    }
    if (!std::isfinite(qmax)) throw ContractError("azimuthal_average: no valid pixels");

    const bool log_bins = binning == Binning::log;
    const double lo = log_bins ? qmin_pos : qmin;
    if (log_bins && !(lo > 0.0))
        throw ContractError("azimuthal_average: log binning needs positive Q");
    if (!(qmax > lo)) throw ContractError("azimuthal_average: degenerate Q range");

    const double l0 = log_bins ? std::log(lo) : lo;
    const double l1 = log_bins ? std::log(qmax) : qmax;
    const double w = (l1 - l0) / n_bins;

    auto bin_of = [&](std::size_t i) -> int {
        if (!img.valid_at(i)) return -1;
        const double q = qm[i];
        if (log_bins && q <= 0.0) return -1;
        const double c = log_bins ? std::log(q) : q;
        if (c < l0) return -1;
        int b = static_cast<int>((c - l0) / w);
        if (b >= n_bins) b = n_bins - 1;  // q == qmax lands on the top edge
        return b;
    };

    std::vector<double> sums;
    std::vector<long long> counts;
    deterministic_binned_sum(
        n, static_cast<std::size_t>(n_bins), bin_of,
        [&](std::size_t i) { return static_cast<double>(img.data[i]); }, sums, counts);

    IQCurve curve;
    curve.q_bins.resize(static_cast<std::size_t>(n_bins));
    curve.intensity.resize(static_cast<std::size_t>(n_bins));
    curve.pixel_count = counts;
    for (int b = 0; b < n_bins; ++b) {
        const double e0 = l0 + b * w;
        const double e1 = l0 + (b + 1) * w;
        const double center = 0.5 * (e0 + e1);
        curve.q_bins[static_cast<std::size_t>(b)] = log_bins ? std::exp(center) : center;
        curve.intensity[static_cast<std::size_t>(b)] =
            counts[static_cast<std::size_t>(b)] > 0
                ? sums[static_cast<std::size_t>(b)] / counts[static_cast<std::size_t>(b)]
                : std::numeric_limits<double>::quiet_NaN();
    }
    return curve;
}

std::string IQCurve::to_csv() const {
    std::ostringstream os;
    os << "q,intensity,pixel_count\n";
    for (std::size_t i = 0; i < q_bins.size(); ++i) {
        os << fmt_full(q_bins[i]) << ",";
        if (pixel_count[i] > 0) os << fmt_full(intensity[i]);
        os << "," << pixel_count[i] << "\n";
    }
    return os.str();
}

}  // namespace prsans::sans
