#include "prsans/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "prsans/errors.hpp"
#include "prsans/parallel.hpp"

namespace prsans {

namespace {

template <class GetRef, class GetEst, class Valid>
MetricsRecord metrics_impl(std::size_t n, GetRef ref, GetEst est, Valid valid) {
    const double m = deterministic_sum(n, [&](std::size_t i) { return valid(i) ? 1.0 : 0.0; });
    if (m == 0.0) throw ContractError("compute_metrics: no valid pixels");

    const double ref_sq =
        deterministic_sum(n, [&](std::size_t i) { return valid(i) ? ref(i) * ref(i) : 0.0; });
    const double diff_sq = deterministic_sum(n, [&](std::size_t i) {
        if (!valid(i)) return 0.0;
        const double d = ref(i) - est(i);
        return d * d;
    });
    const double abs_sum = deterministic_sum(n, [&](std::size_t i) {
        return valid(i) ? std::abs(ref(i) - est(i)) : 0.0;
    });

    if (ref_sq == 0.0) throw ContractError("compute_metrics: all-zero reference");

    MetricsRecord rec;
    rec.rmse = std::sqrt(diff_sq / m);
    rec.mae = abs_sum / m;
    rec.nmse = diff_sq / ref_sq;
    if (diff_sq == 0.0) {
        rec.snr_db = kSnrCapDb;
    } else {
        rec.snr_db = 10.0 * std::log10(ref_sq / diff_sq);
        if (rec.snr_db > kSnrCapDb) rec.snr_db = kSnrCapDb;
    }
    return rec;
}

}  // namespace

MetricsRecord compute_metrics(const DetectorImage& ref, const DetectorImage& est) {
    if (ref.width != est.width || ref.height != est.height)
        throw ContractError("compute_metrics: shape mismatch");
    if (ref.mask != est.mask) throw ContractError("compute_metrics: mask mismatch");
    return metrics_impl(
        ref.size(), [&](std::size_t i) { return static_cast<double>(ref.data[i]); },
        [&](std::size_t i) { return static_cast<double>(est.data[i]); },
        [&](std::size_t i) { return ref.valid_at(i); });
}

MetricsRecord compute_metrics(std::span<const double> ref, std::span<const double> est) {
    if (ref.size() != est.size()) throw ContractError("compute_metrics: shape mismatch");
    return metrics_impl(
        ref.size(), [&](std::size_t i) { return ref[i]; }, [&](std::size_t i) { return est[i]; },
        [](std::size_t) { return true; });
}

std::string metrics_to_csv(const MetricsRecord& rec) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "snr_db,rmse,nmse,mae\n%.6g,%.6g,%.6g,%.6g\n", rec.snr_db,
                  rec.rmse, rec.nmse, rec.mae);
    return buf;
}

}  // namespace prsans
