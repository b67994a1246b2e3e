#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "prsans/csv.hpp"
#include "prsans/detector_image.hpp"
#include "prsans/errors.hpp"
#include "prsans/image_io.hpp"
#include "prsans/metrics.hpp"
#include "prsans/parallel.hpp"
#include "prsans/rng.hpp"

using namespace prsans;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void dump(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

DetectorImage random_image(int w, int h, std::uint64_t seed) {
    DetectorImage img = make_image(w, h);
    Rng rng(seed);
    for (auto& v : img.data) v = static_cast<float>(rng.uniform01() * 10.0);
    img.beam_cx = w / 2.0 + 0.25;
    img.beam_cy = h / 2.0 - 0.5;
    return img;
}

}  // namespace

TEST_CASE("metrics on a worked 2-pixel example") {
    const std::vector<double> ref{3.0, 4.0}, est{3.0, 3.0};
    const auto m = compute_metrics(ref, est);
    CHECK(m.snr_db == doctest::Approx(20.0 * std::log10(5.0)).epsilon(1e-12));
    CHECK(m.snr_db == doctest::Approx(13.9794).epsilon(1e-5));
    CHECK(m.rmse == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(m.nmse == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(m.mae == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("metrics identity case hits the cap") {
    const std::vector<double> v{1.0, 2.5, 0.25};
    const auto m = compute_metrics(v, v);
    CHECK(m.snr_db == kSnrCapDb);
    CHECK(m.rmse == 0.0);
    CHECK(m.nmse == 0.0);
    CHECK(m.mae == 0.0);
}

TEST_CASE("metrics are permutation equivariant") {
    Rng rng(41);
    std::vector<double> ref(257), est(257);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        ref[i] = rng.uniform01() + 0.1;
        est[i] = ref[i] + 0.05 * rng.normal();
    }
    std::vector<std::size_t> perm(ref.size());
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.next_u64() % i]);
    std::vector<double> pref(ref.size()), pest(ref.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        pref[i] = ref[perm[i]];
        pest[i] = est[perm[i]];
    }
    const auto a = compute_metrics(ref, est);
    const auto b = compute_metrics(pref, pest);
    CHECK(a.snr_db == doctest::Approx(b.snr_db).epsilon(1e-12));
    CHECK(a.rmse == doctest::Approx(b.rmse).epsilon(1e-12));
    CHECK(a.nmse == doctest::Approx(b.nmse).epsilon(1e-12));
    CHECK(a.mae == doctest::Approx(b.mae).epsilon(1e-12));
}

TEST_CASE("rmse and mae are symmetric, nmse and snr are not") {
    const std::vector<double> a{3.0, 4.0}, b{3.0, 3.0};
    const auto ab = compute_metrics(a, b);
    const auto ba = compute_metrics(b, a);
    CHECK(ab.rmse == ba.rmse);
    CHECK(ab.mae == ba.mae);
    CHECK(ab.nmse != ba.nmse);
    CHECK(ab.snr_db != ba.snr_db);
}

TEST_CASE("snr decreases as the perturbation grows") {
    Rng rng(7);
    std::vector<double> ref(64);
    for (auto& v : ref) v = rng.uniform01() + 0.5;
    auto u = rng.unit_vector(ref.size());
    double prev = kSnrCapDb + 1.0;
    for (double c : {0.05, 0.1, 0.4, 1.0, 3.0}) {
        std::vector<double> est(ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) est[i] = ref[i] + c * u[i];
        const double snr = compute_metrics(ref, est).snr_db;
        CHECK(snr < prev);
        prev = snr;
    }
}

TEST_CASE("masked pixels are excluded from metrics") {
    DetectorImage ref = random_image(4, 3, 10);
    DetectorImage est = ref;
    est.data[5] += 0.25f;
    const auto clean = compute_metrics(ref, est);

    ref.mask.assign(ref.size(), 1);
    est.mask = ref.mask;
    ref.mask[7] = 0;
    est.mask[7] = 0;
    est.data[7] = 1e6f;  // must not leak into any metric
    const auto masked = compute_metrics(ref, est);
    CHECK(masked.rmse == doctest::Approx(std::sqrt(clean.rmse * clean.rmse * 12.0 / 11.0))
                             .epsilon(1e-6));
    CHECK(masked.mae == doctest::Approx(clean.mae * 12.0 / 11.0).epsilon(1e-6));
}

TEST_CASE("metric preconditions are enforced") {
    const std::vector<double> zero{0.0, 0.0}, est{1.0, 1.0};
    CHECK_THROWS_AS((void)compute_metrics(zero, est), ContractError);
    CHECK_THROWS_AS((void)compute_metrics(std::vector<double>{1.0}, est), ContractError);

    DetectorImage a = random_image(3, 3, 1);
    DetectorImage b = a;
    b.mask.assign(b.size(), 1);
    b.mask[0] = 0;
    CHECK_THROWS_AS((void)compute_metrics(a, b), ContractError);
}

TEST_CASE("metrics csv uses the fixed header and 6 significant digits") {
    const auto m = compute_metrics(std::vector<double>{3.0, 4.0}, std::vector<double>{3.0, 3.0});
    const auto csv = metrics_to_csv(m);
    CHECK(csv.rfind("snr_db,rmse,nmse,mae\n", 0) == 0);
    CHECK(csv.find("13.9794") != std::string::npos);
    CHECK(csv.find("0.04") != std::string::npos);
}

TEST_CASE("image file round-trip is bit exact") {
    DetectorImage img = random_image(4, 4, 99);
    img.acq_time = 12.5;
    img.mask.assign(img.size(), 1);
    img.mask[3] = 0;
    img.mask[4] = 0;
    img.mask[15] = 0;
    img.norm_scale = 3.25;
    img.norm_offset = 0.0;

    const auto path = temp_file("prsans_roundtrip.prsi");
    write_image(path, img);
    const DetectorImage back = read_image(path);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.beam_cx == img.beam_cx);
    CHECK(back.beam_cy == img.beam_cy);
    CHECK(back.acq_time == img.acq_time);
    CHECK(back.mask == img.mask);
    CHECK(back.norm_scale == img.norm_scale);
    CHECK(back.norm_offset == img.norm_offset);
    REQUIRE(back.data.size() == img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == img.data[i]);

    // a second write of the same image produces identical bytes
    const auto path2 = temp_file("prsans_roundtrip2.prsi");
    write_image(path2, back);
    CHECK(slurp(path) == slurp(path2));
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("mask run-length encoding survives adversarial patterns") {
    DetectorImage img = make_image(8, 2, 1.0f);
    img.mask.assign(img.size(), 0);  // leading invalid run
    for (std::size_t i = 0; i < img.size(); i += 2) img.mask[i] = i % 4 == 0;
    const auto path = temp_file("prsans_mask.prsi");
    write_image(path, img);
    CHECK(read_image(path).mask == img.mask);
    std::remove(path.c_str());
}

TEST_CASE("image reader rejects malformed files with typed codes") {
    DetectorImage img = random_image(3, 3, 5);
    const auto path = temp_file("prsans_bad.prsi");
    write_image(path, img);
    const std::string good = slurp(path);

    SUBCASE("truncated payload") {
        dump(path, good.substr(0, good.size() - 4));
        try {
            (void)read_image(path);
            FAIL("expected ImageIoError");
        } catch (const ImageIoError& e) {
            CHECK(e.code() == ImageIoCode::payload_size_mismatch);
        }
    }
    SUBCASE("trailing bytes") {
        dump(path, good + std::string(3, '\0'));
        try {
            (void)read_image(path);
            FAIL("expected ImageIoError");
        } catch (const ImageIoError& e) {
            CHECK(e.code() == ImageIoCode::payload_size_mismatch);
        }
    }
    SUBCASE("corrupt magic") {
        std::string bad = good;
        bad[0] = 'X';
        dump(path, bad);
        try {
            (void)read_image(path);
            FAIL("expected ImageIoError");
        } catch (const ImageIoError& e) {
            CHECK(e.code() == ImageIoCode::bad_magic);
        }
    }
    SUBCASE("unsupported version") {
        std::string bad = good;
        bad[8] = 9;  // version u32 LE starts at byte 8
        dump(path, bad);
        try {
            (void)read_image(path);
            FAIL("expected ImageIoError");
        } catch (const ImageIoError& e) {
            CHECK(e.code() == ImageIoCode::bad_version);
        }
    }
    SUBCASE("non-finite payload value") {
        std::string bad = good;
        // overwrite the last f32 with a quiet NaN
        const char nan_bytes[4] = {0x00, 0x00, '\xc0', '\x7f'};
        bad.replace(bad.size() - 4, 4, nan_bytes, 4);
        dump(path, bad);
        try {
            (void)read_image(path);
            FAIL("expected ImageIoError");
        } catch (const ImageIoError& e) {
            CHECK(e.code() == ImageIoCode::non_finite);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("writer refuses non-finite pixels") {
    DetectorImage img = make_image(2, 2, 1.0f);
    img.data[2] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(write_image(temp_file("prsans_nan.prsi"), img), ImageIoError);
}

TEST_CASE("missing file raises FileError with the path") {
    try {
        (void)read_image("/nonexistent/prsans-no-such-file.prsi");
        FAIL("expected FileError");
    } catch (const FileError& e) {
        CHECK(e.path() == "/nonexistent/prsans-no-such-file.prsi");
    }
}

TEST_CASE("normalization rescales valid pixels to [0,1] and inverts") {
    DetectorImage img = random_image(6, 5, 17);
    img.mask.assign(img.size(), 1);
    img.mask[2] = 0;
    img.data[2] = 500.0f;  // invalid pixel must not set the scale
    const DetectorImage orig = img;

    normalize_inplace(img);
    REQUIRE(img.norm_scale.has_value());
    float mx = 0.0f;
    for (std::size_t i = 0; i < img.size(); ++i)
        if (img.valid_at(i)) mx = std::max(mx, img.data[i]);
    CHECK(mx == doctest::Approx(1.0).epsilon(1e-6));

    denormalize_inplace(img);
    CHECK_FALSE(img.norm_scale.has_value());
    for (std::size_t i = 0; i < img.size(); ++i)
        if (img.valid_at(i)) CHECK(img.data[i] == doctest::Approx(orig.data[i]).epsilon(1e-6));
    denormalize_inplace(img);  // second call is a no-op
    CHECK(img.data[5] == doctest::Approx(orig.data[5]).epsilon(1e-6));
}

TEST_CASE("rng streams are deterministic and substreams are independent") {
    Rng a(123), b(123), c(124);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    bool differs = false;
    Rng a2(123);
    for (int i = 0; i < 20; ++i) differs |= a2.next_u64() != c.next_u64();
    CHECK(differs);

    CHECK(substream_seed(5, "noise") != substream_seed(5, "init"));
    CHECK(substream_seed(5, "noise") != substream_seed(6, "noise"));
    CHECK(substream_seed(5, "noise") == substream_seed(5, "noise"));
    CHECK(substream_seed(5, std::uint64_t{0}) != substream_seed(5, std::uint64_t{1}));
}

TEST_CASE("rng normal and uniform moments are sane") {
    Rng rng(2024);
    const int n = 20000;
    double mean = 0.0, sq = 0.0, umin = 1.0, umax = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.normal();
        mean += g;
        sq += g * g;
        const double u = rng.uniform01();
        umin = std::min(umin, u);
        umax = std::max(umax, u);
    }
    mean /= n;
    sq /= n;
    CHECK(std::abs(mean) < 0.03);
    CHECK(sq == doctest::Approx(1.0).epsilon(0.05));
    CHECK(umin >= 0.0);
    CHECK(umax < 1.0);
}

TEST_CASE("unit vectors have exactly unit norm") {
    Rng rng(8);
    for (std::size_t dim : {1u, 2u, 7u, 100u}) {
        const auto u = rng.unit_vector(dim);
        double sq = 0.0;
        for (double v : u) sq += v * v;
        CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("deterministic reductions are stable and accurate") {
    const std::size_t n = 3 * kReduceBlock + 117;  // straddles block boundaries
    std::vector<double> vals(n);
    Rng rng(33);
    for (auto& v : vals) v = rng.normal();

    const double s1 = deterministic_sum(n, [&](std::size_t i) { return vals[i]; });
    const double s2 = deterministic_sum(n, [&](std::size_t i) { return vals[i]; });
    CHECK(s1 == s2);  // bitwise repeatable
    double naive = 0.0;
    for (double v : vals) naive += v;
    CHECK(s1 == doctest::Approx(naive).epsilon(1e-12));

    std::vector<double> sums;
    std::vector<long long> counts;
    deterministic_binned_sum(
        n, 5, [&](std::size_t i) { return static_cast<long long>(i % 7) - 1; },
        [&](std::size_t i) { return vals[i]; }, sums, counts);
    std::vector<double> ref_sums(5, 0.0);
    std::vector<long long> ref_counts(5, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const long long k = static_cast<long long>(i % 7) - 1;
        if (k < 0 || k >= 5) continue;  // out-of-range bins are skipped
        ref_sums[static_cast<std::size_t>(k)] += vals[i];
        ++ref_counts[static_cast<std::size_t>(k)];
    }
    CHECK(counts == ref_counts);
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(sums[k] == doctest::Approx(ref_sums[k]).epsilon(1e-12));
}

TEST_CASE("csv formatting round-trips and hashes content") {
    for (double v : {1.0 / 3.0, 0.1, 12345.678901234567, 5e-300, -2.5e17, 0.0}) {
        CHECK(std::stod(fmt_full(v)) == v);
    }
    CHECK(fmt_sig6(13.979400086720375) == "13.9794");
    CHECK(fmt_opt(std::nullopt).empty());
    CHECK(fmt_opt(2.0) == fmt_full(2.0));

    CHECK(content_hash_hex("abc") == content_hash_hex("abc"));
    CHECK(content_hash_hex("abc") != content_hash_hex("abd"));
    CHECK(content_hash_hex("").size() == 16);

    const auto path = temp_file("prsans_text.csv");
    write_text_file(path, "a,b\n1,2\n");
    CHECK(read_text_file(path) == "a,b\n1,2\n");
    std::remove(path.c_str());
}

TEST_CASE("image validate catches inconsistent shapes") {
    DetectorImage img = make_image(3, 2, 0.5f);
    img.data.pop_back();
    CHECK_THROWS_AS(img.validate(), ContractError);
    img = make_image(3, 2, 0.5f);
    img.mask.assign(2, 1);
    CHECK_THROWS_AS(img.validate(), ContractError);
    img = make_image(3, 2, 0.5f);
    img.acq_time = -1.0;
    CHECK_THROWS_AS(img.validate(), ContractError);
}
