#include "prsans/image_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "prsans/errors.hpp"

static_assert(std::endian::native == std::endian::little, "little-endian host assumed");

namespace prsans {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'S', 'A', 'N', 'S', 'I', 'M'};
constexpr std::uint32_t kVersion = 1;

using json = nlohmann::json;

// Mask as alternating run lengths, first run counts valid pixels.
json mask_to_rle(const std::vector<std::uint8_t>& mask) {
    json rle = json::array();
    std::uint8_t cur = 1;
    std::size_t run = 0;
    for (std::uint8_t m : mask) {
        const std::uint8_t v = (m != 0);
        if (v == cur) {
            ++run;
        } else {
            rle.push_back(run);
            cur = v;
            run = 1;
        }
    }
    rle.push_back(run);
    return rle;
}

std::vector<std::uint8_t> rle_to_mask(const json& rle, std::size_t n) {
    std::vector<std::uint8_t> mask;
    mask.reserve(n);
    std::uint8_t cur = 1;
    for (const auto& item : rle) {
        if (!item.is_number_unsigned() && !item.is_number_integer())
            throw ImageIoError(ImageIoCode::bad_header, "mask_rle entries must be integers");
        const long long run = item.get<long long>();
        if (run < 0) throw ImageIoError(ImageIoCode::bad_header, "negative mask run");
        mask.insert(mask.end(), static_cast<std::size_t>(run), cur);
        cur = cur ? 0 : 1;
    }
    if (mask.size() != n)
        throw ImageIoError(ImageIoCode::bad_header, "mask runs do not cover the image");
    return mask;
}

}  // namespace

void write_image(const std::string& path, const DetectorImage& img) {
    // non-finite gets its typed code even though validate() would also trip
    for (float v : img.data)
        if (!std::isfinite(v))
            throw ImageIoError(ImageIoCode::non_finite, "refusing to write non-finite pixel");
    img.validate();

    json header;
    header["width"] = img.width;
    header["height"] = img.height;
    header["beam_center"] = {img.beam_cx, img.beam_cy};
    if (img.acq_time) header["acq_time"] = *img.acq_time;
    if (!img.mask.empty()) header["mask_rle"] = mask_to_rle(img.mask);
    if (img.norm_scale) {
        header["norm"] = {{"scale", *img.norm_scale}, {"offset", img.norm_offset.value_or(0.0)}};
    }
    const std::string hdr = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError(path, "cannot open for writing");
    out.write(kMagic, 8);
    const std::uint32_t ver = kVersion;
    const std::uint32_t hlen = static_cast<std::uint32_t>(hdr.size());
    out.write(reinterpret_cast<const char*>(&ver), 4);
    out.write(reinterpret_cast<const char*>(&hlen), 4);
    out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size() * sizeof(float)));
    if (!out) throw FileError(path, "write failed");
}

DetectorImage read_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError(path, "cannot open for reading");

    char magic[8];
    std::uint32_t ver = 0, hlen = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&ver), 4);
    in.read(reinterpret_cast<char*>(&hlen), 4);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ImageIoError(ImageIoCode::bad_magic, "not a detector image file: " + path);
    if (ver != kVersion)
        throw ImageIoError(ImageIoCode::bad_version,
                           "unsupported format version " + std::to_string(ver));

    std::string hdr(hlen, '\0');
    in.read(hdr.data(), hlen);
    if (!in) throw ImageIoError(ImageIoCode::bad_header, "truncated header");

    json header;
    try {
        header = json::parse(hdr);
    } catch (const json::parse_error& e) {
        throw ImageIoError(ImageIoCode::bad_header, std::string("header parse error: ") + e.what());
    }

    DetectorImage img;
    try {
        img.width = header.at("width").get<int>();
        img.height = header.at("height").get<int>();
        const auto& bc = header.at("beam_center");
        img.beam_cx = bc.at(0).get<double>();
        img.beam_cy = bc.at(1).get<double>();
        if (header.contains("acq_time")) img.acq_time = header["acq_time"].get<double>();
        if (header.contains("norm")) {
            img.norm_scale = header["norm"].at("scale").get<double>();
            img.norm_offset = header["norm"].at("offset").get<double>();
        }
    } catch (const json::exception& e) {
        throw ImageIoError(ImageIoCode::bad_header, std::string("bad header field: ") + e.what());
    }
    if (img.width < 1 || img.height < 1)
        throw ImageIoError(ImageIoCode::dimension_mismatch, "non-positive dimensions in header");

    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    if (header.contains("mask_rle")) img.mask = rle_to_mask(header["mask_rle"], n);

    img.data.resize(n);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != n * sizeof(float))
        throw ImageIoError(ImageIoCode::payload_size_mismatch,
                           "payload shorter than header dimensions declare");
    // trailing bytes also violate the declared dimensions
    char extra;
    if (in.read(&extra, 1))
        throw ImageIoError(ImageIoCode::payload_size_mismatch,
                           "payload longer than header dimensions declare");
    for (std::size_t i = 0; i < n; ++i) {
        if (img.valid_at(i) && !std::isfinite(img.data[i]))
            throw ImageIoError(ImageIoCode::non_finite, "non-finite pixel in payload");
    }
    return img;
}

}  // namespace prsans
