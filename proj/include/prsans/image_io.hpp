#pragma once

#include <string>

#include "prsans/detector_image.hpp"

namespace prsans {

// On-disk frame format, version 1:
//   bytes  0..7   magic "PRSANSIM"
//   bytes  8..11  u32 LE version
//   bytes 12..15  u32 LE JSON header length
//   JSON header   dims, beam center, acq_time, mask RLE, normalization
//   payload       width*height little-endian f32, row-major
// Round-trip is bit-exact for every finite payload.

void write_image(const std::string& path, const DetectorImage& img);
DetectorImage read_image(const std::string& path);

}  // namespace prsans
