#pragma once

#include <msdet/errors.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace msdet {

/// Row-major sample raster: 3-channel 8-bit (RGB) or 1-channel 8/16-bit (IR).
/// Samples are stored widened to 16 bits; max_value() tells the real depth.
class Raster {
public:
    Raster(int width, int height, int channels, int bit_depth);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    int bit_depth() const { return bit_depth_; }
    std::uint16_t max_value() const { return bit_depth_ == 8 ? 255 : 65535; }

    std::uint16_t at(int x, int y, int c) const {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    void set(int x, int y, int c, std::uint16_t v) {
        data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c] = v;
    }

    const std::vector<std::uint16_t>& data() const { return data_; }
    std::vector<std::uint16_t>& data() { return data_; }

    bool operator==(const Raster& other) const = default;

private:
    int width_, height_, channels_, bit_depth_;
    std::vector<std::uint16_t> data_;
};

/// Reads a binary PPM (P6, 3-channel) or PGM (P5, 1-channel) file.
/// 16-bit PGM samples are big-endian per the format.
Raster read_raster(const std::string& path);

void write_raster(const Raster& raster, const std::string& path);

/// Serialized PPM/PGM bytes (what write_raster puts on disk).
std::string raster_to_bytes(const Raster& raster);

} // namespace msdet
