#include <msdet/raster.hpp>

#include <msdet/errors.hpp>
#include <msdet/io_util.hpp>

#include <cctype>
#include <sstream>

namespace msdet {

Raster::Raster(int width, int height, int channels, int bit_depth)
    : width_(width), height_(height), channels_(channels), bit_depth_(bit_depth) {
    if (width <= 0 || height <= 0) {
        throw ValidationError("raster dimensions must be positive");
    }
    if (channels != 1 && channels != 3) {
        throw ValidationError("raster must have 1 or 3 channels");
    }
    if (bit_depth != 8 && bit_depth != 16) {
        throw ValidationError("raster depth must be 8 or 16 bits");
    }
    if (bit_depth == 16 && channels != 1) {
        throw ValidationError("16-bit rasters must be single-channel");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, 0);
}

namespace {

// Reads the next ASCII integer in a PNM header, skipping whitespace and
// '#' comments.
int read_header_int(const std::string& bytes, std::size_t& pos, const std::string& path) {
    while (pos < bytes.size()) {
        const char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
        throw IoError("bad PNM header in " + path);
    }
    int value = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
        if (value > 100000000) {
            throw IoError("implausible PNM header value in " + path);
        }
        value = value * 10 + (bytes[pos] - '0');
        ++pos;
    }
    return value;
}

} // namespace

Raster read_raster(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw IoError("not a binary PGM/PPM file: " + path);
    }
    const int channels = bytes[1] == '6' ? 3 : 1;
    std::size_t pos = 2;
    const int width = read_header_int(bytes, pos, path);
    const int height = read_header_int(bytes, pos, path);
    const int maxval = read_header_int(bytes, pos, path);
    if (maxval != 255 && maxval != 65535) {
        throw IoError("unsupported PNM maxval " + std::to_string(maxval) + " in " + path);
    }
    if (maxval == 65535 && channels != 1) {
        throw IoError("16-bit PPM is not supported: " + path);
    }
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw IoError("bad PNM header in " + path);
    }
    ++pos; // single whitespace byte before the raster data

    Raster raster(width, height, channels, maxval == 255 ? 8 : 16);
    const std::size_t samples = raster.data().size();
    const std::size_t bytes_per_sample = maxval == 255 ? 1 : 2;
    if (bytes.size() - pos < samples * bytes_per_sample) {
        throw IoError("truncated raster data in " + path);
    }
    for (std::size_t i = 0; i < samples; ++i) {
        if (bytes_per_sample == 1) {
            raster.data()[i] = static_cast<std::uint8_t>(bytes[pos + i]);
        } else {
            const auto hi = static_cast<std::uint8_t>(bytes[pos + 2 * i]);
            const auto lo = static_cast<std::uint8_t>(bytes[pos + 2 * i + 1]);
            raster.data()[i] = static_cast<std::uint16_t>(hi << 8 | lo);
        }
    }
    return raster;
}

std::string raster_to_bytes(const Raster& raster) {
    std::ostringstream out;
    out << (raster.channels() == 3 ? "P6" : "P5") << "\n"
        << raster.width() << " " << raster.height() << "\n"
        << static_cast<int>(raster.max_value()) << "\n";
    std::string body;
    const std::size_t bytes_per_sample = raster.bit_depth() == 8 ? 1 : 2;
    body.reserve(raster.data().size() * bytes_per_sample);
    for (const std::uint16_t v : raster.data()) {
        if (bytes_per_sample == 1) {
            body.push_back(static_cast<char>(v & 0xFF));
        } else {
            body.push_back(static_cast<char>(v >> 8));
            body.push_back(static_cast<char>(v & 0xFF));
        }
    }
    return out.str() + body;
}

void write_raster(const Raster& raster, const std::string& path) {
    write_file_atomic(path, raster_to_bytes(raster));
}

} // namespace msdet
