#include "mdrnn/raster.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

#include "mdrnn/errors.hpp"

namespace mdrnn {

namespace {

class HeaderReader {
public:
    HeaderReader(const std::vector<std::uint8_t>& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

    std::size_t number() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw DataError(path_ + ": malformed PNM header");
        std::size_t value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) value = value * 10 + (bytes_[pos_++] - '0');
        return value;
    }
    std::size_t position() const { return pos_; }
    void skip_single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw DataError(path_ + ": malformed PNM header");
        ++pos_;
    }
    void skip(std::size_t n) { pos_ += n; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    const std::string& path_;
    std::size_t pos_ = 0;
};

}  // namespace

Raster read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw DataError(path + ": not a binary PGM/PPM file");
    Raster r;
    r.channels = bytes[1] == '5' ? 1 : 3;
    HeaderReader header(bytes, path);
    header.skip(2);
    r.cols = header.number();
    r.rows = header.number();
    const std::size_t maxval = header.number();
    if (maxval != 255) throw DataError(path + ": only 8-bit rasters (maxval 255) are supported");
    header.skip_single_space();
    const std::size_t size = r.rows * r.cols * r.channels;
    if (r.rows == 0 || r.cols == 0) throw DataError(path + ": empty raster");
    if (bytes.size() - header.position() < size) throw DataError(path + ": raster data truncated");
    r.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header.position()),
                    bytes.begin() + static_cast<std::ptrdiff_t>(header.position() + size));
    return r;
}

void write_pnm(const std::string& path, const Raster& raster) {
    if (raster.channels != 1 && raster.channels != 3) throw ConfigError("rasters must have 1 or 3 channels");
    if (raster.pixels.size() != raster.rows * raster.cols * raster.channels)
        throw ConfigError("raster pixel count does not match its size");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << (raster.channels == 1 ? "P5" : "P6") << '\n' << raster.cols << ' ' << raster.rows << "\n255\n";
    out.write(reinterpret_cast<const char*>(raster.pixels.data()), static_cast<std::streamsize>(raster.pixels.size()));
    if (!out) throw DataError("failed writing " + path);
}

}  // namespace mdrnn
