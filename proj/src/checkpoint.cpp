#include "mdrnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mdrnn/errors.hpp"

namespace mdrnn {

namespace {

constexpr char kMagic[8] = {'M', 'D', 'R', 'N', 'N', 'C', 'K', 'P'};

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void text(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }

    std::vector<std::uint8_t> out;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string text() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }
    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n)
            throw FormatError("checkpoint truncated at byte " + std::to_string(pos_));
    }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

std::string encode_metadata(const std::map<std::string, std::string>& metadata) {
    std::string out;
    for (const auto& [k, v] : metadata) out += k + "=" + v + "\n";
    return out;
}

std::map<std::string, std::string> decode_metadata(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("checkpoint metadata line without '='");
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    ckpt.config.validate();
    Writer w;
    w.out.insert(w.out.end(), std::begin(kMagic), std::end(kMagic));
    w.u32(kCheckpointVersion);
    const NetworkConfig& c = ckpt.config;
    w.u32(static_cast<std::uint32_t>(c.num_dims));
    w.u32(static_cast<std::uint32_t>(c.layer_kind));
    w.u32(static_cast<std::uint32_t>(c.input_width));
    w.u32(static_cast<std::uint32_t>(c.hidden_size));
    w.u32(static_cast<std::uint32_t>(c.cells_per_block));
    w.u32(static_cast<std::uint32_t>(c.num_classes));
    w.u32(c.multidirectional ? 1u : 0u);
    w.u64(ckpt.seed);
    w.text(ckpt.rng_state);
    w.text(encode_metadata(ckpt.metadata));
    w.u64(ckpt.params.size());
    for (double v : ckpt.params) w.f64(v);
    return std::move(w.out);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw FormatError("not a checkpoint file (bad magic)");
    Reader r(bytes);
    r.skip(sizeof(kMagic));
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");

    Checkpoint ckpt;
    NetworkConfig& c = ckpt.config;
    c.num_dims = r.u32();
    const std::uint32_t kind = r.u32();
    if (kind > 1) throw FormatError("checkpoint has unknown layer kind " + std::to_string(kind));
    c.layer_kind = static_cast<LayerKind>(kind);
    c.input_width = r.u32();
    c.hidden_size = r.u32();
    c.cells_per_block = r.u32();
    c.num_classes = r.u32();
    const std::uint32_t multi = r.u32();
    if (multi > 1) throw FormatError("checkpoint multidirectional flag must be 0 or 1");
    c.multidirectional = multi == 1;
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint holds an invalid network config: ") + e.what());
    }
    ckpt.seed = r.u64();
    ckpt.rng_state = r.text();
    ckpt.metadata = decode_metadata(r.text());

    const std::uint64_t count = r.u64();
    if (count != Network(c).parameter_count())
        throw FormatError("checkpoint parameter count " + std::to_string(count) + " does not match its config");
    if (r.remaining() != count * 8)
        throw FormatError(r.remaining() < count * 8 ? "checkpoint truncated in the parameter block"
                                                    : "checkpoint has trailing bytes");
    ckpt.params.resize(count);
    for (double& v : ckpt.params) v = r.f64();
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    const auto bytes = encode_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write checkpoint " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace mdrnn
