#include "mdrnn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mdrnn/errors.hpp"
#include "mdrnn/metrics.hpp"

namespace mdrnn {

SequenceND input_gradient(const Network& net, const SequenceND& input, const Coord& point, std::size_t focus_class) {
    if (!input.shape().contains(point)) throw PreconditionError("focus point outside the input grid");
    if (focus_class >= net.config().num_classes)
        throw PreconditionError("focus class " + std::to_string(focus_class) + " out of range");
    const auto forward = network_forward(net, input);
    SequenceND deltas(input.shape(), net.config().num_classes);
    deltas.at(point)[focus_class] = 1.0;
    return backward_from_logits(net, input, forward, deltas, {});
}

JacobianMap jacobian(const Network& net, const SequenceND& input, const Coord& point, std::size_t focus_class) {
    const SequenceND grad = input_gradient(net, input, point, focus_class);
    JacobianMap map{input.shape(), std::vector<double>(input.point_count(), 0.0), point, focus_class};
    for (std::size_t p = 0; p < grad.point_count(); ++p)
        for (double g : grad.at(p)) map.values[p] += std::abs(g);
    return map;
}

UnitSelection parse_unit_selection(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) throw ConfigError("");
        std::size_t used = 0;
        const unsigned long d = std::stoul(text.substr(0, colon), &used);
        if (used != colon) throw ConfigError("");
        const std::string rest = text.substr(colon + 1);
        const unsigned long u = std::stoul(rest, &used);
        if (used != rest.size() || rest.empty() || rest[0] == '-' || text[0] == '-') throw ConfigError("");
        return {static_cast<std::uint32_t>(d), u};
    } catch (const std::exception&) {
        throw ConfigError("unit selection must look like direction:unit, got '" + text + "'");
    }
}

Raster to_grayscale(const Shape& shape, const std::vector<double>& values, double* min_out, double* max_out) {
    if (shape.rank() > 2) throw PreconditionError("only one- and two-dimensional grids can be rasterized");
    Raster r;
    r.rows = shape.rank() == 2 ? shape[0] : 1;
    r.cols = shape.rank() == 2 ? shape[1] : shape[0];
    r.channels = 1;
    r.pixels.assign(values.size(), 0);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double mn = values.empty() ? 0.0 : *lo, mx = values.empty() ? 0.0 : *hi;
    if (mx > mn)
        for (std::size_t p = 0; p < values.size(); ++p)
            r.pixels[p] = static_cast<std::uint8_t>(std::lround(255.0 * (values[p] - mn) / (mx - mn)));
    if (min_out) *min_out = mn;
    if (max_out) *max_out = mx;
    return r;
}

ActivationDump dump_activations(const Network& net, const SequenceND& input, const std::vector<UnitSelection>& units) {
    const auto& cfg = net.config();
    for (const auto& u : units) {
        if (u.direction >= cfg.direction_count())
            throw PreconditionError("direction " + std::to_string(u.direction) + " out of range");
        if (u.unit >= cfg.layer_output_width())
            throw PreconditionError("unit " + std::to_string(u.unit) + " out of range");
    }
    const auto forward = network_forward(net, input);
    ActivationDump dump;
    dump.shape = input.shape();
    const std::size_t points = input.point_count();
    for (const auto& u : units) {
        UnitImage image{u, std::vector<double>(points), 0.0, 0.0, {}};
        const auto& map = forward.maps[u.direction];
        // map[local] is the storage index of local point `local`
        for (std::size_t local = 0; local < points; ++local)
            image.values[map[local]] = layer_output(forward.tapes[u.direction], local)[u.unit];
        image.raster = to_grayscale(dump.shape, image.values, &image.min, &image.max);
        dump.units.push_back(std::move(image));
    }
    std::vector<double> classes(points);
    for (std::size_t p = 0; p < points; ++p) classes[p] = double(argmax(forward.probabilities.at(p)));
    dump.argmax = to_grayscale(dump.shape, classes);
    for (std::size_t p = 0; p < points; ++p) dump.argmax.pixels[p] = static_cast<std::uint8_t>(classes[p]);
    return dump;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!(out << text)) throw DataError("cannot write " + path);
}

}  // namespace

void write_jacobian(const std::string& stem, const JacobianMap& map) {
    double mn = 0.0, mx = 0.0;
    const Raster raster = to_grayscale(map.shape, map.values, &mn, &mx);
    write_pnm(stem + ".pgm", raster);
    std::ostringstream s;
    s << std::setprecision(17) << "focus_point = ";
    for (std::size_t i = 0; i < map.focus_point.rank(); ++i) s << (i ? "," : "") << map.focus_point[i];
    s << "\nfocus_class = " << map.focus_class << "\nshape = ";
    for (std::size_t i = 0; i < map.shape.rank(); ++i) s << (i ? "," : "") << map.shape[i];
    s << "\nmin = " << mn << "\nmax = " << mx << '\n';
    write_text(stem + ".txt", s.str());
}

void write_activation_dump(const std::string& directory, const ActivationDump& dump) {
    std::filesystem::create_directories(directory);
    std::ostringstream s;
    s << std::setprecision(17);
    for (const auto& image : dump.units) {
        const std::string name = "unit_d" + std::to_string(image.unit.direction) + "_u" + std::to_string(image.unit.unit);
        write_pnm(directory + "/" + name + ".pgm", image.raster);
        s << name << " min = " << image.min << " max = " << image.max << '\n';
    }
    write_pnm(directory + "/argmax.pgm", dump.argmax);
    write_text(directory + "/activations.txt", s.str());
}

}  // namespace mdrnn
