#include "mdrnn/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "mdrnn/errors.hpp"

namespace mdrnn {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || value.empty())
        throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a number");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + value + "'");
}

std::string format_double(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

struct KeySpec {
    std::string name;
    std::string description;
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;  // (config, value, base_dir)
    std::function<std::string(const RunConfig&)> get;
};

#define MDRNN_SIZE_KEY(key, field, text)                                                                       \
    KeySpec{key, text, [](RunConfig& c, const std::string& v, const std::string&) {                           \
                c.field = parse_number<std::size_t>(key, v);                                                   \
            },                                                                                                 \
            [](const RunConfig& c) { return std::to_string(c.field); }}
#define MDRNN_REAL_KEY(key, field, text)                                                                       \
    KeySpec{key, text, [](RunConfig& c, const std::string& v, const std::string&) {                           \
                c.field = parse_number<double>(key, v);                                                        \
            },                                                                                                 \
            [](const RunConfig& c) { return format_double(c.field); }}
#define MDRNN_BOOL_KEY(key, field, text)                                                                       \
    KeySpec{key, text, [](RunConfig& c, const std::string& v, const std::string&) { c.field = parse_bool(key, v); }, \
            [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }}
#define MDRNN_PATH_KEY(key, field, text)                                                                       \
    KeySpec{key, text, [](RunConfig& c, const std::string& v, const std::string& base) {                      \
                c.field = resolve(base, v);                                                                    \
            },                                                                                                 \
            [](const RunConfig& c) { return c.field; }}

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = {
        KeySpec{"task", "mnist_pixels or labelmap",
                [](RunConfig& c, const std::string& v, const std::string&) {
                    if (v == "mnist_pixels")
                        c.task = Task::mnist_pixels;
                    else if (v == "labelmap")
                        c.task = Task::labelmap;
                    else
                        throw ConfigError("config key 'task': expected mnist_pixels or labelmap, got '" + v + "'");
                },
                [](const RunConfig& c) { return std::string(c.task == Task::mnist_pixels ? "mnist_pixels" : "labelmap"); }},
        MDRNN_PATH_KEY("images", images, "IDX image file (mnist_pixels)"),
        MDRNN_PATH_KEY("labels", labels, "IDX label file (mnist_pixels)"),
        MDRNN_SIZE_KEY("limit", limit, "images read from the IDX file, 0 for all"),
        MDRNN_SIZE_KEY("train_size", train_size, "training images drawn by the seeded split"),
        MDRNN_SIZE_KEY("validation_size", validation_size, "validation images drawn by the seeded split"),
        MDRNN_SIZE_KEY("test_size", test_size, "test images drawn by the seeded split"),
        MDRNN_REAL_KEY("threshold", threshold, "pixels above this intensity belong to the digit"),
        MDRNN_PATH_KEY("train_list", train_list, "list of `image labelmap` pairs (labelmap)"),
        MDRNN_PATH_KEY("validation_list", validation_list, "validation pair list (labelmap)"),
        MDRNN_PATH_KEY("test_list", test_list, "optional test pair list (labelmap)"),
        MDRNN_PATH_KEY("palette", palette, "`class R G B` colour table (labelmap)"),
        KeySpec{"layer", "hidden layer kind: tanh or lstm",
                [](RunConfig& c, const std::string& v, const std::string&) {
                    c.network.layer_kind = parse_layer_kind(v);
                },
                [](const RunConfig& c) { return to_string(c.network.layer_kind); }},
        MDRNN_SIZE_KEY("dims", network.num_dims, "number of grid dimensions"),
        MDRNN_SIZE_KEY("hidden", network.hidden_size, "hidden units or memory blocks per direction"),
        MDRNN_SIZE_KEY("cells", network.cells_per_block, "memory cells per block"),
        MDRNN_SIZE_KEY("num_classes", network.num_classes, "output classes (fixed to 11 for mnist_pixels)"),
        MDRNN_BOOL_KEY("multidirectional", network.multidirectional, "one layer per scan direction"),
        MDRNN_REAL_KEY("learning_rate", train.learning_rate, "gradient descent step size"),
        MDRNN_REAL_KEY("momentum", train.momentum, "momentum coefficient"),
        MDRNN_SIZE_KEY("max_epochs", train.max_epochs, "upper bound on training epochs"),
        MDRNN_SIZE_KEY("patience", train.patience, "epochs without validation improvement before stopping"),
        MDRNN_BOOL_KEY("shuffle", train.shuffle, "shuffle the training order every epoch"),
        MDRNN_REAL_KEY("gradient_clip", train.gradient_clip, "element-wise gradient clip, 0 disables"),
        MDRNN_SIZE_KEY("workers", train.workers, "threads for validation passes"),
        MDRNN_REAL_KEY("target_train_error", train.target_train_error,
                       "stop once training pixel error falls below this, 0 disables"),
        MDRNN_REAL_KEY("init_range", init_range, "weights start uniform in [-init_range, init_range]"),
        KeySpec{"seed", "seed for weights, split and shuffling",
                [](RunConfig& c, const std::string& v, const std::string&) {
                    c.seed = parse_number<std::uint64_t>("seed", v);
                },
                [](const RunConfig& c) { return std::to_string(c.seed); }},
        MDRNN_BOOL_KEY("record_time", record_time, "write wall-clock seconds into the training log"),
        KeySpec{"output_dir", "directory receiving every run artifact",
                [](RunConfig& c, const std::string& v, const std::string&) { c.output_dir = v; },
                [](const RunConfig& c) { return c.output_dir; }},
    };
    return specs;
}

#undef MDRNN_SIZE_KEY
#undef MDRNN_REAL_KEY
#undef MDRNN_BOOL_KEY
#undef MDRNN_PATH_KEY

void require_file(const std::string& key, const std::string& path) {
    if (path.empty()) throw ConfigError("config key '" + key + "' is required");
    if (!std::filesystem::exists(path)) throw DataError(key + ": no such file: " + path);
}

}  // namespace

void RunConfig::validate() const {
    network.validate();
    train.validate();
    if (!(init_range >= 0.0)) throw ConfigError("init_range must be non-negative");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
    if (task == Task::mnist_pixels) {
        if (network.num_dims != 2) throw ConfigError("mnist_pixels needs dims = 2");
        if (network.input_width != 1 || network.num_classes != kDigitTaskClasses)
            throw ConfigError("mnist_pixels needs 11 output classes");
        if (images.empty() || labels.empty()) throw ConfigError("mnist_pixels needs images and labels");
        if (train_size == 0 || validation_size == 0)
            throw ConfigError("mnist_pixels needs positive train_size and validation_size");
    } else {
        if (network.input_width != 3) throw ConfigError("labelmap inputs have three channels");
        if (train_list.empty() || validation_list.empty() || palette.empty())
            throw ConfigError("labelmap needs train_list, validation_list and palette");
    }
}

KeyValues parse_key_values(const std::string& text) {
    KeyValues out;
    std::istringstream in(text);
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
        if (!out.emplace(key, trim(line.substr(eq + 1))).second)
            throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
    return out;
}

void apply_overrides(KeyValues& base, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || trim(o.substr(0, eq)).empty())
            throw ConfigError("override must look like key=value, got '" + o + "'");
        base[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
    }
}

RunConfig run_config_from(const KeyValues& keys, const std::string& base_dir) {
    const auto& specs = key_specs();
    RunConfig config;
    for (const auto& [key, value] : keys) {
        const auto it = std::find_if(specs.begin(), specs.end(), [&](const KeySpec& s) { return s.name == key; });
        if (it == specs.end()) throw ConfigError("unknown config key '" + key + "'");
        it->set(config, value, base_dir);
    }
    config.train.rng_seed = config.seed;
    if (config.task == Task::mnist_pixels) {
        config.network.input_width = 1;
        if (!keys.count("num_classes")) config.network.num_classes = kDigitTaskClasses;
    } else {
        config.network.input_width = 3;
    }
    config.validate();
    return config;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    KeyValues keys = parse_key_values(text.str());
    apply_overrides(keys, overrides);
    return run_config_from(keys, std::filesystem::path(path).parent_path().string());
}

std::string to_text(const RunConfig& config) {
    std::ostringstream out;
    for (const auto& spec : key_specs()) out << spec.name << " = " << spec.get(config) << '\n';
    return out.str();
}

std::vector<std::pair<std::string, std::string>> config_keys() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& spec : key_specs()) out.emplace_back(spec.name, spec.description);
    return out;
}

void check_paths(const RunConfig& config) {
    if (config.task == Task::mnist_pixels) {
        require_file("images", config.images);
        require_file("labels", config.labels);
    } else {
        require_file("train_list", config.train_list);
        require_file("validation_list", config.validation_list);
        require_file("palette", config.palette);
        if (!config.test_list.empty()) require_file("test_list", config.test_list);
    }
}

RunData load_run_data(const RunConfig& config) {
    check_paths(config);
    RunData data;
    if (config.task == Task::mnist_pixels) {
        const Dataset all = load_mnist_pixel_task(config.images, config.labels, config.threshold, config.limit);
        auto parts = split(all, {config.train_size, config.validation_size, config.test_size}, config.seed);
        data.train = std::move(parts[0]);
        data.validation = std::move(parts[1]);
        data.test = std::move(parts[2]);
    } else {
        const Palette palette = load_palette(config.palette);
        for (const auto& entry : palette)
            if (entry.class_index >= config.network.num_classes)
                throw ConfigError("palette class " + std::to_string(entry.class_index) + " exceeds num_classes");
        data.train = load_labelmap_dataset(config.train_list, palette);
        data.validation = load_labelmap_dataset(config.validation_list, palette);
        if (!config.test_list.empty()) data.test = load_labelmap_dataset(config.test_list, palette);
        // the palette may name fewer classes than the network predicts
        for (Dataset* set : {&data.train, &data.validation, &data.test})
            for (Sample& s : *set) {
                const auto labels = s.labels.labels();
                s.labels = LabelGrid(s.labels.shape(), config.network.num_classes, {labels.begin(), labels.end()});
            }
    }
    return data;
}

}  // namespace mdrnn
