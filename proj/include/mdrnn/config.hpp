#pragma once

// Run configuration: a flat `key = value` text file plus command-line overrides.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mdrnn/dataset.hpp"
#include "mdrnn/network.hpp"
#include "mdrnn/train.hpp"

namespace mdrnn {

enum class Task { mnist_pixels, labelmap };

struct RunConfig {
    Task task = Task::mnist_pixels;

    // mnist_pixels: one IDX pair, split into train / validation / test by seed
    std::string images;
    std::string labels;
    std::size_t limit = 0;  ///< images read from the file; 0 reads all
    std::size_t train_size = 0;
    std::size_t validation_size = 0;
    std::size_t test_size = 0;
    double threshold = 0.0;

    // labelmap: list files of `image labelmap` lines and a palette
    std::string train_list;
    std::string validation_list;
    std::string test_list;
    std::string palette;

    NetworkConfig network;
    TrainConfig train;
    double init_range = 0.1;
    std::uint64_t seed = 0;  ///< weight init, split and shuffle seed
    bool record_time = false;
    std::string output_dir = "run";

    void validate() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment. Throws ConfigError naming
/// the line for malformed or duplicate keys.
KeyValues parse_key_values(const std::string& text);

/// Applies "key=value" strings on top of `base`.
void apply_overrides(KeyValues& base, const std::vector<std::string>& overrides);

/// Builds a config from keys. Relative paths resolve against `base_dir`.
/// Throws ConfigError for unknown keys or bad values.
RunConfig run_config_from(const KeyValues& keys, const std::string& base_dir = "");

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical text form; parsing it again yields the same config.
std::string to_text(const RunConfig& config);

/// Every key accepted by run_config_from, with a one-line description.
std::vector<std::pair<std::string, std::string>> config_keys();

/// Throws DataError naming the first referenced path that does not exist.
void check_paths(const RunConfig& config);

struct RunData {
    Dataset train;
    Dataset validation;
    Dataset test;
};

RunData load_run_data(const RunConfig& config);

}  // namespace mdrnn
