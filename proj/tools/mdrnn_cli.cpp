// mdrnn: train, evaluate and inspect multi-dimensional recurrent networks.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mdrnn/analysis.hpp"
#include "mdrnn/checkpoint.hpp"
#include "mdrnn/config.hpp"
#include "mdrnn/deform.hpp"
#include "mdrnn/errors.hpp"
#include "mdrnn/gradcheck.hpp"
#include "mdrnn/idx.hpp"
#include "mdrnn/metrics.hpp"
#include "mdrnn/train.hpp"

using namespace mdrnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!(out << text)) throw DataError("cannot write " + path);
}

// ---- dataset selection shared by eval, jacobian and activations ----

struct DataFlags {
    std::string images, labels, list, palette, config, split_name = "test";
    std::size_t limit = 0;
    double threshold = 0.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--images", images, "IDX image file");
        cmd->add_option("--labels", labels, "IDX label file");
        cmd->add_option("--limit", limit, "read at most this many images (0 = all)");
        cmd->add_option("--threshold", threshold, "foreground intensity threshold");
        cmd->add_option("--list", list, "list of `image labelmap` pairs");
        cmd->add_option("--palette", palette, "palette for --list");
        cmd->add_option("--config", config, "run config whose split to use");
        cmd->add_option("--split", split_name, "split of --config: train, validation or test")
            ->check(CLI::IsMember({"train", "validation", "test"}));
    }

    Dataset load() const {
        if (!config.empty()) {
            RunData data = load_run_data(load_run_config(config));
            if (split_name == "train") return data.train;
            if (split_name == "validation") return data.validation;
            return data.test;
        }
        if (!images.empty() || !labels.empty()) {
            if (images.empty() || labels.empty()) throw UsageError("--images and --labels go together");
            for (const auto& p : {images, labels})
                if (!std::filesystem::exists(p)) throw DataError("no such file: " + p);
            return load_mnist_pixel_task(images, labels, threshold, limit);
        }
        if (!list.empty()) {
            if (palette.empty()) throw UsageError("--list needs --palette");
            for (const auto& p : {list, palette})
                if (!std::filesystem::exists(p)) throw DataError("no such file: " + p);
            return load_labelmap_dataset(list, load_palette(palette));
        }
        throw UsageError("no dataset given: use --images/--labels, --list/--palette or --config");
    }
};

Checkpoint read_checkpoint(const std::string& path) {
    if (!std::filesystem::exists(path)) throw DataError("no such file: " + path);
    return load_checkpoint(path);
}

std::vector<std::size_t> parse_point(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        try {
            std::size_t used = 0;
            if (part.empty() || part[0] == '-') throw std::invalid_argument(part);
            out.push_back(std::stoul(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw UsageError("point must be comma-separated coordinates, got '" + text + "'");
        }
    }
    return out;
}

// ---- train ----

struct TrainFlags {
    std::string config;
    std::vector<std::string> overrides;
    std::string output;
};

std::map<std::string, std::string> checkpoint_metadata(const RunConfig& config, const std::string& role,
                                                       std::size_t epoch, double validation_error) {
    std::map<std::string, std::string> meta;
    meta["role"] = role;
    meta["epoch"] = std::to_string(epoch);
    std::ostringstream v;
    v << std::setprecision(17) << validation_error;
    meta["validation_pixel_error"] = v.str();
    const KeyValues keys = parse_key_values(to_text(config));
    // where the run was written is not a property of the model
    for (const auto& [k, value] : keys)
        if (k != "output_dir") meta["config." + k] = value;
    return meta;
}

int cmd_train(const TrainFlags& flags) {
    std::vector<std::string> overrides = flags.overrides;
    if (!flags.output.empty()) overrides.push_back("output_dir=" + flags.output);
    const RunConfig config = load_run_config(flags.config, overrides);
    const RunData data = load_run_data(config);

    std::filesystem::create_directories(config.output_dir);
    const std::filesystem::path out(config.output_dir);
    write_file((out / "config.txt").string(), to_text(config));

    Network net(config.network);
    initialize_uniform(net, config.seed, config.init_range);
    std::cerr << "training " << count_parameters(net).total << " weights on " << data.train.size()
              << " sequences, validating on " << data.validation.size() << '\n';

    std::ofstream log((out / "train.log").string(), std::ios::binary);
    if (!log) throw DataError("cannot write " + (out / "train.log").string());
    log << "epoch\ttrain_loss\ttrain_pixel_error\tvalidation_pixel_error\tseconds\n";
    const FitResult result = fit(
        net, data.train, data.validation, config.train,
        [&](const LogRecord& r) {
            log << format_log_record(r) << '\n' << std::flush;
            std::cerr << "epoch " << r.epoch << "  loss " << r.train_loss << "  train error " << r.train_pixel_error
                      << "  validation error " << r.validation_pixel_error << '\n';
        },
        config.record_time);

    Checkpoint best{config.network, config.seed, "", {}, {}};
    best.params.assign(result.best.params().begin(), result.best.params().end());
    best.metadata = checkpoint_metadata(config, "best", result.best_epoch, result.best_validation_error);
    save_checkpoint((out / "best.ckpt").string(), best);

    Checkpoint last{config.network, config.seed, result.rng_state, {}, {}};
    last.params.assign(result.final.params().begin(), result.final.params().end());
    const std::size_t epochs = result.log.size();
    last.metadata = checkpoint_metadata(config, "final", epochs, result.log.back().validation_pixel_error);
    save_checkpoint((out / "final.ckpt").string(), last);

    const EvalReport report = evaluate(result.best, data.validation, config.train.workers);
    write_file((out / "validation_report.txt").string(), report.to_key_value());
    if (!data.test.empty()) {
        const EvalReport test = evaluate(result.best, data.test, config.train.workers);
        write_file((out / "test_report.txt").string(), test.to_key_value());
    }
    std::cout << "best epoch = " << result.best_epoch << '\n' << report.to_key_value();
    return kExitOk;
}

// ---- eval ----

struct EvalFlags {
    std::string checkpoint;
    DataFlags data;
    std::string predictions, report, confusion;
    std::size_t workers = 1;
};

int cmd_eval(const EvalFlags& flags) {
    const Checkpoint ckpt = read_checkpoint(flags.checkpoint);
    const Network net = ckpt.network();
    const Dataset dataset = flags.data.load();
    const EvalReport report = evaluate(net, dataset, flags.workers);
    std::cout << report.to_key_value();
    if (!flags.report.empty()) write_file(flags.report, report.to_key_value());
    if (!flags.confusion.empty()) write_file(flags.confusion, report.confusion_csv());
    if (!flags.predictions.empty()) {
        std::ostringstream csv;
        csv << "id,target,predicted,pixel_errors,points\n";
        for (const auto& p : predict_images(net, dataset, flags.workers))
            csv << p.id << ',' << p.target << ',' << p.predicted << ',' << p.pixel_errors << ',' << p.points << '\n';
        write_file(flags.predictions, csv.str());
    }
    return kExitOk;
}

// ---- deform ----

struct DeformFlags {
    std::string input, output;
    double sigma = 4.0, alpha = 34.0;
    std::uint64_t seed = 0;
};

int cmd_deform(const DeformFlags& flags) {
    if (!std::filesystem::exists(flags.input)) throw DataError("no such file: " + flags.input);
    const IdxFile in = read_idx(flags.input);
    const IdxFile out = deform_idx(in, flags.sigma, flags.alpha, flags.seed);
    write_idx(flags.output, out);
    std::cout << "deformed " << (in.dims.empty() ? 0 : in.dims[0]) << " images into " << flags.output << '\n';
    return kExitOk;
}

// ---- jacobian and activations ----

struct AnalysisFlags {
    std::string checkpoint;
    DataFlags data;
    std::size_t index = 0;
    std::string point;
    std::size_t focus_class = 0;
    std::string output;
    std::vector<std::string> units;
};

Sample pick_sample(const AnalysisFlags& flags) {
    Dataset dataset = flags.data.load();
    if (flags.index >= dataset.size())
        throw UsageError("index " + std::to_string(flags.index) + " out of range for " +
                         std::to_string(dataset.size()) + " sequences");
    return std::move(dataset[flags.index]);
}

int cmd_jacobian(const AnalysisFlags& flags) {
    const Network net = read_checkpoint(flags.checkpoint).network();
    const Sample sample = pick_sample(flags);
    const Coord point(parse_point(flags.point));
    if (point.rank() != sample.input.shape().rank() || !sample.input.shape().contains(point))
        throw UsageError("point " + flags.point + " is outside the input grid");
    const JacobianMap map = jacobian(net, sample.input, point, flags.focus_class);
    const auto parent = std::filesystem::path(flags.output).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    write_jacobian(flags.output, map);
    std::cout << "wrote " << flags.output << ".pgm and " << flags.output << ".txt\n";
    return kExitOk;
}

int cmd_activations(const AnalysisFlags& flags) {
    const Network net = read_checkpoint(flags.checkpoint).network();
    const Sample sample = pick_sample(flags);
    std::vector<UnitSelection> units;
    for (const auto& u : flags.units) units.push_back(parse_unit_selection(u));
    write_activation_dump(flags.output, dump_activations(net, sample.input, units));
    std::cout << "wrote " << units.size() << " unit images to " << flags.output << '\n';
    return kExitOk;
}

// ---- inspect ----

struct InspectFlags {
    std::string checkpoint, config, preset;
};

int cmd_inspect(const InspectFlags& flags) {
    NetworkConfig net;
    long reference = -1;
    if (!flags.checkpoint.empty()) {
        const Checkpoint ckpt = read_checkpoint(flags.checkpoint);
        net = ckpt.config;
        std::cout << "seed = " << ckpt.seed << '\n';
        for (const auto& [k, v] : ckpt.metadata) std::cout << k << " = " << v << '\n';
    } else if (!flags.config.empty()) {
        net = load_run_config(flags.config).network;
    } else if (flags.preset == "mnist") {
        net = NetworkConfig{2, LayerKind::lstm, 1, 25, 1, 11, true};
        reference = 27511;
    } else if (flags.preset == "airfreight") {
        net = NetworkConfig{2, LayerKind::lstm, 3, 25, 1, 155, true};
        reference = 43257;
    } else {
        throw UsageError("inspect needs --checkpoint, --config or --preset");
    }
    net.validate();
    const ParameterCount count = count_parameters(net);
    std::cout << "dims = " << net.num_dims << "\nlayer = " << to_string(net.layer_kind)
              << "\ninput_width = " << net.input_width << "\nhidden = " << net.hidden_size
              << "\ncells = " << net.cells_per_block << "\nnum_classes = " << net.num_classes
              << "\ndirections = " << net.direction_count() << '\n';
    for (const auto& [name, size] : count.breakdown) std::cout << "weights." << name << " = " << size << '\n';
    std::cout << "weights.total = " << count.total << '\n';
    if (reference >= 0) {
        std::cout << "reference_total = " << reference << "\ndelta = " << static_cast<long>(count.total) - reference
                  << '\n';
    }
    return kExitOk;
}

// ---- gradcheck ----

struct GradcheckFlags {
    std::uint64_t seed = 0;
    bool corrupt = false;
    double tolerance = 1e-6;
    double step = 1e-5;
    std::vector<std::size_t> dims;
};

int cmd_gradcheck(const GradcheckFlags& flags) {
    GradcheckOptions options;
    options.seed = flags.seed;
    options.corrupt_weights = flags.corrupt;
    options.tolerance = flags.tolerance;
    options.step = flags.step;
    bool all_passed = true;
    double worst = 0.0;
    for (const auto& c : default_gradcheck_cases()) {
        if (!flags.dims.empty() &&
            std::find(flags.dims.begin(), flags.dims.end(), c.config.num_dims) == flags.dims.end())
            continue;
        const GradcheckReport report = run_gradcheck_case(c, options);
        std::cout << (report.passed ? "PASS " : "FAIL ") << report.name << "  max_rel_error "
                  << std::setprecision(3) << std::scientific << report.max_relative_error << std::defaultfloat << '\n';
        for (const auto& g : report.groups)
            std::cout << "    " << std::left << std::setw(28) << g.group << std::right << std::setw(6) << g.entries
                      << "  " << std::scientific << std::setprecision(3) << g.max_relative_error << std::defaultfloat
                      << '\n';
        all_passed = all_passed && report.passed;
        worst = std::max(worst, report.max_relative_error);
    }
    std::cout << "max relative error " << std::scientific << worst << " (tolerance " << flags.tolerance << ")\n";
    return all_passed ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-dimensional recurrent networks for grid labelling"};
    app.require_subcommand(1);

    TrainFlags train;
    auto* train_cmd = app.add_subcommand("train", "train a network from a run config");
    train_cmd->add_option("config", train.config, "run config file")->required();
    train_cmd->add_option("--set", train.overrides, "override a config key (key=value), repeatable");
    train_cmd->add_option("--output", train.output, "output directory (overrides output_dir)");

    EvalFlags eval;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("checkpoint", eval.checkpoint, "checkpoint file")->required();
    eval.data.add_to(eval_cmd);
    eval_cmd->add_option("--predictions", eval.predictions, "write per-sequence predictions CSV");
    eval_cmd->add_option("--report", eval.report, "write the report to a file");
    eval_cmd->add_option("--confusion", eval.confusion, "write the confusion matrix CSV");
    eval_cmd->add_option("--workers", eval.workers, "evaluation threads")->check(CLI::PositiveNumber);

    DeformFlags deform;
    auto* deform_cmd = app.add_subcommand("deform", "elastically distort every image of an IDX file");
    deform_cmd->add_option("input", deform.input, "input IDX images")->required();
    deform_cmd->add_option("output", deform.output, "output IDX images")->required();
    deform_cmd->add_option("--sigma", deform.sigma, "smoothing width in pixels");
    deform_cmd->add_option("--alpha", deform.alpha, "displacement scale in pixels");
    deform_cmd->add_option("--seed", deform.seed, "random seed");

    AnalysisFlags jac;
    auto* jac_cmd = app.add_subcommand("jacobian", "sensitivity of one output to every input point");
    jac_cmd->add_option("checkpoint", jac.checkpoint, "checkpoint file")->required();
    jac.data.add_to(jac_cmd);
    jac_cmd->add_option("--index", jac.index, "sequence index within the dataset");
    jac_cmd->add_option("--point", jac.point, "focus point, comma-separated coordinates")->required();
    jac_cmd->add_option("--class", jac.focus_class, "output class")->required();
    jac_cmd->add_option("--output", jac.output, "output stem; writes <stem>.pgm and <stem>.txt")->required();

    AnalysisFlags act;
    auto* act_cmd = app.add_subcommand("activations", "images of selected hidden units");
    act_cmd->add_option("checkpoint", act.checkpoint, "checkpoint file")->required();
    act.data.add_to(act_cmd);
    act_cmd->add_option("--index", act.index, "sequence index within the dataset");
    act_cmd->add_option("--unit", act.units, "direction:unit, repeatable")->required();
    act_cmd->add_option("--output", act.output, "output directory")->required();

    InspectFlags inspect;
    auto* inspect_cmd = app.add_subcommand("inspect", "report the configuration and weight counts");
    auto* ckpt_opt = inspect_cmd->add_option("--checkpoint", inspect.checkpoint, "checkpoint file");
    auto* cfg_opt = inspect_cmd->add_option("--config", inspect.config, "run config file");
    auto* preset_opt = inspect_cmd->add_option("--preset", inspect.preset, "mnist or airfreight")
                           ->check(CLI::IsMember({"mnist", "airfreight"}));
    ckpt_opt->excludes(cfg_opt)->excludes(preset_opt);
    cfg_opt->excludes(preset_opt);

    GradcheckFlags grad;
    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of every gradient");
    grad_cmd->add_option("--seed", grad.seed, "seed for weights, inputs and targets");
    grad_cmd->add_flag("--corrupt", grad.corrupt, "perturb the weights behind the analytic gradient (must fail)");
    grad_cmd->add_option("--tolerance", grad.tolerance, "maximum relative error");
    grad_cmd->add_option("--step", grad.step, "finite-difference step");
    grad_cmd->add_option("--dims", grad.dims, "only check these grid dimensionalities");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*train_cmd) return cmd_train(train);
        if (*eval_cmd) return cmd_eval(eval);
        if (*deform_cmd) return cmd_deform(deform);
        if (*jac_cmd) return cmd_jacobian(jac);
        if (*act_cmd) return cmd_activations(act);
        if (*inspect_cmd) return cmd_inspect(inspect);
        if (*grad_cmd) return cmd_gradcheck(grad);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const TrainingError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return kExitData;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitData;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "file error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
