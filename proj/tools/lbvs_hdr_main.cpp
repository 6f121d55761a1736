#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lbvs/pipeline.hpp"

namespace {

struct CliState {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value, applied in order
};

void add_common_options(CLI::App* sub, CliState& state) {
    sub->add_option("--config", state.config_path, "TOML-style key=value config file");
    sub->add_option("--set", state.overrides,
                    "override any config key (key=value, repeatable)");
    const auto forward = [&state, sub](const std::string& flag, const std::string& key,
                                       const std::string& help) {
        sub->add_option_function<std::string>(
            flag, [&state, key](const std::string& v) { state.overrides.push_back(key + "=" + v); },
            help);
    };
    forward("--frames-dir", "frames_dir", "directory of frame_*.pfm inputs");
    forward("--features-dir", "features_dir", "directory of extracted feature maps");
    forward("--fdm-dir", "fdm_dir", "directory of fixation density maps");
    forward("--saliency-dir", "saliency_dir", "directory of predicted saliency maps");
    forward("--fixation-log", "fixation_log", "CSV eye-tracking log");
    forward("--model", "model_file", "random forest model file (JSON)");
    forward("--output-dir", "output_dir", "output directory");
    forward("--frame-rate", "frame_rate", "video frame rate (fps)");
    forward("--method", "fusion.method", "fusion method (fuse subcommand)");
    forward("--seed", "rf.seed", "random forest seed");
    forward("--jobs", "jobs", "worker threads (0 = hardware)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LBVS-HDR: learning-based visual saliency for HDR video"};
    app.set_version_flag("--version", lbvs::kToolVersion);
    app.require_subcommand(1);

    CliState state;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"extract-features", "compute the four conspicuity maps per frame"},
        {"make-fdm", "build fixation density maps from an eye-tracking log"},
        {"train", "train the random forest fusion model"},
        {"predict", "predict saliency maps with a trained model"},
        {"fuse", "apply a fixed fusion baseline"},
        {"evaluate", "score saliency maps against fixation ground truth"},
        {"compare-fusions", "evaluate all eight fusion methods in one table"},
    };
    for (const auto& [name, help] : commands) add_common_options(app.add_subcommand(name, help), state);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        lbvs::PipelineConfig config;
        if (!state.config_path.empty()) config = lbvs::load_config(state.config_path);
        if (const char* env_out = std::getenv("LBVS_OUTPUT_DIR"); env_out && *env_out)
            config.output_dir = env_out;
        lbvs::apply_overrides(config, state.overrides);
        return lbvs::dispatch(app.get_subcommands().front()->get_name(), config);
    } catch (const lbvs::UsageError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const lbvs::DataError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
