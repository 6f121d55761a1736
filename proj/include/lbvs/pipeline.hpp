#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lbvs/features.hpp"
#include "lbvs/fusion.hpp"
#include "lbvs/metrics.hpp"

namespace lbvs {

inline constexpr const char* kToolVersion = "0.1.0";

/// Command-line / configuration mistakes (exit code 1), as opposed to bad
/// input data (DataError, exit code 2).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything a pipeline run needs, bound from the TOML-style config file
/// plus command-line overrides (flags win; LBVS_OUTPUT_DIR beats both for
/// the output directory).
struct PipelineConfig {
    // paths
    std::string frames_dir;
    std::string features_dir;
    std::string fdm_dir;
    std::string saliency_dir;
    std::string fixation_log;
    std::string model_file;
    std::string output_dir = "out";

    double frame_rate = 30.0;

    ViewingGeometry geometry;

    RandomForestParams rf;
    bool rf_use_coordinates = false;

    double frame_fraction = 0.1;
    int pixel_stride = 1;

    std::string jnd_variant = "mantiuk-piecewise";
    std::string csf_variant = "daly-bandpass";
    std::string flow_engine = "block-matching";
    std::string fusion_method = "rf";

    int emd_grid = 32;
    double metric_epsilon = 1e-12;

    bool fdm_duration_weighted = false;

    ChannelParams channels;

    std::vector<std::string> train_sequences;
    std::vector<std::string> validation_sequences;

    int jobs = 0;  // 0 = hardware parallelism

    /// Unknown keys from the config file / --set flags are rejected here.
    void apply(const std::string& key, const std::string& value);
    void validate() const;
    /// Canonical key=value rendering (stable order) used for hashing.
    std::string canonical() const;
};

/// Parses `key = value` lines with optional [section] headers and '#'
/// comments; section names prefix keys ("[rf]" + "trees" -> "rf.trees").
PipelineConfig load_config(const std::string& path);
void apply_overrides(PipelineConfig& config, const std::vector<std::string>& key_values);

/// FNV-1a 64 hex digest (config hashes and input checksums in manifests).
std::string fnv1a_hex(const std::string& bytes);
std::string file_checksum(const std::string& path);

/// Sorted frame stems ("frame_000042") for files matching `<stem><suffix>`.
std::vector<std::string> list_stems(const std::string& dir, const std::string& suffix);

/// Writes <output_dir>/manifest.json with tool version, command, config hash
/// and input checksums.
void write_manifest(const PipelineConfig& config, const std::string& command,
                    const std::vector<std::string>& input_files,
                    const std::map<std::string, std::string>& extras = {});

// Subcommand bodies. Each reads/writes the artifacts documented in the
// README and throws DataError on bad input.
void run_extract_features(const PipelineConfig& config);
void run_make_fdm(const PipelineConfig& config);
void run_train(const PipelineConfig& config);
void run_predict(const PipelineConfig& config);
void run_fuse(const PipelineConfig& config);
void run_evaluate(const PipelineConfig& config);
void run_compare_fusions(const PipelineConfig& config);

/// Exit status: 0 ok, 1 usage, 2 data error, 3 internal error.
int dispatch(const std::string& command, const PipelineConfig& config);

// Shared loaders (also used by the acceptance suite).
std::vector<FeatureStack> load_feature_stacks(const std::string& dir,
                                              std::vector<std::string>* stems = nullptr);
std::vector<FixationDensityMap> load_fdms(const std::string& dir);
std::vector<std::vector<FixationPoint>> leave_one_out_pools(
    const std::vector<FixationDensityMap>& fdms);

/// Renders an evaluation report as CSV rows (one per frame plus a means row).
std::string report_to_csv(const EvaluationReport& report);

}  // namespace lbvs
