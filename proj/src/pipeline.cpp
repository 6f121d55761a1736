#include "lbvs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lbvs/parallel.hpp"
#include "lbvs/pfm.hpp"
#include "lbvs/pgm.hpp"

namespace fs = std::filesystem;

namespace lbvs {

namespace {

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos;
        const double d = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return d;
    } catch (const std::exception&) {
        throw UsageError("config: '" + key + "' expects a number, got '" + value + "'");
    }
}

long to_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw UsageError("config: '" + key + "' expects an integer, got '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw UsageError("config: '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = strip(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += items[i];
    }
    return out;
}

fs::path ensure_output_dir(const PipelineConfig& config) {
    fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + config.output_dir + "'");
    return dir;
}

}  // namespace

void PipelineConfig::apply(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = strip(raw_key);
    const std::string value = unquote(strip(raw_value));
    if (key == "frames_dir") frames_dir = value;
    else if (key == "features_dir") features_dir = value;
    else if (key == "fdm_dir") fdm_dir = value;
    else if (key == "saliency_dir") saliency_dir = value;
    else if (key == "fixation_log") fixation_log = value;
    else if (key == "model_file") model_file = value;
    else if (key == "output_dir") output_dir = value;
    else if (key == "frame_rate") frame_rate = to_double(key, value);
    else if (key == "jobs") jobs = static_cast<int>(to_long(key, value));
    else if (key == "geometry.screen_width_m") geometry.screen_width_m = to_double(key, value);
    else if (key == "geometry.viewing_distance_m")
        geometry.viewing_distance_m = to_double(key, value);
    else if (key == "geometry.horizontal_resolution")
        geometry.horizontal_resolution = static_cast<int>(to_long(key, value));
    else if (key == "rf.trees") rf.num_trees = static_cast<int>(to_long(key, value));
    else if (key == "rf.bootstrap_ratio") rf.bootstrap_ratio = to_double(key, value);
    else if (key == "rf.min_leaf") rf.min_leaf_samples = static_cast<int>(to_long(key, value));
    else if (key == "rf.features_per_split")
        rf.features_per_split = static_cast<int>(to_long(key, value));
    else if (key == "rf.seed") rf.seed = static_cast<std::uint64_t>(to_long(key, value));
    else if (key == "rf.use_coordinates") rf_use_coordinates = to_bool(key, value);
    else if (key == "sampling.frame_fraction") frame_fraction = to_double(key, value);
    else if (key == "sampling.pixel_stride") pixel_stride = static_cast<int>(to_long(key, value));
    else if (key == "stages.jnd") jnd_variant = value;
    else if (key == "stages.csf") csf_variant = value;
    else if (key == "stages.flow") flow_engine = value;
    else if (key == "fusion.method") fusion_method = value;
    else if (key == "metrics.emd_grid") emd_grid = static_cast<int>(to_long(key, value));
    else if (key == "metrics.epsilon") metric_epsilon = to_double(key, value);
    else if (key == "fdm.duration_weighted") fdm_duration_weighted = to_bool(key, value);
    else if (key == "channels.pyramid_levels")
        channels.pyramid_levels = static_cast<int>(to_long(key, value));
    else if (key == "channels.block_size")
        channels.block_size = static_cast<int>(to_long(key, value));
    else if (key == "channels.search_radius")
        channels.search_radius = static_cast<int>(to_long(key, value));
    else if (key == "channels.gabor_wavelength")
        channels.gabor_wavelength_px = to_double(key, value);
    else if (key == "channels.gabor_sigma") channels.gabor_sigma_px = to_double(key, value);
    else if (key == "train_sequences") train_sequences = split_list(value);
    else if (key == "validation_sequences") validation_sequences = split_list(value);
    else
        throw UsageError("config: unknown key '" + key + "'");
}

void PipelineConfig::validate() const {
    if (!(frame_rate > 0.0)) throw UsageError("config: frame_rate must be > 0");
    if (rf.num_trees < 1) throw UsageError("config: rf.trees must be >= 1");
    if (!(rf.bootstrap_ratio > 0.0 && rf.bootstrap_ratio <= 1.0))
        throw UsageError("config: rf.bootstrap_ratio must be in (0,1]");
    if (rf.min_leaf_samples < 1) throw UsageError("config: rf.min_leaf must be >= 1");
    if (rf.features_per_split < 1 || rf.features_per_split > 6)
        throw UsageError("config: rf.features_per_split must be in [1,6]");
    if (!(frame_fraction > 0.0 && frame_fraction <= 1.0))
        throw UsageError("config: sampling.frame_fraction must be in (0,1]");
    if (pixel_stride < 1) throw UsageError("config: sampling.pixel_stride must be >= 1");
    if (emd_grid < 1 || emd_grid > 64)
        throw UsageError("config: metrics.emd_grid must be in [1,64]");
    if (!(metric_epsilon > 0.0)) throw UsageError("config: metrics.epsilon must be > 0");
    if (jobs < 0) throw UsageError("config: jobs must be >= 0");
    if (channels.pyramid_levels < 1) throw UsageError("config: channels.pyramid_levels must be >= 1");
    if (channels.block_size < 1 || channels.search_radius < 0)
        throw UsageError("config: invalid block matching parameters");
    jnd_variant_from_name(jnd_variant);
    csf_variant_from_name(csf_variant);
    if (flow_engine != "block-matching" && flow_engine != "none")
        throw UsageError("config: unknown flow engine '" + flow_engine + "'");
    fusion_kind_from_name(fusion_method);
}

std::string PipelineConfig::canonical() const {
    std::ostringstream out;
    out.precision(17);
    out << "frames_dir = " << frames_dir << "\n";
    out << "features_dir = " << features_dir << "\n";
    out << "fdm_dir = " << fdm_dir << "\n";
    out << "saliency_dir = " << saliency_dir << "\n";
    out << "fixation_log = " << fixation_log << "\n";
    out << "model_file = " << model_file << "\n";
    out << "output_dir = " << output_dir << "\n";
    out << "frame_rate = " << frame_rate << "\n";
    out << "jobs = " << jobs << "\n";
    out << "geometry.screen_width_m = " << geometry.screen_width_m << "\n";
    out << "geometry.viewing_distance_m = " << geometry.viewing_distance_m << "\n";
    out << "geometry.horizontal_resolution = " << geometry.horizontal_resolution << "\n";
    out << "rf.trees = " << rf.num_trees << "\n";
    out << "rf.bootstrap_ratio = " << rf.bootstrap_ratio << "\n";
    out << "rf.min_leaf = " << rf.min_leaf_samples << "\n";
    out << "rf.features_per_split = " << rf.features_per_split << "\n";
    out << "rf.seed = " << rf.seed << "\n";
    out << "rf.use_coordinates = " << (rf_use_coordinates ? "true" : "false") << "\n";
    out << "sampling.frame_fraction = " << frame_fraction << "\n";
    out << "sampling.pixel_stride = " << pixel_stride << "\n";
    out << "stages.jnd = " << jnd_variant << "\n";
    out << "stages.csf = " << csf_variant << "\n";
    out << "stages.flow = " << flow_engine << "\n";
    out << "fusion.method = " << fusion_method << "\n";
    out << "metrics.emd_grid = " << emd_grid << "\n";
    out << "metrics.epsilon = " << metric_epsilon << "\n";
    out << "fdm.duration_weighted = " << (fdm_duration_weighted ? "true" : "false") << "\n";
    out << "channels.pyramid_levels = " << channels.pyramid_levels << "\n";
    out << "channels.block_size = " << channels.block_size << "\n";
    out << "channels.search_radius = " << channels.search_radius << "\n";
    out << "channels.gabor_wavelength = " << channels.gabor_wavelength_px << "\n";
    out << "channels.gabor_sigma = " << channels.gabor_sigma_px << "\n";
    out << "train_sequences = " << join_list(train_sequences) << "\n";
    out << "validation_sequences = " << join_list(validation_sequences) << "\n";
    return out.str();
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file '" + path + "'");
    PipelineConfig config;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = strip(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[' && s.back() == ']') {
            section = strip(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = strip(s.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        config.apply(key, s.substr(eq + 1));
    }
    return config;
}

void apply_overrides(PipelineConfig& config, const std::vector<std::string>& key_values) {
    for (const std::string& kv : key_values) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw UsageError("--set expects key=value, got '" + kv + "'");
        config.apply(kv.substr(0, eq), kv.substr(eq + 1));
    }
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checksum: cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a_hex(bytes);
}

std::vector<std::string> list_stems(const std::string& dir, const std::string& suffix) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: '" + dir + "'");
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            stems.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(stems.begin(), stems.end());
    return stems;
}

void write_manifest(const PipelineConfig& config, const std::string& command,
                    const std::vector<std::string>& input_files,
                    const std::map<std::string, std::string>& extras) {
    const fs::path dir = ensure_output_dir(config);
    nlohmann::ordered_json doc;
    doc["tool_version"] = kToolVersion;
    doc["command"] = command;
    doc["config_hash"] = fnv1a_hex(config.canonical());
    nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
    for (const std::string& path : input_files)
        inputs.push_back({{"path", path}, {"fnv1a64", file_checksum(path)}});
    doc["inputs"] = std::move(inputs);
    for (const auto& [k, v] : extras) doc[k] = v;
    std::ofstream out(dir / "manifest.json");
    out << doc.dump(2) << "\n";
    if (!out) throw DataError("cannot write manifest in '" + config.output_dir + "'");
}

namespace {

std::vector<std::string> frame_paths(const PipelineConfig& config,
                                     std::vector<std::string>* stems_out = nullptr) {
    const auto stems = list_stems(config.frames_dir, ".pfm");
    if (stems.empty()) throw DataError("no .pfm frames found in '" + config.frames_dir + "'");
    std::vector<std::string> paths;
    paths.reserve(stems.size());
    for (const auto& stem : stems)
        paths.push_back((fs::path(config.frames_dir) / (stem + ".pfm")).string());
    if (stems_out) *stems_out = stems;
    return paths;
}

Field2D perceptual_luma(const HdrFrame& frame, const PipelineConfig& config) {
    return jnd_luma(luminance_of(frame), jnd_variant_from_name(config.jnd_variant));
}

FeatureStack extract_stack(const std::vector<std::string>& paths, std::size_t k,
                           const PipelineConfig& config, int* levels_used) {
    const HdrFrame frame = read_pfm(paths[k]);
    const Field2D luma = perceptual_luma(frame, config);
    const Field2D filtered =
        csf_filter(luma, config.geometry, csf_variant_from_name(config.csf_variant));
    const OpponentPair opponents = cam_opponents(frame);

    FeatureStack stack;
    stack.intensity = intensity_feature(filtered, config.channels, levels_used);
    stack.orientation = orientation_feature(filtered, config.channels);
    stack.color = color_feature(opponents, config.channels);
    if (k > 0 && config.flow_engine == "block-matching") {
        const Field2D prev = perceptual_luma(read_pfm(paths[k - 1]), config);
        stack.motion = motion_feature(&prev, luma, config.channels);
    } else {
        stack.motion = Field2D(frame.width, frame.height);
    }
    return stack;
}

/// The sequence directories a training-style command iterates: the
/// configured list, or the bare features/fdm dirs when no list is given.
std::vector<std::pair<std::string, std::string>> sequence_dirs(
    const PipelineConfig& config, const std::vector<std::string>& sequences) {
    std::vector<std::pair<std::string, std::string>> dirs;
    if (sequences.empty()) {
        dirs.emplace_back(config.features_dir, config.fdm_dir);
    } else {
        for (const auto& seq : sequences)
            dirs.emplace_back((fs::path(config.features_dir) / seq).string(),
                              (fs::path(config.fdm_dir) / seq).string());
    }
    return dirs;
}

std::vector<PixelSample> gather_samples(const PipelineConfig& config,
                                        const std::vector<std::string>& sequences,
                                        double frame_fraction, int pixel_stride) {
    const int num_features = config.rf_use_coordinates ? kNumFeatures + 2 : kNumFeatures;
    std::vector<PixelSample> samples;
    for (const auto& [feat_dir, fdm_dir] : sequence_dirs(config, sequences)) {
        const auto stacks = load_feature_stacks(feat_dir);
        const auto fdms = load_fdms(fdm_dir);
        if (stacks.size() != fdms.size())
            throw DataError("feature frame count " + std::to_string(stacks.size()) +
                            " != FDM frame count " + std::to_string(fdms.size()) + " for '" +
                            feat_dir + "'");
        std::vector<std::pair<const FeatureStack*, const FixationDensityMap*>> pairs;
        pairs.reserve(stacks.size());
        for (std::size_t i = 0; i < stacks.size(); ++i)
            pairs.emplace_back(&stacks[i], &fdms[i]);
        auto part = sample_pixels(pairs, frame_fraction, pixel_stride, config.rf.seed,
                                  num_features);
        samples.insert(samples.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
    }
    return samples;
}

std::string model_path(const PipelineConfig& config) {
    if (!config.model_file.empty()) return config.model_file;
    return (fs::path(config.output_dir) / "model.json").string();
}

FusionMethod make_method(const PipelineConfig& config, const std::string& name,
                         const RandomForestModel* model,
                         const std::array<double, 4>* lms_weights) {
    const FusionKind kind = fusion_kind_from_name(name);
    switch (kind) {
        case FusionKind::RandomForest:
            if (!model) throw DataError("fusion method 'rf' requires a trained model");
            return FusionMethod::random_forest(*model);
        case FusionKind::LmsWeighted:
            if (!lms_weights)
                throw DataError("fusion method 'lms' requires ground truth to fit weights");
            return FusionMethod::lms_weighted(*lms_weights);
        default: {
            FusionMethod m;
            m.kind = kind;
            return m;
        }
    }
}

std::string format_table(const std::vector<std::string>& row_names,
                         const std::vector<std::array<double, 7>>& rows) {
    std::ostringstream out;
    out << std::left;
    out.setf(std::ios::fixed);
    out.precision(4);
    out.width(24);
    out << "method";
    for (const char* m : kMetricNames) {
        out.width(9);
        out << m;
    }
    out << "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.width(24);
        out << row_names[r];
        for (double v : rows[r]) {
            out.width(9);
            out << v;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace

std::vector<FeatureStack> load_feature_stacks(const std::string& dir,
                                              std::vector<std::string>* stems_out) {
    const auto stems = list_stems(dir, std::string("_") + kFeatureNames[0] + ".pgm");
    if (stems.empty()) throw DataError("no feature maps found in '" + dir + "'");
    std::vector<FeatureStack> stacks;
    stacks.reserve(stems.size());
    for (const auto& stem : stems) {
        FeatureStack stack;
        for (int j = 0; j < kNumFeatures; ++j) {
            const fs::path path =
                fs::path(dir) / (stem + "_" + kFeatureNames[static_cast<std::size_t>(j)] + ".pgm");
            stack.map(j) = read_map(path.string());
        }
        stacks.push_back(std::move(stack));
    }
    if (stems_out) *stems_out = stems;
    return stacks;
}

std::vector<FixationDensityMap> load_fdms(const std::string& dir) {
    const auto stems = list_stems(dir, ".pgm");
    if (stems.empty()) throw DataError("no FDM maps found in '" + dir + "'");
    std::vector<FixationDensityMap> fdms;
    fdms.reserve(stems.size());
    for (const auto& stem : stems) {
        FixationDensityMap fdm;
        fdm.field = read_map((fs::path(dir) / (stem + ".pgm")).string());
        fdms.push_back(std::move(fdm));
    }

    const fs::path csv = fs::path(dir) / "fixations.csv";
    std::ifstream in(csv);
    if (!in) throw DataError("missing fixation list '" + csv.string() + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || strip(line).empty()) continue;  // header
        std::stringstream ss(line);
        std::string f, x, y;
        if (!std::getline(ss, f, ',') || !std::getline(ss, x, ',') || !std::getline(ss, y))
            throw DataError("fixations.csv line " + std::to_string(line_no) + ": expected frame,x,y");
        try {
            const auto frame = static_cast<std::size_t>(std::stol(strip(f)));
            if (frame >= fdms.size())
                throw std::out_of_range("frame index " + std::to_string(frame));
            fdms[frame].fixation_points.push_back(
                {std::stoi(strip(x)), std::stoi(strip(y))});
        } catch (const std::exception& e) {
            throw DataError("fixations.csv line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return fdms;
}

std::vector<std::vector<FixationPoint>> leave_one_out_pools(
    const std::vector<FixationDensityMap>& fdms) {
    std::vector<FixationPoint> all;
    for (const auto& fdm : fdms)
        all.insert(all.end(), fdm.fixation_points.begin(), fdm.fixation_points.end());
    std::vector<std::vector<FixationPoint>> pools(fdms.size());
    std::size_t offset = 0;
    for (std::size_t k = 0; k < fdms.size(); ++k) {
        const std::size_t count = fdms[k].fixation_points.size();
        pools[k].reserve(all.size() - count);
        pools[k].insert(pools[k].end(), all.begin(), all.begin() + static_cast<long>(offset));
        pools[k].insert(pools[k].end(), all.begin() + static_cast<long>(offset + count), all.end());
        offset += count;
    }
    return pools;
}

std::string report_to_csv(const EvaluationReport& report) {
    std::ostringstream out;
    out.precision(10);
    out << "# emd_grid=" << report.emd_grid << " epsilon=" << report.epsilon
        << " shuffle_pool=leave-one-frame-out\n";
    out << "frame";
    for (const char* m : kMetricNames) out << "," << m;
    out << "\n";
    for (const FrameScore& s : report.per_frame) {
        out << s.frame_index << "," << s.auc << ",";
        if (s.sauc) out << *s.sauc;
        out << "," << s.emd << "," << s.sim << "," << s.pcc << "," << s.kld << "," << s.nss
            << "\n";
    }
    out << "means";
    for (double m : report.means) out << "," << m;
    out << "\n";
    return out.str();
}

void run_extract_features(const PipelineConfig& config) {
    if (!config.geometry.valid())
        throw DataError("extract-features: viewing geometry must be configured");
    std::vector<std::string> stems;
    const auto paths = frame_paths(config, &stems);
    const fs::path out_dir = ensure_output_dir(config);

    std::vector<int> levels(paths.size(), 0);
    parallel_for(paths.size(), config.jobs, [&](std::size_t k) {
        const FeatureStack stack = extract_stack(paths, k, config, &levels[k]);
        for (int j = 0; j < kNumFeatures; ++j) {
            const fs::path path =
                out_dir / (stems[k] + "_" + kFeatureNames[static_cast<std::size_t>(j)] + ".pgm");
            write_map(stack.map(j), path.string());
        }
    });

    write_manifest(config, "extract-features", paths,
                   {{"pyramid_levels_used", std::to_string(levels[0])},
                    {"frames", std::to_string(paths.size())}});
    std::cout << "extract-features: " << paths.size() << " frames -> " << config.output_dir
              << " (pyramid levels " << levels[0] << ")\n";
}

void run_make_fdm(const PipelineConfig& config) {
    if (!config.geometry.valid())
        throw DataError("make-fdm: viewing geometry must be configured");
    if (config.fixation_log.empty()) throw DataError("make-fdm: fixation_log not set");
    std::vector<std::string> stems;
    const auto paths = frame_paths(config, &stems);
    const HdrFrame first = read_pfm(paths[0]);
    const int num_frames = static_cast<int>(paths.size());

    const FixationSet set =
        parse_fixation_log(config.fixation_log, config.frame_rate, num_frames);
    const fs::path out_dir = ensure_output_dir(config);

    std::vector<FixationDensityMap> fdms(static_cast<std::size_t>(num_frames));
    parallel_for(static_cast<std::size_t>(num_frames), config.jobs, [&](std::size_t k) {
        fdms[k] = build_fdm_for_frame(set, static_cast<int>(k), config.geometry, first.width,
                                      first.height, config.fdm_duration_weighted);
        write_map(fdms[k].field, (out_dir / (stems[k] + ".pgm")).string());
    });

    std::ofstream csv(out_dir / "fixations.csv");
    csv << "frame,x,y\n";
    for (int k = 0; k < num_frames; ++k)
        for (const auto& p : fdms[static_cast<std::size_t>(k)].fixation_points)
            csv << k << "," << p.x << "," << p.y << "\n";
    if (!csv) throw DataError("make-fdm: cannot write fixations.csv");

    write_manifest(config, "make-fdm", {config.fixation_log},
                   {{"frames", std::to_string(num_frames)},
                    {"dropped_records", std::to_string(set.dropped_count)},
                    {"sigma_px", std::to_string(degrees_to_pixels(config.geometry))}});
    std::cout << "make-fdm: " << num_frames << " frames, " << set.records.size()
              << " fixation records (" << set.dropped_count << " outside the video) -> "
              << config.output_dir << "\n";
}

void run_train(const PipelineConfig& config) {
    if (config.features_dir.empty() || config.fdm_dir.empty())
        throw DataError("train: features_dir and fdm_dir must be set");
    auto samples = gather_samples(config, config.train_sequences, config.frame_fraction,
                                  config.pixel_stride);
    RandomForestParams params = config.rf;
    params.num_features = config.rf_use_coordinates ? kNumFeatures + 2 : kNumFeatures;
    const RandomForestModel model = rf_train(samples, params, config.jobs);

    ensure_output_dir(config);
    const std::string path = model_path(config);
    rf_save(model, path);

    // Importance table, most important feature first.
    std::vector<int> order(static_cast<std::size_t>(params.num_features));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return model.importances[static_cast<std::size_t>(a)] >
               model.importances[static_cast<std::size_t>(b)];
    });
    std::ostringstream table;
    table << "feature,importance\n";
    table.precision(6);
    for (int j : order) {
        const std::string name = j < kNumFeatures ? kFeatureNames[static_cast<std::size_t>(j)]
                                                  : (j == kNumFeatures ? "coord_x" : "coord_y");
        table << name << "," << model.importances[static_cast<std::size_t>(j)] << "\n";
    }
    std::ofstream imp(fs::path(config.output_dir) / "importance.csv");
    imp << table.str();
    if (!imp) throw DataError("train: cannot write importance.csv");

    write_manifest(config, "train", {},
                   {{"samples", std::to_string(samples.size())},
                    {"oob_error", std::to_string(model.oob_error)},
                    {"model_file", path}});
    std::cout << "train: " << samples.size() << " samples, " << params.num_trees
              << " trees, OOB MSE " << model.oob_error << "\n"
              << table.str() << "model -> " << path << "\n";
}

void run_predict(const PipelineConfig& config) {
    const RandomForestModel model = rf_load(model_path(config));
    std::vector<std::string> stems;
    const auto stacks = load_feature_stacks(config.features_dir, &stems);
    const fs::path out_dir = ensure_output_dir(config);
    parallel_for(stacks.size(), config.jobs, [&](std::size_t k) {
        write_map(rf_predict(model, stacks[k]), (out_dir / (stems[k] + ".pgm")).string());
    });
    write_manifest(config, "predict", {model_path(config)},
                   {{"frames", std::to_string(stacks.size())}});
    std::cout << "predict: " << stacks.size() << " saliency maps -> " << config.output_dir
              << "\n";
}

void run_fuse(const PipelineConfig& config) {
    std::vector<std::string> stems;
    const auto stacks = load_feature_stacks(config.features_dir, &stems);

    RandomForestModel model;
    std::array<double, 4> lms_weights{};
    const RandomForestModel* model_ptr = nullptr;
    const std::array<double, 4>* weights_ptr = nullptr;
    const FusionKind kind = fusion_kind_from_name(config.fusion_method);
    if (kind == FusionKind::RandomForest) {
        model = rf_load(model_path(config));
        model_ptr = &model;
    } else if (kind == FusionKind::LmsWeighted) {
        lms_weights = fit_lms_weights(gather_samples(config, {}, 1.0, config.pixel_stride));
        weights_ptr = &lms_weights;
    }
    const FusionMethod method = make_method(config, config.fusion_method, model_ptr, weights_ptr);

    const fs::path out_dir = ensure_output_dir(config);
    parallel_for(stacks.size(), config.jobs, [&](std::size_t k) {
        write_map(fuse_fixed(method, stacks[k]), (out_dir / (stems[k] + ".pgm")).string());
    });
    write_manifest(config, "fuse", {}, {{"method", config.fusion_method}});
    std::cout << "fuse(" << config.fusion_method << "): " << stacks.size() << " maps -> "
              << config.output_dir << "\n";
}

void run_evaluate(const PipelineConfig& config) {
    if (config.saliency_dir.empty() || config.fdm_dir.empty())
        throw DataError("evaluate: saliency_dir and fdm_dir must be set");
    const auto stems = list_stems(config.saliency_dir, ".pgm");
    std::vector<Field2D> preds;
    preds.reserve(stems.size());
    for (const auto& stem : stems)
        preds.push_back(read_map((fs::path(config.saliency_dir) / (stem + ".pgm")).string()));
    const auto fdms = load_fdms(config.fdm_dir);
    if (preds.size() != fdms.size())
        throw DataError("evaluate: prediction frame count " + std::to_string(preds.size()) +
                        " does not match ground-truth frame count " +
                        std::to_string(fdms.size()));

    const auto report = evaluate_frames(preds, fdms, leave_one_out_pools(fdms), config.emd_grid,
                                        config.metric_epsilon, config.jobs);
    const fs::path out_dir = ensure_output_dir(config);
    std::ofstream csv(out_dir / "report.csv");
    csv << report_to_csv(report);
    if (!csv) throw DataError("evaluate: cannot write report.csv");

    const std::string table = format_table({"mean"}, {report.means});
    std::ofstream txt(out_dir / "report.txt");
    txt << table << "scored " << report.frames_scored << " frames, skipped "
        << report.frames_skipped << " (no fixations)\n";

    write_manifest(config, "evaluate", {},
                   {{"frames_scored", std::to_string(report.frames_scored)},
                    {"frames_skipped", std::to_string(report.frames_skipped)},
                    {"emd_grid", std::to_string(config.emd_grid)}});
    std::cout << table << "evaluate: report -> " << config.output_dir << "\n";
}

void run_compare_fusions(const PipelineConfig& config) {
    std::vector<std::string> stems;
    const auto stacks = load_feature_stacks(config.features_dir, &stems);
    const auto fdms = load_fdms(config.fdm_dir);
    if (stacks.size() != fdms.size())
        throw DataError("compare-fusions: feature frame count " + std::to_string(stacks.size()) +
                        " does not match FDM frame count " + std::to_string(fdms.size()));
    const auto pools = leave_one_out_pools(fdms);

    const RandomForestModel model = rf_load(model_path(config));
    // LMS baseline weights are fit on this corpus.
    const auto lms_weights =
        fit_lms_weights(gather_samples(config, {}, 1.0, std::max(config.pixel_stride, 4)));

    std::vector<std::string> names;
    std::vector<std::array<double, 7>> rows;
    for (const char* name : kFusionMethodNames) {
        const FusionMethod method = make_method(config, name, &model, &lms_weights);
        std::vector<Field2D> preds(stacks.size());
        parallel_for(stacks.size(), config.jobs,
                     [&](std::size_t k) { preds[k] = fuse_fixed(method, stacks[k]); });
        const auto report = evaluate_frames(preds, fdms, pools, config.emd_grid,
                                            config.metric_epsilon, config.jobs);
        names.emplace_back(name);
        rows.push_back(report.means);
    }

    const std::string table = format_table(names, rows);
    const fs::path out_dir = ensure_output_dir(config);
    std::ofstream csv(out_dir / "fusion_comparison.csv");
    csv << "method";
    for (const char* m : kMetricNames) csv << "," << m;
    csv << "\n";
    csv.precision(10);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        csv << names[r];
        for (double v : rows[r]) csv << "," << v;
        csv << "\n";
    }
    std::ofstream txt(out_dir / "fusion_comparison.txt");
    txt << table;
    write_manifest(config, "compare-fusions", {model_path(config)},
                   {{"frames", std::to_string(stacks.size())}});
    std::cout << table << "compare-fusions: table -> " << config.output_dir << "\n";
}

int dispatch(const std::string& command, const PipelineConfig& config) {
    try {
        config.validate();
        if (command == "extract-features") run_extract_features(config);
        else if (command == "make-fdm") run_make_fdm(config);
        else if (command == "train") run_train(config);
        else if (command == "predict") run_predict(config);
        else if (command == "fuse") run_fuse(config);
        else if (command == "evaluate") run_evaluate(config);
        else if (command == "compare-fusions") run_compare_fusions(config);
        else {
            std::cerr << "unknown command '" << command << "'\n";
            return 1;
        }
        return 0;
    } catch (const UsageError& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << command << ": internal error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace lbvs
