#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "svskit/mel.hpp"
#include "svskit/pitch.hpp"

namespace svskit::cli {

/// Raised for bad invocations and unusable inputs; maps to exit code 2.
/// Other exceptions escaping a command map to exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Toolkit configuration. Values come from (in order of precedence)
/// --set key=value flags, the --profile preset, the config file named by
/// --config or the SVSKIT_CONFIG environment variable, then these defaults.
struct RunConfig {
    // paths.*
    std::string audio_dir = "data/audio";
    std::string align_dir = "data/align";
    std::string segment_dir = "work/segments";
    std::string score_file = "work/score.txt";
    std::string feature_dir = "work/features";
    std::string checkpoint_dir = "work/checkpoints";
    std::string embedding_dir = "work/embeddings";
    std::string output_dir = "work/output";

    // run.*
    std::uint64_t seed = 1234;
    int jobs = 1;

    // segment.*
    double segment_threshold_db = -40.0;
    double segment_min_gap = 0.5;

    // pitch.* (tracker)
    PitchTrackerConfig pitch;

    // mel.*
    MelConfig mel;

    // diffusion.*
    int diffusion_steps = 100;
    double beta_start = 1e-4;
    double beta_end = 6e-2;
    int shallow_q = 60;

    // train.*
    std::size_t train_iterations = 200000;
    std::size_t batch_size = 48;
    double learning_rate = 1e-3;
    double weight_decay = 0.01;
    double clip_norm = 1.0;

    // loss.*
    double loss_w_l1 = 1.0;
    double loss_w_style = 1.0;
    double loss_w_pitch = 1.0;

    // style.* / pitch_proxy.* / vocoder.*
    std::uint64_t style_seed = 97;
    double pitch_proxy_temperature = 0.05;
    int vocoder_iterations = 32;

    /// Applies one dotted key; unknown keys or unparsable values raise
    /// UsageError.
    void apply(const std::string& key, const std::string& value);
    /// Named preset; "toy" shrinks training for desk-scale runs.
    void apply_profile(const std::string& name);
    void load_file(const std::string& path);

    /// Resolution helper used by the command line tool: reads the config
    /// file (explicit path, else $SVSKIT_CONFIG if set), then the profile,
    /// then --set overrides.
    static RunConfig resolve(const std::string& config_path,
                             const std::string& profile,
                             const std::vector<std::string>& set_overrides);
};

int cmd_score_build(const RunConfig& config);
int cmd_features_extract(const RunConfig& config);
int cmd_train(const RunConfig& config, const std::string& stage, bool resume);
int cmd_synthesize(const RunConfig& config, const std::string& score_path);
int cmd_evaluate(const RunConfig& config, const std::string& ref_dir, const std::string& gen_dir);
int cmd_export(const RunConfig& config, const std::string& item, const std::string& input,
               const std::string& output);

} // namespace svskit::cli
