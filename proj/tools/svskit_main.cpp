// Command line front end: score building, feature extraction, two-stage
// training, synthesis, evaluation, and export of intermediate artifacts.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svskit/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"svskit - desk-scale singing-voice synthesis toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string profile;
    std::vector<std::string> sets;
    app.add_option("--config", config_path,
                   "Config file with 'key = value' lines (default: $SVSKIT_CONFIG)");
    app.add_option("--profile", profile, "Preset: 'toy' (desk-scale training) or 'full'")
        ->check(CLI::IsMember({"toy", "full"}));
    app.add_option("--set", sets, "Override one config key, e.g. --set run.seed=7 (repeatable)")
        ->allow_extra_args(false);

    CLI::App* score = app.add_subcommand("score", "Music score construction");
    score->require_subcommand(1);
    CLI::App* score_build = score->add_subcommand(
        "build", "Segment recordings on silence and derive per-phrase scores");

    CLI::App* features = app.add_subcommand("features", "Acoustic feature extraction");
    features->require_subcommand(1);
    CLI::App* features_extract = features->add_subcommand(
        "extract", "Compute normalized log-mel features for segmented audio");

    CLI::App* train = app.add_subcommand("train", "Train one model stage");
    std::string stage;
    bool resume = false;
    train->add_option("stage", stage, "Stage to train: 'aux' or 'denoiser'")
        ->required()
        ->check(CLI::IsMember({"aux", "denoiser"}));
    train->add_flag("--resume", resume, "Continue from the stage's existing checkpoint");

    CLI::App* synthesize = app.add_subcommand("synthesize", "Render audio from a score file");
    std::string score_path;
    synthesize->add_option("--score", score_path,
                           "Score file to render (default: paths.score_file)");

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "Objective metrics between two audio directories");
    std::string ref_dir;
    std::string gen_dir;
    evaluate->add_option("reference_dir", ref_dir, "Directory of reference .wav files")
        ->required();
    evaluate->add_option("generated_dir", gen_dir, "Directory of generated .wav files")
        ->required();

    CLI::App* export_cmd = app.add_subcommand("export", "Export an intermediate artifact");
    std::string item;
    std::string input;
    std::string output;
    export_cmd->add_option("--item", item, "What to export: 'pitch', 'mel', or 'pca'")
        ->required()
        ->check(CLI::IsMember({"pitch", "mel", "pca"}));
    export_cmd->add_option("--input", input, "Input .wav file (pitch, mel) or .emb directory (pca)")
        ->required();
    export_cmd->add_option("--output", output, "Destination file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const svskit::cli::RunConfig config =
            svskit::cli::RunConfig::resolve(config_path, profile, sets);
        if (score_build->parsed()) return svskit::cli::cmd_score_build(config);
        if (features_extract->parsed()) return svskit::cli::cmd_features_extract(config);
        if (train->parsed()) return svskit::cli::cmd_train(config, stage, resume);
        if (synthesize->parsed()) return svskit::cli::cmd_synthesize(config, score_path);
        if (evaluate->parsed()) return svskit::cli::cmd_evaluate(config, ref_dir, gen_dir);
        if (export_cmd->parsed()) return svskit::cli::cmd_export(config, item, input, output);
        std::cerr << "error: no command selected\n";
        return 2;
    } catch (const svskit::cli::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
