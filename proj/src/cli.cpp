#include "svskit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "svskit/checkpoint.hpp"
#include "svskit/embeddings.hpp"
#include "svskit/griffin_lim.hpp"
#include "svskit/metrics.hpp"
#include "svskit/pipeline.hpp"
#include "svskit/wav.hpp"

namespace fs = std::filesystem;

namespace svskit::cli {

namespace {

double to_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': bad numeric value '" + value + "'");
    }
    if (used != value.size() || !std::isfinite(v)) {
        throw UsageError("config key '" + key + "': bad numeric value '" + value + "'");
    }
    return v;
}

long long to_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': bad integer value '" + value + "'");
    }
    if (used != value.size()) {
        throw UsageError("config key '" + key + "': bad integer value '" + value + "'");
    }
    return v;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<fs::path> list_files(const std::string& dir, const std::string& extension,
                                 const char* what) {
    if (!fs::is_directory(dir)) {
        throw UsageError(std::string(what) + " directory does not exist: " + dir);
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == extension) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

std::string read_text_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError(std::string(what) + " not found: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

/// Bounded worker pool; results are deterministic because tasks touch
/// disjoint outputs and aggregation happens in index order afterwards.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<MusicScore> load_scores(const std::string& path) {
    std::vector<MusicScore> scores = parse_score_file(read_text_file(path, "score file"));
    if (scores.empty()) throw UsageError("score file has no utterances: " + path);
    return scores;
}

TensorData load_feature(const RunConfig& config, const std::string& utt) {
    const std::string path = config.feature_dir + "/" + utt + ".mel";
    if (!fs::is_regular_file(path)) {
        throw UsageError("missing feature file (run `features extract`): " + path);
    }
    TensorData mel = read_tensor_file(path);
    if (mel.rank() != 2 || mel.cols() != static_cast<std::size_t>(config.mel.n_mels)) {
        throw UsageError("feature file has wrong shape " + shape_string(mel.shape) + ": " + path);
    }
    return mel;
}

std::optional<TensorData> maybe_embedding(const std::string& dir, const std::string& name,
                                          std::size_t dim) {
    const std::string path = dir + "/" + name;
    if (!fs::is_regular_file(path)) return std::nullopt;
    TensorData t = read_tensor_file(path);
    if (t.numel() != dim) {
        throw UsageError("embedding file " + path + " has " + std::to_string(t.numel()) +
                         " elements, expected " + std::to_string(dim));
    }
    t.shape = {dim};
    return t;
}

nn::TrainConfig train_config_of(const RunConfig& config) {
    nn::TrainConfig tc;
    tc.iterations = config.train_iterations;
    tc.batch_size = config.batch_size;
    tc.seed = config.seed;
    tc.adamw.lr = config.learning_rate;
    tc.adamw.weight_decay = config.weight_decay;
    tc.weights.l1 = config.loss_w_l1;
    tc.weights.style = config.loss_w_style;
    tc.weights.pitch = config.loss_w_pitch;
    tc.clip_norm = config.clip_norm;
    return tc;
}

struct PhraseAudio {
    std::string utterance_id;
    std::vector<double> samples;      // exactly the phrase span
    std::vector<double> tracker_view; // span plus tracker window tail
    std::vector<AlignedPhone> phones; // times relative to phrase start
};

} // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
    using Setter = std::function<void(RunConfig&, const std::string&)>;
    static const std::map<std::string, Setter> table = {
        {"paths.audio_dir", [](RunConfig& c, const std::string& v) { c.audio_dir = v; }},
        {"paths.align_dir", [](RunConfig& c, const std::string& v) { c.align_dir = v; }},
        {"paths.segment_dir", [](RunConfig& c, const std::string& v) { c.segment_dir = v; }},
        {"paths.score_file", [](RunConfig& c, const std::string& v) { c.score_file = v; }},
        {"paths.feature_dir", [](RunConfig& c, const std::string& v) { c.feature_dir = v; }},
        {"paths.checkpoint_dir", [](RunConfig& c, const std::string& v) { c.checkpoint_dir = v; }},
        {"paths.embedding_dir", [](RunConfig& c, const std::string& v) { c.embedding_dir = v; }},
        {"paths.output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
        {"run.seed", [](RunConfig& c, const std::string& v) {
             c.seed = static_cast<std::uint64_t>(to_int("run.seed", v));
         }},
        {"run.jobs", [](RunConfig& c, const std::string& v) {
             c.jobs = static_cast<int>(to_int("run.jobs", v));
             if (c.jobs < 1) throw UsageError("run.jobs must be at least 1");
         }},
        {"segment.threshold_db", [](RunConfig& c, const std::string& v) {
             c.segment_threshold_db = to_double("segment.threshold_db", v);
         }},
        {"segment.min_gap", [](RunConfig& c, const std::string& v) {
             c.segment_min_gap = to_double("segment.min_gap", v);
             if (c.segment_min_gap <= 0) throw UsageError("segment.min_gap must be positive");
         }},
        {"pitch.fmin_hz", [](RunConfig& c, const std::string& v) { c.pitch.fmin_hz = to_double("pitch.fmin_hz", v); }},
        {"pitch.fmax_hz", [](RunConfig& c, const std::string& v) { c.pitch.fmax_hz = to_double("pitch.fmax_hz", v); }},
        {"pitch.window_seconds", [](RunConfig& c, const std::string& v) {
             c.pitch.window_seconds = to_double("pitch.window_seconds", v);
         }},
        {"pitch.voicing_threshold", [](RunConfig& c, const std::string& v) {
             c.pitch.voicing_threshold = to_double("pitch.voicing_threshold", v);
         }},
        {"mel.fft_size", [](RunConfig& c, const std::string& v) { c.mel.fft_size = static_cast<int>(to_int("mel.fft_size", v)); }},
        {"mel.win_length", [](RunConfig& c, const std::string& v) { c.mel.win_length = static_cast<int>(to_int("mel.win_length", v)); }},
        {"mel.hop_length", [](RunConfig& c, const std::string& v) { c.mel.hop_length = static_cast<int>(to_int("mel.hop_length", v)); }},
        {"mel.n_mels", [](RunConfig& c, const std::string& v) { c.mel.n_mels = static_cast<int>(to_int("mel.n_mels", v)); }},
        {"mel.fmin_hz", [](RunConfig& c, const std::string& v) { c.mel.fmin_hz = to_double("mel.fmin_hz", v); }},
        {"mel.fmax_hz", [](RunConfig& c, const std::string& v) { c.mel.fmax_hz = to_double("mel.fmax_hz", v); }},
        {"mel.floor_db", [](RunConfig& c, const std::string& v) { c.mel.floor_db = to_double("mel.floor_db", v); }},
        {"diffusion.steps", [](RunConfig& c, const std::string& v) {
             c.diffusion_steps = static_cast<int>(to_int("diffusion.steps", v));
             if (c.diffusion_steps < 1) throw UsageError("diffusion.steps must be at least 1");
         }},
        {"diffusion.beta_start", [](RunConfig& c, const std::string& v) { c.beta_start = to_double("diffusion.beta_start", v); }},
        {"diffusion.beta_end", [](RunConfig& c, const std::string& v) { c.beta_end = to_double("diffusion.beta_end", v); }},
        {"diffusion.q", [](RunConfig& c, const std::string& v) {
             c.shallow_q = static_cast<int>(to_int("diffusion.q", v));
             if (c.shallow_q < 0) throw UsageError("diffusion.q must be non-negative");
         }},
        {"train.iterations", [](RunConfig& c, const std::string& v) {
             c.train_iterations = static_cast<std::size_t>(to_int("train.iterations", v));
         }},
        {"train.batch_size", [](RunConfig& c, const std::string& v) {
             c.batch_size = static_cast<std::size_t>(to_int("train.batch_size", v));
             if (c.batch_size == 0) throw UsageError("train.batch_size must be positive");
         }},
        {"train.lr", [](RunConfig& c, const std::string& v) { c.learning_rate = to_double("train.lr", v); }},
        {"train.weight_decay", [](RunConfig& c, const std::string& v) { c.weight_decay = to_double("train.weight_decay", v); }},
        {"train.clip_norm", [](RunConfig& c, const std::string& v) { c.clip_norm = to_double("train.clip_norm", v); }},
        {"loss.w_l1", [](RunConfig& c, const std::string& v) { c.loss_w_l1 = to_double("loss.w_l1", v); }},
        {"loss.w_style", [](RunConfig& c, const std::string& v) { c.loss_w_style = to_double("loss.w_style", v); }},
        {"loss.w_pitch", [](RunConfig& c, const std::string& v) { c.loss_w_pitch = to_double("loss.w_pitch", v); }},
        {"style.seed", [](RunConfig& c, const std::string& v) {
             c.style_seed = static_cast<std::uint64_t>(to_int("style.seed", v));
         }},
        {"pitch_proxy.temperature", [](RunConfig& c, const std::string& v) {
             c.pitch_proxy_temperature = to_double("pitch_proxy.temperature", v);
             if (c.pitch_proxy_temperature <= 0) throw UsageError("pitch_proxy.temperature must be positive");
         }},
        {"vocoder.iterations", [](RunConfig& c, const std::string& v) {
             c.vocoder_iterations = static_cast<int>(to_int("vocoder.iterations", v));
             if (c.vocoder_iterations < 0) throw UsageError("vocoder.iterations must be non-negative");
         }},
    };
    auto it = table.find(key);
    if (it == table.end()) throw UsageError("unknown config key: '" + key + "'");
    it->second(*this, value);
}

void RunConfig::apply_profile(const std::string& name) {
    if (name == "toy") {
        train_iterations = 2000;
        batch_size = 1;
        learning_rate = 2e-3;
        weight_decay = 0.0;
        vocoder_iterations = 16;
        return;
    }
    if (name == "full") return; // the defaults
    throw UsageError("unknown profile: '" + name + "' (expected 'toy' or 'full')");
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config file " + path + " line " + std::to_string(line_number) +
                             ": expected key = value");
        }
        apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

RunConfig RunConfig::resolve(const std::string& config_path, const std::string& profile,
                             const std::vector<std::string>& set_overrides) {
    RunConfig config;
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("SVSKIT_CONFIG")) path = env;
    }
    if (!path.empty()) config.load_file(path);
    if (!profile.empty()) config.apply_profile(profile);
    for (const std::string& kv : set_overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
        config.apply(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    try {
        config.mel.validate();
    } catch (const std::exception& e) {
        // invalid values arrived through user configuration, so report them
        // like any other usage problem
        throw UsageError(e.what());
    }
    return config;
}

int cmd_score_build(const RunConfig& config) {
    const std::vector<fs::path> wavs = list_files(config.audio_dir, ".wav", "audio");
    if (wavs.empty()) throw UsageError("no .wav files in " + config.audio_dir);
    ensure_dir(config.segment_dir);
    const fs::path score_path(config.score_file);
    if (score_path.has_parent_path()) ensure_dir(score_path.parent_path().string());

    const double sr = static_cast<double>(kSampleRate);
    const std::size_t tracker_tail = static_cast<std::size_t>(
        std::lround((config.pitch.window_seconds - config.pitch.hop_seconds) * sr));

    std::vector<PhraseAudio> phrases;
    for (const fs::path& wav_path : wavs) {
        const std::string stem = wav_path.stem().string();
        const std::string align_path = config.align_dir + "/" + stem + ".align";
        const std::vector<AlignedPhone> aligned =
            parse_alignment(read_text_file(align_path, "alignment file"));
        const std::vector<double> wave = read_wav(wav_path.string());
        const auto spans =
            segment_on_silence(wave, config.segment_threshold_db, config.segment_min_gap);

        int index = 0;
        for (const auto& [start, end] : spans) {
            PhraseAudio phrase;
            char suffix[16];
            std::snprintf(suffix, sizeof(suffix), "_%03d", index);
            phrase.utterance_id = stem + suffix;

            for (const AlignedPhone& p : aligned) {
                const double o_start = std::max(p.start, start);
                const double o_end = std::min(p.end, end);
                if (o_end - o_start < 0.010) continue; // needs >= 10 ms overlap
                AlignedPhone local = p;
                local.start = o_start - start;
                local.end = o_end - start;
                phrase.phones.push_back(local);
            }
            if (phrase.phones.empty()) continue;

            const std::size_t s0 = static_cast<std::size_t>(std::llround(start * sr));
            const std::size_t s1 =
                std::min(static_cast<std::size_t>(std::llround(end * sr)), wave.size());
            phrase.samples.assign(wave.begin() + static_cast<std::ptrdiff_t>(s0),
                                  wave.begin() + static_cast<std::ptrdiff_t>(s1));
            phrase.tracker_view = phrase.samples;
            for (std::size_t i = 0; i < tracker_tail; ++i) {
                const std::size_t idx = s1 + i;
                phrase.tracker_view.push_back(idx < wave.size() ? wave[idx] : 0.0);
            }
            phrases.push_back(std::move(phrase));
            ++index;
        }
    }
    if (phrases.empty()) throw UsageError("no utterances found (check silence thresholds)");

    std::vector<MusicScore> scores(phrases.size());
    parallel_for(phrases.size(), config.jobs, [&](std::size_t i) {
        const PhraseAudio& phrase = phrases[i];
        const PitchTrack track = extract_f0_autocorr(phrase.tracker_view, config.pitch);
        std::ostringstream text;
        int last_syllable = -1;
        for (const AlignedPhone& p : phrase.phones) {
            if (p.syllable_id != last_syllable) {
                if (last_syllable >= 0) text << ' ';
                last_syllable = p.syllable_id;
            }
            text << p.phone;
        }
        scores[i] = build_score(phrase.phones, text.str(), track, phrase.utterance_id);
        write_wav(config.segment_dir + "/" + phrase.utterance_id + ".wav", phrase.samples);
    });

    write_text_file(config.score_file, write_score_file(scores));
    double total = 0.0;
    for (const PhraseAudio& p : phrases) total += static_cast<double>(p.samples.size()) / sr;
    std::cout << "score build: " << scores.size() << " phrase(s), " << total
              << " s of audio -> " << config.score_file << "\n";
    return 0;
}

int cmd_features_extract(const RunConfig& config) {
    const std::vector<fs::path> wavs = list_files(config.segment_dir, ".wav", "segment");
    if (wavs.empty()) throw UsageError("no .wav files in " + config.segment_dir);
    ensure_dir(config.feature_dir);
    std::atomic<std::size_t> frames_total{0};
    parallel_for(wavs.size(), config.jobs, [&](std::size_t i) {
        const std::vector<double> wave = read_wav(wavs[i].string());
        const TensorData mel = normalize_mel(mel_spectrogram(wave, config.mel), config.mel);
        if (mel.rows() == 0) {
            throw std::runtime_error("audio too short for one analysis frame: " + wavs[i].string());
        }
        write_tensor_file(config.feature_dir + "/" + wavs[i].stem().string() + ".mel", mel);
        frames_total += mel.rows();
    });
    std::cout << "features extract: " << wavs.size() << " file(s), " << frames_total.load()
              << " frames -> " << config.feature_dir << "\n";
    return 0;
}

int cmd_train(const RunConfig& config, const std::string& stage, bool resume) {
    if (stage != "aux" && stage != "denoiser") {
        throw UsageError("unknown training stage '" + stage + "' (expected 'aux' or 'denoiser')");
    }
    const std::vector<MusicScore> scores = load_scores(config.score_file);
    ensure_dir(config.checkpoint_dir);
    nn::TrainConfig tc = train_config_of(config);

    const std::string ckpt_path = config.checkpoint_dir + "/" + stage + ".ckpt";
    const std::string csv_path = config.checkpoint_dir + "/" + stage + "_loss.csv";

    if (stage == "aux") {
        const nn::StyleEncoder style_encoder(config.style_seed);
        const nn::PitchProxy pitch_proxy(config.mel, config.pitch_proxy_temperature);
        std::vector<nn::AuxSample> samples;
        for (const MusicScore& score : scores) {
            samples.push_back(pipeline::make_aux_sample(score, load_feature(config, score.utterance_id),
                                                        style_encoder, pitch_proxy, config.seed,
                                                        config.mel));
        }
        nn::AuxModel model(derive_seed(config.seed, "aux.model"));
        nn::AdamW optimizer(tc.adamw);
        if (resume) {
            if (!fs::is_regular_file(ckpt_path)) {
                throw UsageError("cannot resume, checkpoint missing: " + ckpt_path);
            }
            const Checkpoint ckpt = load_checkpoint(ckpt_path);
            if (ckpt.stage != "aux") throw UsageError("checkpoint stage mismatch in " + ckpt_path);
            restore_checkpoint(ckpt, model.params(), &optimizer);
            tc.start_iteration = ckpt.iteration;
        }
        std::ofstream csv(csv_path);
        if (!csv) throw std::runtime_error("cannot open " + csv_path);
        nn::TrainStats stats;
        try {
            stats = nn::train_aux(model, style_encoder, pitch_proxy, samples, optimizer, tc, &csv);
        } catch (const std::exception& e) {
            save_checkpoint(ckpt_path + ".failed",
                            snapshot_checkpoint(model.params(), &optimizer, "aux",
                                                tc.start_iteration, config.seed));
            throw std::runtime_error(std::string("aux training aborted (state dumped to ") +
                                     ckpt_path + ".failed): " + e.what());
        }
        save_checkpoint(ckpt_path,
                        snapshot_checkpoint(model.params(), &optimizer, "aux",
                                            tc.start_iteration + stats.iterations_run, config.seed));
        std::cout << "train aux: " << stats.iterations_run << " iteration(s), final l1 "
                  << stats.last_l1 << ", style " << stats.last_style << ", pitch "
                  << stats.last_pitch << ", total " << stats.last_total << " -> " << ckpt_path
                  << "\n";
        return 0;
    }

    // stage == "denoiser"
    const std::string aux_path = config.checkpoint_dir + "/aux.ckpt";
    if (!fs::is_regular_file(aux_path)) {
        throw UsageError("denoiser training needs the coarse stage first (missing " + aux_path + ")");
    }
    const Checkpoint aux_ckpt = load_checkpoint(aux_path);
    if (aux_ckpt.stage != "aux") throw UsageError("checkpoint stage mismatch in " + aux_path);
    nn::AuxModel aux(derive_seed(config.seed, "aux.model"));
    restore_checkpoint(aux_ckpt, aux.params(), nullptr);

    std::vector<nn::DenoiserSample> samples;
    for (const MusicScore& score : scores) {
        nn::DenoiserSample s;
        s.utterance_id = score.utterance_id;
        s.mel = load_feature(config, score.utterance_id);
        s.content = pipeline::content_frames(aux, score, config.seed, config.mel, s.mel.rows());

        auto mert = maybe_embedding(config.embedding_dir, score.utterance_id + ".mert.emb",
                                    pseudo_dim(PseudoKind::mert));
        auto vec = maybe_embedding(config.embedding_dir, score.utterance_id + ".vec.emb",
                                   pseudo_dim(PseudoKind::vec));
        if (!mert || !vec) {
            const std::string seg = config.segment_dir + "/" + score.utterance_id + ".wav";
            if (!fs::is_regular_file(seg)) {
                throw UsageError("no prior embeddings for " + score.utterance_id +
                                 " and no segment audio at " + seg);
            }
            const std::string key = std::to_string(audio_digest(read_wav(seg)));
            if (!mert) mert = pseudo_embedding(PseudoKind::mert, key, config.seed);
            if (!vec) vec = pseudo_embedding(PseudoKind::vec, key, config.seed);
        }
        s.mert = std::move(*mert);
        s.vec = std::move(*vec);
        samples.push_back(std::move(s));
    }

    nn::DenoiserModel model(derive_seed(config.seed, "denoiser.model"));
    nn::AdamW optimizer(tc.adamw);
    if (resume) {
        if (!fs::is_regular_file(ckpt_path)) {
            throw UsageError("cannot resume, checkpoint missing: " + ckpt_path);
        }
        const Checkpoint ckpt = load_checkpoint(ckpt_path);
        if (ckpt.stage != "denoiser") throw UsageError("checkpoint stage mismatch in " + ckpt_path);
        restore_checkpoint(ckpt, model.params(), &optimizer);
        tc.start_iteration = ckpt.iteration;
    }
    const DiffusionSchedule schedule =
        make_schedule(config.diffusion_steps, config.beta_start, config.beta_end);
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open " + csv_path);
    nn::TrainStats stats;
    try {
        stats = nn::train_denoiser(model, schedule, samples, optimizer, tc, &csv);
    } catch (const std::exception& e) {
        save_checkpoint(ckpt_path + ".failed",
                        snapshot_checkpoint(model.params(), &optimizer, "denoiser",
                                            tc.start_iteration, config.seed));
        throw std::runtime_error(std::string("denoiser training aborted (state dumped to ") +
                                 ckpt_path + ".failed): " + e.what());
    }
    save_checkpoint(ckpt_path,
                    snapshot_checkpoint(model.params(), &optimizer, "denoiser",
                                        tc.start_iteration + stats.iterations_run, config.seed));
    std::cout << "train denoiser: " << stats.iterations_run << " iteration(s), final loss "
              << stats.last_total << " -> " << ckpt_path << "\n";
    return 0;
}

int cmd_synthesize(const RunConfig& config, const std::string& score_path) {
    const std::string path = score_path.empty() ? config.score_file : score_path;
    const std::vector<MusicScore> scores = load_scores(path);

    const std::string aux_path = config.checkpoint_dir + "/aux.ckpt";
    const std::string den_path = config.checkpoint_dir + "/denoiser.ckpt";
    if (!fs::is_regular_file(aux_path)) {
        throw UsageError("missing coarse-stage checkpoint: " + aux_path);
    }
    if (!fs::is_regular_file(den_path)) {
        throw UsageError("missing denoiser checkpoint: " + den_path);
    }
    nn::AuxModel aux(derive_seed(config.seed, "aux.model"));
    {
        const Checkpoint ckpt = load_checkpoint(aux_path);
        if (ckpt.stage != "aux") throw UsageError("checkpoint stage mismatch in " + aux_path);
        restore_checkpoint(ckpt, aux.params(), nullptr);
    }
    nn::DenoiserModel denoiser(derive_seed(config.seed, "denoiser.model"));
    {
        const Checkpoint ckpt = load_checkpoint(den_path);
        if (ckpt.stage != "denoiser") throw UsageError("checkpoint stage mismatch in " + den_path);
        restore_checkpoint(ckpt, denoiser.params(), nullptr);
    }
    if (config.shallow_q > config.diffusion_steps) {
        throw UsageError("diffusion.q exceeds diffusion.steps");
    }

    ensure_dir(config.output_dir);
    const DiffusionSchedule schedule =
        make_schedule(config.diffusion_steps, config.beta_start, config.beta_end);
    pipeline::SynthesisConfig sc;
    sc.q = config.shallow_q;
    sc.vocoder_iterations = config.vocoder_iterations;
    sc.seed = config.seed;
    sc.embedding_seed = config.seed;

    parallel_for(scores.size(), config.jobs, [&](std::size_t i) {
        const MusicScore& score = scores[i];
        auto mert = maybe_embedding(config.embedding_dir, score.utterance_id + ".mert.emb",
                                    pseudo_dim(PseudoKind::mert));
        auto vec = maybe_embedding(config.embedding_dir, score.utterance_id + ".vec.emb",
                                   pseudo_dim(PseudoKind::vec));
        const pipeline::SynthesisResult result = pipeline::synthesize(
            score, aux, denoiser, schedule, config.mel, sc,
            mert ? &*mert : nullptr, vec ? &*vec : nullptr);
        write_tensor_file(config.output_dir + "/" + score.utterance_id + ".mel", result.mel);
        write_wav(config.output_dir + "/" + score.utterance_id + ".wav", result.wave);
    });
    std::cout << "synthesize: " << scores.size() << " utterance(s) -> " << config.output_dir
              << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& config, const std::string& ref_dir, const std::string& gen_dir) {
    const std::vector<fs::path> refs = list_files(ref_dir, ".wav", "reference");
    std::vector<std::pair<fs::path, fs::path>> pairs;
    std::vector<std::string> unmatched;
    for (const fs::path& ref : refs) {
        fs::path gen = fs::path(gen_dir) / ref.filename();
        if (fs::is_regular_file(gen)) {
            pairs.emplace_back(ref, gen);
        } else {
            unmatched.push_back(ref.stem().string());
        }
    }
    if (pairs.empty()) {
        throw UsageError("no matching .wav stems between " + ref_dir + " and " + gen_dir);
    }
    for (const std::string& name : unmatched) {
        std::cout << "evaluate: no generated counterpart for " << name << "\n";
    }

    std::vector<EvalReport> reports(pairs.size());
    parallel_for(pairs.size(), config.jobs, [&](std::size_t i) {
        const std::vector<double> ref_wave = read_wav(pairs[i].first.string());
        const std::vector<double> gen_wave = read_wav(pairs[i].second.string());

        TensorData ref_mel = mel_spectrogram(ref_wave, config.mel);
        TensorData gen_mel = mel_spectrogram(gen_wave, config.mel);
        const std::size_t frames = std::min(ref_mel.rows(), gen_mel.rows());
        if (frames == 0) {
            throw std::runtime_error("audio too short to evaluate: " + pairs[i].first.string());
        }
        ref_mel.data.resize(frames * ref_mel.cols());
        ref_mel.shape[0] = frames;
        gen_mel.data.resize(frames * gen_mel.cols());
        gen_mel.shape[0] = frames;

        EvalReport r;
        r.mcd_db = mcd_db(ref_mel, gen_mel);
        r.mel_mae = mean_absolute_error(normalize_mel(ref_mel, config.mel),
                                        normalize_mel(gen_mel, config.mel));
        const PitchTrack ref_track = extract_f0_autocorr(ref_wave, config.pitch);
        const PitchTrack gen_track = extract_f0_autocorr(gen_wave, config.pitch);
        r.logf0_rmse = logf0_rmse(ref_track, gen_track);
        r.vuv_accuracy = vuv_agreement(ref_track, gen_track);
        const TensorData ref_emb = pseudo_embedding(
            PseudoKind::vec, std::to_string(audio_digest(ref_wave)), config.seed);
        const TensorData gen_emb = pseudo_embedding(
            PseudoKind::vec, std::to_string(audio_digest(gen_wave)), config.seed);
        r.cosine_similarity = cosine_similarity(ref_emb, gen_emb);
        reports[i] = r;
    });

    EvalReport mean;
    for (const EvalReport& r : reports) {
        mean.mcd_db += r.mcd_db;
        mean.logf0_rmse += r.logf0_rmse;
        mean.mel_mae += r.mel_mae;
        mean.vuv_accuracy += r.vuv_accuracy;
        mean.cosine_similarity += r.cosine_similarity;
    }
    const double inv = 1.0 / static_cast<double>(reports.size());
    mean.mcd_db *= inv;
    mean.logf0_rmse *= inv;
    mean.mel_mae *= inv;
    mean.vuv_accuracy *= inv;
    mean.cosine_similarity *= inv;

    const std::string json = eval_report_to_json(mean);
    ensure_dir(config.output_dir);
    write_text_file(config.output_dir + "/eval_report.json", json);
    std::cout << json;
    return 0;
}

int cmd_export(const RunConfig& config, const std::string& item, const std::string& input,
               const std::string& output) {
    if ((item == "pitch" || item == "mel") && !fs::is_regular_file(input)) {
        throw UsageError("input audio not found: " + input);
    }
    if (item == "pitch") {
        const std::vector<double> wave = read_wav(input);
        const PitchTrack raw = extract_f0_autocorr(wave, config.pitch);
        bool any_voiced = false;
        for (std::size_t i = 0; i < raw.size(); ++i) any_voiced |= raw.voiced[i] != 0;
        const PitchTrack interp = any_voiced ? interpolate_unvoiced(raw) : raw;
        std::ostringstream os;
        os << "time_s,f0_hz,source\n";
        char buf[96];
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const char* source = raw.voiced[i] ? "tracked" : (any_voiced ? "interpolated" : "unvoiced");
            const double f0 = raw.voiced[i] ? raw.f0_hz[i] : interp.f0_hz[i];
            std::snprintf(buf, sizeof(buf), "%.3f,%.3f,%s\n", raw.frame_time(i), f0, source);
            os << buf;
        }
        write_text_file(output, os.str());
        std::cout << "export pitch: " << raw.size() << " frame(s) -> " << output << "\n";
        return 0;
    }
    if (item == "mel") {
        const std::vector<double> wave = read_wav(input);
        const TensorData mel = normalize_mel(mel_spectrogram(wave, config.mel), config.mel);
        write_tensor_file(output, mel);
        std::cout << "export mel: " << mel.rows() << " frame(s) x " << mel.cols() << " -> "
                  << output << "\n";
        return 0;
    }
    if (item == "pca") {
        const std::vector<fs::path> files = list_files(input, ".emb", "embedding");
        if (files.size() < 2) throw UsageError("pca export needs at least two .emb files in " + input);
        std::vector<TensorData> vectors;
        std::vector<std::string> labels;
        for (const fs::path& f : files) {
            TensorData t = read_tensor_file(f.string());
            t.shape = {t.numel()};
            if (!vectors.empty() && t.numel() != vectors.front().numel()) {
                throw UsageError("embedding dimensions differ: " + f.string());
            }
            vectors.push_back(std::move(t));
            labels.push_back(f.stem().string());
        }
        TensorData matrix = TensorData::matrix(vectors.size(), vectors.front().numel());
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            for (std::size_t j = 0; j < vectors[i].numel(); ++j) matrix(i, j) = vectors[i][j];
        }
        const Pca2D pca = pca_2d(matrix);
        std::ostringstream os;
        os << "label,x,y\n";
        char buf[160];
        for (std::size_t i = 0; i < labels.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f\n", labels[i].c_str(),
                          pca.points(i, 0), pca.points(i, 1));
            os << buf;
        }
        write_text_file(output, os.str());
        std::cout << "export pca: " << labels.size() << " embedding(s), explained "
                  << pca.explained[0] << " / " << pca.explained[1] << " -> " << output << "\n";
        return 0;
    }
    throw UsageError("unknown export item '" + item + "' (expected pitch, mel, or pca)");
}

} // namespace svskit::cli
