#include "svskit/pipeline.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "svskit/embeddings.hpp"
#include "svskit/griffin_lim.hpp"

namespace svskit::pipeline {

namespace {

std::vector<std::string> words_of(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) words.push_back(tok);
    if (words.empty()) words.push_back("_");
    return words;
}

} // namespace

ScoreEmbeddings score_embeddings(const MusicScore& score, std::uint64_t seed,
                                 const MelConfig& mel_config, std::size_t target_frames) {
    const std::size_t rows = score.size();
    const std::vector<std::string> words = words_of(score.text);
    const double fps = static_cast<double>(mel_config.sample_rate) /
                       static_cast<double>(mel_config.hop_length);

    ScoreEmbeddings out;
    out.e_word = TensorData::matrix(rows, pseudo_dim(PseudoKind::word));
    out.e_phone = TensorData::matrix(rows, pseudo_dim(PseudoKind::phone));
    out.e_score = TensorData::matrix(rows, 256);
    out.frame_counts.resize(rows, 0);

    double cumulative = 0.0;
    std::size_t prev_boundary = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string& word = words[i * words.size() / rows];
        TensorData ew = pseudo_embedding(PseudoKind::word, word, seed);
        TensorData ep = pseudo_embedding(PseudoKind::phone, score.phones[i], seed);
        TensorData es = score_token_embedding(score.phones[i], score.notes[i], score.slurs[i], seed);
        for (std::size_t j = 0; j < ew.numel(); ++j) out.e_word(i, j) = ew[j];
        for (std::size_t j = 0; j < ep.numel(); ++j) out.e_phone(i, j) = ep[j];
        for (std::size_t j = 0; j < es.numel(); ++j) out.e_score(i, j) = es[j];

        cumulative += score.phone_durations[i];
        const std::size_t boundary = static_cast<std::size_t>(std::llround(cumulative * fps));
        out.frame_counts[i] = boundary > prev_boundary ? boundary - prev_boundary : 0;
        prev_boundary = boundary > prev_boundary ? boundary : prev_boundary;
    }

    if (target_frames > 0) {
        std::size_t total = 0;
        for (std::size_t c : out.frame_counts) total += c;
        if (total < target_frames) {
            out.frame_counts.back() += target_frames - total;
        } else if (total > target_frames) {
            std::size_t excess = total - target_frames;
            for (std::size_t i = rows; i-- > 0 && excess > 0;) {
                const std::size_t take = std::min(excess, out.frame_counts[i]);
                out.frame_counts[i] -= take;
                excess -= take;
            }
            if (excess > 0) throw std::runtime_error("score too short for requested frame count");
        }
    }

    std::size_t total = 0;
    for (std::size_t c : out.frame_counts) total += c;
    if (total == 0) throw std::runtime_error("score " + score.utterance_id + " spans zero mel frames");
    return out;
}

nn::AuxSample make_aux_sample(const MusicScore& score, const TensorData& mel_norm,
                              const nn::StyleEncoder& style_encoder,
                              const nn::PitchProxy& pitch_proxy, std::uint64_t seed,
                              const MelConfig& mel_config) {
    if (mel_norm.rank() != 2 || mel_norm.cols() != static_cast<std::size_t>(mel_config.n_mels)) {
        throw std::runtime_error("reference mel for " + score.utterance_id + " must be [N, n_mels]");
    }
    ScoreEmbeddings emb = score_embeddings(score, seed, mel_config, mel_norm.rows());
    nn::AuxSample sample;
    sample.utterance_id = score.utterance_id;
    sample.e_word = std::move(emb.e_word);
    sample.e_phone = std::move(emb.e_phone);
    sample.e_score = std::move(emb.e_score);
    sample.frame_counts = std::move(emb.frame_counts);
    sample.mel = mel_norm;
    sample.style_ref = style_encoder.embed(mel_norm);
    sample.f0_ref = pitch_proxy.estimate(mel_norm);
    return sample;
}

TensorData content_frames(const nn::AuxModel& aux, const MusicScore& score,
                          std::uint64_t seed, const MelConfig& mel_config,
                          std::size_t target_frames) {
    ScoreEmbeddings emb = score_embeddings(score, seed, mel_config, target_frames);
    nn::VarPtr content = aux.content_rows(nn::make_const(emb.e_word), nn::make_const(emb.e_phone),
                                          nn::make_const(emb.e_score));
    return nn::repeat_rows(content, emb.frame_counts)->value;
}

SynthesisResult synthesize(const MusicScore& score, const nn::AuxModel& aux,
                           const nn::DenoiserModel& denoiser,
                           const DiffusionSchedule& schedule, const MelConfig& mel_config,
                           const SynthesisConfig& config, const TensorData* mert_override,
                           const TensorData* vec_override) {
    ScoreEmbeddings emb = score_embeddings(score, config.embedding_seed, mel_config);
    nn::VarPtr content = aux.content_rows(nn::make_const(emb.e_word), nn::make_const(emb.e_phone),
                                          nn::make_const(emb.e_score));
    nn::VarPtr frames = nn::repeat_rows(content, emb.frame_counts);
    TensorData coarse = aux.decode(frames)->value;
    const TensorData content_mat = frames->value;

    // Prior embeddings: derive from the coarse draft's vocoded audio unless
    // explicit embedding files were supplied.
    TensorData mert, vec;
    if (mert_override && vec_override) {
        mert = *mert_override;
        vec = *vec_override;
    } else {
        std::vector<double> draft =
            griffin_lim(denormalize_mel(coarse, mel_config), mel_config,
                        config.vocoder_iterations,
                        derive_seed(config.seed, "draft:" + score.utterance_id));
        const std::string key = std::to_string(audio_digest(draft));
        mert = mert_override ? *mert_override
                             : pseudo_embedding(PseudoKind::mert, key, config.embedding_seed);
        vec = vec_override ? *vec_override
                           : pseudo_embedding(PseudoKind::vec, key, config.embedding_seed);
    }
    if (mert.numel() != pseudo_dim(PseudoKind::mert)) {
        throw std::runtime_error("mert prior embedding must have 1024 elements");
    }
    if (vec.numel() != pseudo_dim(PseudoKind::vec)) {
        throw std::runtime_error("vec prior embedding must have 1024 elements");
    }

    SynthesisResult result;
    if (config.q == 0) {
        result.mel = coarse;
    } else {
        DenoiserFn fn = [&](const TensorData& mt, int t) {
            return denoiser
                .forward(nn::make_const(mt), nn::make_const(content_mat),
                         step_embedding(t, nn::DenoiserModel::kStepDim), mert, vec)
                ->value;
        };
        Rng rng(derive_seed(config.seed, "sample:" + score.utterance_id));
        result.mel = sample(fn, coarse, config.q, schedule, rng);
    }
    result.wave = griffin_lim(denormalize_mel(result.mel, mel_config), mel_config,
                              config.vocoder_iterations,
                              derive_seed(config.seed, "vocode:" + score.utterance_id));
    return result;
}

} // namespace svskit::pipeline
