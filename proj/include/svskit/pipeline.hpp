#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svskit/diffusion.hpp"
#include "svskit/mel.hpp"
#include "svskit/score.hpp"
#include "svskit/train.hpp"

namespace svskit::pipeline {

/// Per-row conditioning inputs assembled from a score: stand-in word and
/// phone embeddings, score-token embeddings, and the frame count each row
/// spans at the mel frame rate.
struct ScoreEmbeddings {
    TensorData e_word;                     // [R, 768]
    TensorData e_phone;                    // [R, 768]
    TensorData e_score;                    // [R, 256]
    std::vector<std::size_t> frame_counts; // length R
};

/// Builds row embeddings for a score. Words come from the score text (token
/// i of R rows maps to word floor(i * W / R)); frame counts follow the
/// cumulative phone durations rounded to the mel frame rate. When
/// target_frames is non-zero the counts are adjusted (from the last rows
/// backwards) so they sum to it exactly.
ScoreEmbeddings score_embeddings(const MusicScore& score, std::uint64_t seed,
                                 const MelConfig& mel_config, std::size_t target_frames = 0);

/// Prepares a coarse-decoder training sample: embeddings sized to the
/// reference mel, plus the frozen style vector and pitch-proxy reading of
/// the reference.
nn::AuxSample make_aux_sample(const MusicScore& score, const TensorData& mel_norm,
                              const nn::StyleEncoder& style_encoder,
                              const nn::PitchProxy& pitch_proxy, std::uint64_t seed,
                              const MelConfig& mel_config);

/// Per-frame content matrix [N, 256] for a score under a trained coarse
/// model (values only, no gradient graph).
TensorData content_frames(const nn::AuxModel& aux, const MusicScore& score,
                          std::uint64_t seed, const MelConfig& mel_config,
                          std::size_t target_frames = 0);

struct SynthesisConfig {
    int q = 60;                 // reverse-process start step; 0 bypasses it
    int vocoder_iterations = 32;
    std::uint64_t seed = 1234;
    std::uint64_t embedding_seed = 1234; // seed for stand-in embeddings
};

struct SynthesisResult {
    TensorData mel;            // [N, 80] normalized
    std::vector<double> wave;  // vocoded audio
};

/// Full inference for one utterance: coarse mel from the aux decoder, prior
/// embeddings from its vocoded draft (unless overridden), shallow-start
/// reverse diffusion, then phase-retrieval vocoding of the refined mel.
SynthesisResult synthesize(const MusicScore& score, const nn::AuxModel& aux,
                           const nn::DenoiserModel& denoiser,
                           const DiffusionSchedule& schedule, const MelConfig& mel_config,
                           const SynthesisConfig& config,
                           const TensorData* mert_override = nullptr,
                           const TensorData* vec_override = nullptr);

} // namespace svskit::pipeline
