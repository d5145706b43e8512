#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "svskit/diffusion.hpp"
#include "svskit/embeddings.hpp"
#include "svskit/mel.hpp"
#include "svskit/networks.hpp"
#include "svskit/pipeline.hpp"
#include "svskit/rng.hpp"
#include "svskit/score.hpp"

using namespace svskit;

namespace {

MusicScore demo_score() {
    MusicScore s;
    s.utterance_id = "demo_000";
    s.text = "la li";
    s.phones = {"l", "a", "l", "i"};
    s.notes = {57, 57, 59, 59};
    s.note_durations = {0.10, 0.30, 0.12, 0.28};
    s.phone_durations = {0.10, 0.30, 0.12, 0.28};
    s.slurs = {0, 0, 0, 0};
    return s;
}

} // namespace

TEST_CASE("score embeddings carry one row per score row with the documented dims") {
    const MusicScore score = demo_score();
    MelConfig config;
    const pipeline::ScoreEmbeddings emb = pipeline::score_embeddings(score, 7, config);
    REQUIRE(emb.e_word.shape == std::vector<std::size_t>{4, 768});
    REQUIRE(emb.e_phone.shape == std::vector<std::size_t>{4, 768});
    REQUIRE(emb.e_score.shape == std::vector<std::size_t>{4, 256});
    REQUIRE(emb.frame_counts.size() == 4);

    // frame counts follow the phone durations at the mel frame rate
    const double total_seconds =
        std::accumulate(score.phone_durations.begin(), score.phone_durations.end(), 0.0);
    const std::size_t total =
        std::accumulate(emb.frame_counts.begin(), emb.frame_counts.end(), std::size_t{0});
    const double frame_seconds =
        static_cast<double>(config.hop_length) / static_cast<double>(config.sample_rate);
    CHECK(std::fabs(static_cast<double>(total) * frame_seconds - total_seconds) <
          2.0 * frame_seconds);

    // deterministic in the seed
    const pipeline::ScoreEmbeddings again = pipeline::score_embeddings(score, 7, config);
    CHECK(emb.e_word.data == again.e_word.data);
    const pipeline::ScoreEmbeddings other = pipeline::score_embeddings(score, 8, config);
    CHECK(emb.e_word.data != other.e_word.data);
}

TEST_CASE("score embeddings honor an exact frame target") {
    const MusicScore score = demo_score();
    MelConfig config;
    for (std::size_t target : {40ul, 97ul, 120ul}) {
        const pipeline::ScoreEmbeddings emb = pipeline::score_embeddings(score, 7, config, target);
        const std::size_t total =
            std::accumulate(emb.frame_counts.begin(), emb.frame_counts.end(), std::size_t{0});
        CHECK(total == target);
    }
}

TEST_CASE("identical phones in different rows share the phone embedding but not the score token") {
    MusicScore score = demo_score(); // rows 0 and 2 are both phone "l"
    score.notes = {57, 57, 59, 59};
    MelConfig config;
    const pipeline::ScoreEmbeddings emb = pipeline::score_embeddings(score, 7, config);
    // phone embedding depends only on the phone label
    for (std::size_t c = 0; c < 768; ++c) {
        REQUIRE(emb.e_phone(0, c) == emb.e_phone(2, c));
    }
    // score token additionally encodes the note, so the rows differ
    bool any_diff = false;
    for (std::size_t c = 0; c < 256; ++c) {
        if (emb.e_score(0, c) != emb.e_score(2, c)) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("aux sample assembly matches the reference mel and proxy readings") {
    const MusicScore score = demo_score();
    MelConfig config;
    nn::StyleEncoder style_enc(5);
    nn::PitchProxy proxy(config);

    Rng rng(1);
    TensorData mel({50, 80});
    rng.fill_gaussian(mel, 0.3);
    for (double& v : mel.data) v = std::tanh(v);

    const nn::AuxSample sample = pipeline::make_aux_sample(score, mel, style_enc, proxy, 7, config);
    CHECK(sample.utterance_id == "demo_000");
    CHECK(sample.mel.data == mel.data);
    CHECK(sample.style_ref.data == style_enc.embed(mel).data);
    CHECK(sample.f0_ref.data == proxy.estimate(mel).data);
    const std::size_t total =
        std::accumulate(sample.frame_counts.begin(), sample.frame_counts.end(), std::size_t{0});
    CHECK(total == 50); // counts stretched to the reference length
    REQUIRE(sample.e_word.shape == std::vector<std::size_t>{4, 768});
}

TEST_CASE("content frames expand rows to the per-frame matrix") {
    const MusicScore score = demo_score();
    MelConfig config;
    nn::AuxModel aux(3);
    const TensorData content = pipeline::content_frames(aux, score, 7, config, 64);
    REQUIRE(content.shape == std::vector<std::size_t>{64, 256});
    // deterministic
    CHECK(content.data == pipeline::content_frames(aux, score, 7, config, 64).data);
}

TEST_CASE("synthesis produces a normalized mel and matching vocoded length") {
    const MusicScore score = demo_score();
    MelConfig config;
    nn::AuxModel aux(3);
    nn::DenoiserModel denoiser(4);
    const DiffusionSchedule schedule = make_schedule();

    pipeline::SynthesisConfig syn;
    syn.q = 4;                  // a short reverse pass keeps the test quick
    syn.vocoder_iterations = 2;
    syn.seed = 10;

    const pipeline::SynthesisResult out =
        pipeline::synthesize(score, aux, denoiser, schedule, config, syn);
    REQUIRE(out.mel.rank() == 2);
    CHECK(out.mel.cols() == 80);
    CHECK(out.mel.rows() > 0);
    for (double v : out.mel.data) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    const std::size_t frames = out.mel.rows();
    const std::size_t expected_samples =
        (frames - 1) * static_cast<std::size_t>(config.hop_length) +
        static_cast<std::size_t>(config.win_length);
    CHECK(out.wave.size() == expected_samples);
}

TEST_CASE("synthesis with q=0 returns the coarse decoder output unchanged") {
    const MusicScore score = demo_score();
    MelConfig config;
    nn::AuxModel aux(3);
    nn::DenoiserModel denoiser(4);
    const DiffusionSchedule schedule = make_schedule();

    pipeline::SynthesisConfig syn;
    syn.q = 0;
    syn.vocoder_iterations = 1;
    syn.seed = 10;
    const pipeline::SynthesisResult bypass =
        pipeline::synthesize(score, aux, denoiser, schedule, config, syn);

    // the coarse mel is the aux forward pass at the same embedding seed
    const pipeline::ScoreEmbeddings emb =
        pipeline::score_embeddings(score, syn.embedding_seed, config);
    auto coarse = aux.forward(emb.e_word, emb.e_phone, emb.e_score, emb.frame_counts);
    CHECK(bypass.mel.data == coarse->value.data);
}

TEST_CASE("synthesis is deterministic per seed and varies across seeds") {
    const MusicScore score = demo_score();
    MelConfig config;
    nn::AuxModel aux(3);
    nn::DenoiserModel denoiser(4);
    const DiffusionSchedule schedule = make_schedule();

    pipeline::SynthesisConfig syn;
    syn.q = 3;
    syn.vocoder_iterations = 2;
    syn.seed = 11;
    const auto a = pipeline::synthesize(score, aux, denoiser, schedule, config, syn);
    const auto b = pipeline::synthesize(score, aux, denoiser, schedule, config, syn);
    CHECK(a.mel.data == b.mel.data);
    CHECK(a.wave == b.wave);

    pipeline::SynthesisConfig syn2 = syn;
    syn2.seed = 12;
    const auto c = pipeline::synthesize(score, aux, denoiser, schedule, config, syn2);
    CHECK(a.mel.data != c.mel.data);
}

TEST_CASE("prior overrides change the refined mel") {
    const MusicScore score = demo_score();
    MelConfig config;
    nn::AuxModel aux(3);
    nn::DenoiserModel denoiser(4);
    const DiffusionSchedule schedule = make_schedule();

    pipeline::SynthesisConfig syn;
    syn.q = 3;
    syn.vocoder_iterations = 1;
    syn.seed = 13;
    const auto baseline = pipeline::synthesize(score, aux, denoiser, schedule, config, syn);
    const TensorData mert = pseudo_embedding(PseudoKind::mert, "someone-else", 99);
    const TensorData vec = pseudo_embedding(PseudoKind::vec, "someone-else", 99);
    const auto overridden =
        pipeline::synthesize(score, aux, denoiser, schedule, config, syn, &mert, &vec);
    CHECK(baseline.mel.data != overridden.mel.data);
}
