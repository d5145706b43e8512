#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "svskit/diffusion.hpp"
#include "svskit/losses.hpp"
#include "svskit/networks.hpp"

namespace svskit::nn {

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/// Adam with decoupled weight decay and bias correction. Moment buffers are
/// created on first use, keyed by parameter name.
class AdamW {
public:
    explicit AdamW(AdamWConfig config = {}) : config_(config) {}

    void step(ParamStore& params);

    const AdamWConfig& config() const { return config_; }
    std::uint64_t step_count() const { return step_count_; }
    void set_step_count(std::uint64_t n) { step_count_ = n; }
    std::unordered_map<std::string, TensorData>& moment1() { return m_; }
    std::unordered_map<std::string, TensorData>& moment2() { return v_; }
    const std::unordered_map<std::string, TensorData>& moment1() const { return m_; }
    const std::unordered_map<std::string, TensorData>& moment2() const { return v_; }

private:
    AdamWConfig config_;
    std::uint64_t step_count_ = 0;
    std::unordered_map<std::string, TensorData> m_;
    std::unordered_map<std::string, TensorData> v_;
};

struct TrainConfig {
    std::size_t iterations = 2000;
    std::size_t batch_size = 1;
    std::uint64_t seed = 1234;
    AdamWConfig adamw;
    AuxLossWeights weights;
    /// Global gradient-norm ceiling applied before every optimizer step.
    double clip_norm = 1.0;
    std::size_t start_iteration = 0; // resume offset for logging
};

/// One utterance prepared for coarse-decoder training.
struct AuxSample {
    std::string utterance_id;
    TensorData e_word;                      // [R, 768]
    TensorData e_phone;                     // [R, 768]
    TensorData e_score;                     // [R, 256]
    std::vector<std::size_t> frame_counts;  // per score row, sums to N
    TensorData mel;                         // [N, 80] normalized reference
    TensorData style_ref;                   // [48]
    TensorData f0_ref;                      // [N]
};

/// One utterance prepared for denoiser training (content is frozen).
struct DenoiserSample {
    std::string utterance_id;
    TensorData content;  // [N, 256]
    TensorData mel;      // [N, 80] normalized reference
    TensorData mert;     // [1024]
    TensorData vec;      // [1024]
};

struct TrainStats {
    std::size_t iterations_run = 0;
    double last_l1 = 0.0;
    double last_style = 0.0;
    double last_pitch = 0.0;
    double last_total = 0.0;
};

/// Coarse-decoder training loop: round-robin over samples, batch-averaged
/// gradients, global-norm clipping, AdamW. Writes one CSV row per iteration
/// ("iteration,l1,style,pitch,total") when csv is non-null. Non-finite
/// values anywhere raise std::runtime_error (the caller decides how to dump state).
TrainStats train_aux(AuxModel& model, const StyleEncoder& style_encoder,
                     const PitchProxy& pitch_proxy, const std::vector<AuxSample>& samples,
                     AdamW& optimizer, const TrainConfig& config, std::ostream* csv);

/// Denoiser training loop: per step draws an utterance (round-robin), a
/// uniform diffusion step t, Gaussian noise, corrupts the reference mel, and
/// minimizes mean absolute error between predicted and true noise. CSV rows
/// are "iteration,denoise".
TrainStats train_denoiser(DenoiserModel& model, const DiffusionSchedule& schedule,
                          const std::vector<DenoiserSample>& samples, AdamW& optimizer,
                          const TrainConfig& config, std::ostream* csv);

} // namespace svskit::nn
