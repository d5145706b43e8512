#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "svskit/autodiff.hpp"
#include "svskit/mel.hpp"

namespace svskit::nn {

/// Named parameter collection with deterministic, order-independent
/// initialization: each tensor is drawn from a Gaussian seeded by
/// (seed, name), scaled by 1/sqrt(fan_in) unless overridden.
class ParamStore {
public:
    VarPtr add(const std::string& name, std::vector<std::size_t> shape,
               std::uint64_t seed, double scale);
    VarPtr add_zeros(const std::string& name, std::vector<std::size_t> shape);
    VarPtr get(const std::string& name) const;
    bool has(const std::string& name) const { return params_.count(name) != 0; }
    const std::vector<std::string>& names() const { return order_; }

    void zero_grad();
    double grad_norm() const;
    /// Scales all gradients so their global L2 norm is at most max_norm.
    void clip_grad_norm(double max_norm);
    void set_requires_grad(bool enabled);
    std::size_t total_elements() const;

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, VarPtr> params_;
};

/// Linear map of an embedding (rank-1 [K] or batch [N,K]) through weight
/// [K,M] plus bias [M].
VarPtr project(const VarPtr& e, const VarPtr& weight, const VarPtr& bias);

/// Element-wise sum of three same-dimension embeddings.
VarPtr fuse_embeddings(const VarPtr& a, const VarPtr& b, const VarPtr& c);

/// Coarse mel decoder: two learned 768->256 projections fuse word and phone
/// embeddings with the 256-dim score-token embedding, and a four-layer
/// 1-D conv stack (256 -> 128 -> 128 -> 128 -> 80, kernel 3, tanh throughout)
/// maps per-frame content vectors to a normalized mel estimate in (-1, 1).
class AuxModel {
public:
    explicit AuxModel(std::uint64_t seed);

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    /// [R,768] word + [R,768] phone + [R,256] score rows -> [R,256].
    VarPtr content_rows(const VarPtr& e_word, const VarPtr& e_phone, const VarPtr& e_score) const;
    /// Per-frame content [N,256] -> normalized mel estimate [N,80].
    VarPtr decode(const VarPtr& content_frames) const;
    /// Full pass: row embeddings expanded to frames by counts, then decoded.
    VarPtr forward(const TensorData& e_word, const TensorData& e_phone,
                   const TensorData& e_score, const std::vector<std::size_t>& frame_counts) const;

    static constexpr std::size_t kEmbedDim = 768;
    static constexpr std::size_t kContentDim = 256;
    static constexpr std::size_t kHidden = 128;
    static constexpr std::size_t kMels = 80;

private:
    ParamStore params_;
};

/// Conditional noise predictor for the diffusion decoder. The noisy mel is
/// lifted to a 128-dim hidden sequence; content, step, and the two
/// utterance-level prior embeddings are each projected to 128 and added as
/// conditioning; six residual conv blocks (h += tanh(conv(h) + cond)) and a
/// linear head produce the predicted noise.
class DenoiserModel {
public:
    explicit DenoiserModel(std::uint64_t seed);

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    VarPtr forward(const VarPtr& noisy_mel, const VarPtr& content_frames,
                   const TensorData& step_embed, const TensorData& mert_embed,
                   const TensorData& vec_embed) const;

    static constexpr std::size_t kMels = 80;
    static constexpr std::size_t kHidden = 128;
    static constexpr std::size_t kContentDim = 256;
    static constexpr std::size_t kPriorDim = 1024;
    static constexpr std::size_t kStepDim = 128;
    static constexpr std::size_t kBlocks = 6;

private:
    ParamStore params_;
};

/// Frozen seeded style reference: a small 2-D conv net (channels
/// 1->4->8->8->16, two convs per block with a residual connection, 2x2
/// average pooling) followed by global average pooling and a linear head to
/// a 48-dim style vector. Weights never receive gradients; the style loss
/// differentiates through the input.
class StyleEncoder {
public:
    explicit StyleEncoder(std::uint64_t seed);

    /// Normalized mel [N,80] -> style vector [48].
    VarPtr forward(const VarPtr& mel) const;
    TensorData embed(const TensorData& mel) const;

    static constexpr std::size_t kStyleDim = 48;

private:
    ParamStore params_;
    std::vector<std::size_t> channels_;
};

/// Differentiable pitch reader: a sharp row-wise softmax over mel bands
/// (temperature 0.05) weighted by the band center frequencies gives a
/// per-frame f0 estimate in Hz.
class PitchProxy {
public:
    explicit PitchProxy(const MelConfig& config, double temperature = 0.05);

    /// Normalized mel [N,80] -> f0 estimate [N] (Hz).
    VarPtr forward(const VarPtr& mel) const;
    TensorData estimate(const TensorData& mel) const;

    double temperature() const { return temperature_; }

private:
    TensorData centers_; // [n_mels, 1]
    double temperature_;
};

} // namespace svskit::nn
