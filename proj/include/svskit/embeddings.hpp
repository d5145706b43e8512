#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "svskit/tensor.hpp"

namespace svskit {

/// Stand-in embedding families for the large pre-trained encoders. Each kind
/// has a fixed dimensionality matching the encoder it replaces.
enum class PseudoKind { word, phone, mert, vec };

const char* pseudo_kind_name(PseudoKind kind);
PseudoKind pseudo_kind_from_name(const std::string& name);
std::size_t pseudo_dim(PseudoKind kind);

/// Deterministic unit-norm vector derived from (kind, key, seed): the hash
/// of the inputs seeds a Gaussian draw which is then L2-normalized. Calls
/// with equal arguments are bit-identical across processes.
TensorData pseudo_embedding(PseudoKind kind, const std::string& key, std::uint64_t seed);

/// Sinusoidal diffusion-step encoding of dimension dim (even): index 2i
/// holds sin(t / 10000^(2i/dim)), index 2i+1 the matching cos. t = 0 yields
/// [0, 1, 0, 1, ...].
TensorData step_embedding(int t, std::size_t dim = 128);

/// Deterministic unit-norm 256-dim vector for one score row, keyed by
/// (phone, note, slur flag, seed). Stands in for a learned score encoder.
TensorData score_token_embedding(const std::string& phone, int note, int slur,
                                 std::uint64_t seed);

/// FNV-1a digest of audio quantized to 16-bit samples; used to key
/// pseudo-embeddings derived from waveforms.
std::uint64_t audio_digest(std::span<const double> wave);

} // namespace svskit
