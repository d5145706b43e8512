#pragma once

#include <cstdint>
#include <vector>

#include "svskit/mel.hpp"
#include "svskit/tensor.hpp"

namespace svskit {

/// Phase-retrieval waveform reconstruction from an (unnormalized) log-mel
/// spectrogram. The mel magnitudes are projected back onto linear frequency
/// bins via the transposed filterbank, phases start from a seeded random
/// state, and `iterations` STFT/iSTFT consistency rounds refine them
/// (iterations = 0 yields the plain seeded-phase inverse transform).
/// Output length is (frames - 1) * hop + win samples.
std::vector<double> griffin_lim(const TensorData& log_mel, const MelConfig& config,
                                int iterations = 32, std::uint64_t seed = 0);

} // namespace svskit
