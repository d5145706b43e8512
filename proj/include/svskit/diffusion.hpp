#pragma once

#include <functional>
#include <vector>

#include "svskit/rng.hpp"
#include "svskit/tensor.hpp"

namespace svskit {

/// Noise schedule for a T-step denoising diffusion process. Vectors are
/// indexed by t-1 for step t in [1, T]. alpha_bar is the running product of
/// alpha; sigma is the posterior standard deviation with the convention
/// alpha_bar(0) = 1, which makes sigma(1) = 0.
struct DiffusionSchedule {
    int steps = 0;
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> alpha_bar;
    std::vector<double> sigma;

    double beta_at(int t) const;
    double alpha_at(int t) const;
    double alpha_bar_at(int t) const;  // accepts t = 0, returning 1
    double sigma_at(int t) const;
};

/// Linearly spaced beta from beta_start at t=1 to beta_end at t=T.
DiffusionSchedule make_schedule(int steps = 100, double beta_start = 1e-4,
                                double beta_end = 6e-2);

/// Forward corruption: sqrt(alpha_bar_t) * m0 + sqrt(1 - alpha_bar_t) * eps.
TensorData q_sample(const TensorData& m0, int t, const TensorData& eps,
                    const DiffusionSchedule& schedule);

/// One reverse update from step t to t-1 given the predicted noise eps_hat
/// and a standard-normal draw z (ignored at t = 1, where sigma is zero).
TensorData reverse_step(const TensorData& mt, const TensorData& eps_hat, int t,
                        const TensorData& z, const DiffusionSchedule& schedule);

/// Noise predictor interface: maps (m_t, t) to predicted eps. Conditioning
/// enters through whatever state the callable closes over.
using DenoiserFn = std::function<TensorData(const TensorData&, int)>;

/// Initializes the reverse process at step q from a coarse estimate m_hat
/// (forward-corrupts it to the q-th marginal).
TensorData shallow_diffusion_init(const TensorData& m_hat, int q,
                                  const DiffusionSchedule& schedule, Rng& rng);

/// Runs the reverse process from step q down to 1 starting from the
/// shallow-diffusion initialization of m_hat, then clips to [-1, 1].
/// q = 0 returns m_hat unchanged.
TensorData sample(const DenoiserFn& denoiser, const TensorData& m_hat, int q,
                  const DiffusionSchedule& schedule, Rng& rng);

} // namespace svskit
