#include "svskit/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svskit {

namespace {

void check_step(int t, const DiffusionSchedule& s, const char* who) {
    if (t < 1 || t > s.steps) {
        throw std::runtime_error(std::string(who) + ": step " + std::to_string(t) +
                                 " outside [1, " + std::to_string(s.steps) + "]");
    }
}

} // namespace

double DiffusionSchedule::beta_at(int t) const {
    check_step(t, *this, "beta_at");
    return beta[static_cast<std::size_t>(t - 1)];
}

double DiffusionSchedule::alpha_at(int t) const {
    check_step(t, *this, "alpha_at");
    return alpha[static_cast<std::size_t>(t - 1)];
}

double DiffusionSchedule::alpha_bar_at(int t) const {
    if (t == 0) return 1.0;
    check_step(t, *this, "alpha_bar_at");
    return alpha_bar[static_cast<std::size_t>(t - 1)];
}

double DiffusionSchedule::sigma_at(int t) const {
    check_step(t, *this, "sigma_at");
    return sigma[static_cast<std::size_t>(t - 1)];
}

DiffusionSchedule make_schedule(int steps, double beta_start, double beta_end) {
    if (steps < 1) throw std::runtime_error("schedule needs at least one step");
    if (!(0.0 < beta_start && beta_start <= beta_end && beta_end < 1.0)) {
        throw std::runtime_error("schedule needs 0 < beta_start <= beta_end < 1");
    }
    DiffusionSchedule s;
    s.steps = steps;
    s.beta.resize(static_cast<std::size_t>(steps));
    s.alpha.resize(static_cast<std::size_t>(steps));
    s.alpha_bar.resize(static_cast<std::size_t>(steps));
    s.sigma.resize(static_cast<std::size_t>(steps));
    double running = 1.0;
    for (int t = 1; t <= steps; ++t) {
        const std::size_t i = static_cast<std::size_t>(t - 1);
        double b;
        if (t == 1 || steps == 1) {
            b = beta_start;
        } else if (t == steps) {
            b = beta_end;  // endpoints exact regardless of rounding
        } else {
            b = beta_start + (beta_end - beta_start) * static_cast<double>(t - 1) /
                                 static_cast<double>(steps - 1);
        }
        s.beta[i] = b;
        s.alpha[i] = 1.0 - b;
        double prev_bar = running;
        running *= s.alpha[i];
        s.alpha_bar[i] = running;
        // Posterior variance ((1 - alpha_bar_{t-1}) / (1 - alpha_bar_t)) * beta_t.
        s.sigma[i] = std::sqrt((1.0 - prev_bar) / (1.0 - running) * b);
    }
    return s;
}

TensorData q_sample(const TensorData& m0, int t, const TensorData& eps,
                    const DiffusionSchedule& schedule) {
    check_step(t, schedule, "q_sample");
    if (!same_shape(m0, eps)) {
        throw std::runtime_error("q_sample: m0 " + shape_string(m0.shape) + " vs eps " +
                                 shape_string(eps.shape));
    }
    const double abar = schedule.alpha_bar_at(t);
    const double a = std::sqrt(abar);
    const double b = std::sqrt(1.0 - abar);
    TensorData out = m0;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a * m0[i] + b * eps[i];
    return out;
}

TensorData reverse_step(const TensorData& mt, const TensorData& eps_hat, int t,
                        const TensorData& z, const DiffusionSchedule& schedule) {
    check_step(t, schedule, "reverse_step");
    if (!same_shape(mt, eps_hat) || !same_shape(mt, z)) {
        throw std::runtime_error("reverse_step: mismatched shapes");
    }
    const double alpha = schedule.alpha_at(t);
    const double abar = schedule.alpha_bar_at(t);
    const double mean_scale = 1.0 / std::sqrt(alpha);
    const double eps_scale = (1.0 - alpha) / std::sqrt(1.0 - abar);
    const double noise = t == 1 ? 0.0 : schedule.sigma_at(t);
    TensorData out = mt;
    for (std::size_t i = 0; i < out.numel(); ++i) {
        out[i] = mean_scale * (mt[i] - eps_scale * eps_hat[i]) + noise * z[i];
    }
    return out;
}

TensorData shallow_diffusion_init(const TensorData& m_hat, int q,
                                  const DiffusionSchedule& schedule, Rng& rng) {
    check_step(q, schedule, "shallow_diffusion_init");
    TensorData eps = m_hat;
    rng.fill_gaussian(eps);
    return q_sample(m_hat, q, eps, schedule);
}

TensorData sample(const DenoiserFn& denoiser, const TensorData& m_hat, int q,
                  const DiffusionSchedule& schedule, Rng& rng) {
    if (q == 0) return m_hat;
    check_step(q, schedule, "sample");
    TensorData m = shallow_diffusion_init(m_hat, q, schedule, rng);
    TensorData z(m.shape);
    for (int t = q; t >= 1; --t) {
        TensorData eps_hat = denoiser(m, t);
        if (!same_shape(eps_hat, m)) {
            throw std::runtime_error("denoiser returned a mismatched shape");
        }
        if (t > 1) {
            rng.fill_gaussian(z);
        } else {
            std::fill(z.data.begin(), z.data.end(), 0.0);
        }
        m = reverse_step(m, eps_hat, t, z, schedule);
    }
    for (double& v : m.data) v = std::clamp(v, -1.0, 1.0);
    return m;
}

} // namespace svskit
