#include "svskit/train.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "svskit/embeddings.hpp"

namespace svskit::nn {

void AdamW::step(ParamStore& params) {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
    for (const std::string& name : params.names()) {
        VarPtr p = params.get(name);
        p->ensure_grad();
        TensorData& m = m_.try_emplace(name, TensorData(p->value.shape)).first->second;
        TensorData& v = v_.try_emplace(name, TensorData(p->value.shape)).first->second;
        if (!same_shape(m, p->value) || !same_shape(v, p->value)) {
            throw std::runtime_error("optimizer state shape mismatch for " + name);
        }
        for (std::size_t i = 0; i < p->value.numel(); ++i) {
            const double g = p->grad[i];
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p->value[i] -= config_.lr * (mhat / (std::sqrt(vhat) + config_.eps) +
                                         config_.weight_decay * p->value[i]);
            if (!std::isfinite(p->value[i])) {
                throw std::runtime_error("non-finite parameter after optimizer step: " + name);
            }
        }
    }
}

namespace {

void write_csv_row(std::ostream* csv, std::size_t iteration, const double* values,
                   std::size_t count) {
    if (!csv) return;
    char buf[256];
    int n = std::snprintf(buf, sizeof(buf), "%zu", iteration);
    std::string row(buf, static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < count; ++i) {
        n = std::snprintf(buf, sizeof(buf), ",%.8f", values[i]);
        row.append(buf, static_cast<std::size_t>(n));
    }
    (*csv) << row << '\n';
}

} // namespace

TrainStats train_aux(AuxModel& model, const StyleEncoder& style_encoder,
                     const PitchProxy& pitch_proxy, const std::vector<AuxSample>& samples,
                     AdamW& optimizer, const TrainConfig& config, std::ostream* csv) {
    if (samples.empty()) throw std::runtime_error("train_aux: no samples");
    if (config.batch_size == 0) throw std::runtime_error("train_aux: batch size must be positive");
    if (csv) (*csv) << "iteration,l1,style,pitch,total\n";

    TrainStats stats;
    std::size_t cursor = 0;
    for (std::size_t it = 1; it <= config.iterations; ++it) {
        model.params().zero_grad();
        double sum_l1 = 0.0, sum_style = 0.0, sum_pitch = 0.0, sum_total = 0.0;
        for (std::size_t b = 0; b < config.batch_size; ++b) {
            const AuxSample& s = samples[cursor];
            cursor = (cursor + 1) % samples.size();
            VarPtr mel_hat = model.forward(s.e_word, s.e_phone, s.e_score, s.frame_counts);
            AuxLoss loss = aux_total_cached(mel_hat, s.mel, style_encoder, pitch_proxy,
                                            s.style_ref, s.f0_ref, config.weights);
            sum_l1 += loss.l1->value[0];
            sum_style += loss.style->value[0];
            sum_pitch += loss.pitch->value[0];
            sum_total += loss.total->value[0];
            backward(affine(loss.total, 1.0 / static_cast<double>(config.batch_size), 0.0));
        }
        model.params().clip_grad_norm(config.clip_norm);
        optimizer.step(model.params());

        const double inv = 1.0 / static_cast<double>(config.batch_size);
        stats.last_l1 = sum_l1 * inv;
        stats.last_style = sum_style * inv;
        stats.last_pitch = sum_pitch * inv;
        stats.last_total = sum_total * inv;
        stats.iterations_run = it;
        const double row[4] = {stats.last_l1, stats.last_style, stats.last_pitch, stats.last_total};
        write_csv_row(csv, config.start_iteration + it, row, 4);
    }
    return stats;
}

TrainStats train_denoiser(DenoiserModel& model, const DiffusionSchedule& schedule,
                          const std::vector<DenoiserSample>& samples, AdamW& optimizer,
                          const TrainConfig& config, std::ostream* csv) {
    if (samples.empty()) throw std::runtime_error("train_denoiser: no samples");
    if (config.batch_size == 0) throw std::runtime_error("train_denoiser: batch size must be positive");
    if (csv) (*csv) << "iteration,denoise\n";

    Rng rng(derive_seed(config.seed, "train_denoiser"));
    TrainStats stats;
    std::size_t cursor = 0;
    for (std::size_t it = 1; it <= config.iterations; ++it) {
        model.params().zero_grad();
        double sum_loss = 0.0;
        for (std::size_t b = 0; b < config.batch_size; ++b) {
            const DenoiserSample& s = samples[cursor];
            cursor = (cursor + 1) % samples.size();
            const int t = rng.uniform_int(1, schedule.steps);
            TensorData eps(s.mel.shape);
            rng.fill_gaussian(eps);
            TensorData noisy = q_sample(s.mel, t, eps, schedule);
            VarPtr eps_hat = model.forward(make_const(std::move(noisy)), make_const(s.content),
                                           step_embedding(t, DenoiserModel::kStepDim),
                                           s.mert, s.vec);
            VarPtr loss = mae_op(eps_hat, make_const(std::move(eps)));
            sum_loss += loss->value[0];
            backward(affine(loss, 1.0 / static_cast<double>(config.batch_size), 0.0));
        }
        model.params().clip_grad_norm(config.clip_norm);
        optimizer.step(model.params());

        stats.last_total = sum_loss / static_cast<double>(config.batch_size);
        stats.iterations_run = it;
        write_csv_row(csv, config.start_iteration + it, &stats.last_total, 1);
    }
    return stats;
}

} // namespace svskit::nn
