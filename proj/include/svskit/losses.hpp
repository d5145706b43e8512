#pragma once

#include <span>

#include "svskit/autodiff.hpp"
#include "svskit/networks.hpp"
#include "svskit/tensor.hpp"

namespace svskit {

/// Concordance statistics between two equally long sequences. Variances and
/// the covariance use the population convention (divide by K). When the
/// denominator degenerates (both sequences constant, guard 1e-8), the
/// concordance is 1 for equal means and 0 otherwise; rho is 0 whenever
/// either variance degenerates.
struct CCCStats {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double covariance = 0.0;
    double rho = 0.0;
    double ccc = 0.0;
};

CCCStats ccc(std::span<const double> x, std::span<const double> y);

/// Concordance-weighted pitch distance in Hz:
///   max(1 - ccc(x, y), floor) * mse(x, y), floor = 0.01.
double pitch_loss(std::span<const double> x, std::span<const double> y, double floor = 0.01);

/// Mean squared distance between two style vectors.
double style_loss(std::span<const double> a, std::span<const double> b);

double mean_absolute_error(const TensorData& a, const TensorData& b);
double mean_squared_error(const TensorData& a, const TensorData& b);
inline double l1_loss(const TensorData& a, const TensorData& b) { return mean_absolute_error(a, b); }
inline double denoise_loss(const TensorData& eps, const TensorData& eps_hat) {
    return mean_absolute_error(eps, eps_hat);
}

namespace nn {

using svskit::nn::VarPtr;

VarPtr mse_op(const VarPtr& a, const VarPtr& b);
VarPtr mae_op(const VarPtr& a, const VarPtr& b);
/// Differentiable concordance; value matches ccc().ccc on the same inputs.
/// Degenerate denominators fall back to the constant convention above
/// (no gradient in that branch).
VarPtr ccc_op(const VarPtr& x, const VarPtr& y);
VarPtr pitch_loss_op(const VarPtr& x, const VarPtr& y, double floor = 0.01);
VarPtr style_loss_op(const VarPtr& a, const VarPtr& b);

struct AuxLoss {
    VarPtr l1;
    VarPtr style;
    VarPtr pitch;
    VarPtr total;
};

struct AuxLossWeights {
    double l1 = 1.0;
    double style = 1.0;
    double pitch = 1.0;
};

/// Combined coarse-decoder objective against a reference mel: L1 on the mel,
/// mse between style vectors, and the concordance-weighted pitch distance
/// between pitch-proxy readings. Component values are unweighted; total is
/// the weighted sum that training optimizes.
AuxLoss aux_total(const VarPtr& mel_hat, const TensorData& mel_ref,
                  const svskit::nn::StyleEncoder& style_encoder,
                  const svskit::nn::PitchProxy& pitch_proxy,
                  const AuxLossWeights& weights = {});

/// Same objective with the reference style vector and pitch reading supplied
/// by the caller (they are constants, so computing them once is cheaper).
AuxLoss aux_total_cached(const VarPtr& mel_hat, const TensorData& mel_ref,
                         const svskit::nn::StyleEncoder& style_encoder,
                         const svskit::nn::PitchProxy& pitch_proxy,
                         const TensorData& ref_style, const TensorData& ref_f0,
                         const AuxLossWeights& weights = {});

} // namespace nn

} // namespace svskit
