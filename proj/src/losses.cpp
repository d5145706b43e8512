#include "svskit/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace svskit {

namespace {

constexpr double kVarEps = 1e-8;

void require_equal_length(std::size_t a, std::size_t b, const char* who) {
    if (a != b || a == 0) {
        throw std::runtime_error(std::string(who) + ": sequences must be equally long and non-empty");
    }
}

} // namespace

CCCStats ccc(std::span<const double> x, std::span<const double> y) {
    require_equal_length(x.size(), y.size(), "ccc");
    const double k = static_cast<double>(x.size());
    CCCStats s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s.mean_x += x[i];
        s.mean_y += y[i];
    }
    s.mean_x /= k;
    s.mean_y /= k;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - s.mean_x;
        const double dy = y[i] - s.mean_y;
        s.var_x += dx * dx;
        s.var_y += dy * dy;
        s.covariance += dx * dy;
    }
    s.var_x /= k;
    s.var_y /= k;
    s.covariance /= k;

    if (s.var_x > kVarEps && s.var_y > kVarEps) {
        s.rho = s.covariance / std::sqrt(s.var_x * s.var_y);
    }
    const double mean_diff = s.mean_x - s.mean_y;
    const double denom = s.var_x + s.var_y + mean_diff * mean_diff;
    if (denom > kVarEps) {
        s.ccc = 2.0 * s.covariance / denom;
    } else {
        s.ccc = mean_diff * mean_diff <= kVarEps ? 1.0 : 0.0;
    }
    return s;
}

double pitch_loss(std::span<const double> x, std::span<const double> y, double floor) {
    require_equal_length(x.size(), y.size(), "pitch_loss");
    const CCCStats s = ccc(x, y);
    double mse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        mse += d * d;
    }
    mse /= static_cast<double>(x.size());
    return std::max(1.0 - s.ccc, floor) * mse;
}

double style_loss(std::span<const double> a, std::span<const double> b) {
    require_equal_length(a.size(), b.size(), "style_loss");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

double mean_absolute_error(const TensorData& a, const TensorData& b) {
    if (!same_shape(a, b) || a.numel() == 0) {
        throw std::runtime_error("mean_absolute_error: shapes must match and be non-empty");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.numel());
}

double mean_squared_error(const TensorData& a, const TensorData& b) {
    if (!same_shape(a, b) || a.numel() == 0) {
        throw std::runtime_error("mean_squared_error: shapes must match and be non-empty");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.numel());
}

namespace nn {

using namespace svskit::nn;

VarPtr mse_op(const VarPtr& a, const VarPtr& b) {
    VarPtr d = sub(a, b);
    return mean(mul(d, d));
}

VarPtr mae_op(const VarPtr& a, const VarPtr& b) {
    return mean(svskit::nn::abs(sub(a, b)));
}

VarPtr ccc_op(const VarPtr& x, const VarPtr& y) {
    if (x->numel() != y->numel() || x->numel() == 0) {
        throw std::runtime_error("ccc_op: sequences must be equally long and non-empty");
    }
    VarPtr mx = mean(x);
    VarPtr my = mean(y);
    VarPtr xc = broadcast_sub(x, mx);
    VarPtr yc = broadcast_sub(y, my);
    VarPtr var_x = mean(mul(xc, xc));
    VarPtr var_y = mean(mul(yc, yc));
    VarPtr cov = mean(mul(xc, yc));
    VarPtr mean_diff = sub(mx, my);
    VarPtr denom = add(add(var_x, var_y), mul(mean_diff, mean_diff));
    if (denom->value[0] <= kVarEps) {
        // Degenerate denominator: constant result, no useful gradient.
        const double md = mean_diff->value[0];
        return make_const(TensorData({1}, md * md <= kVarEps ? 1.0 : 0.0));
    }
    return div(affine(cov, 2.0, 0.0), denom);
}

VarPtr pitch_loss_op(const VarPtr& x, const VarPtr& y, double floor) {
    VarPtr one_minus = affine(ccc_op(x, y), -1.0, 1.0);
    VarPtr factor = max_with(one_minus, floor);
    return mul(factor, mse_op(x, y));
}

VarPtr style_loss_op(const VarPtr& a, const VarPtr& b) { return mse_op(a, b); }

AuxLoss aux_total_cached(const VarPtr& mel_hat, const TensorData& mel_ref,
                         const StyleEncoder& style_encoder, const PitchProxy& pitch_proxy,
                         const TensorData& ref_style, const TensorData& ref_f0,
                         const AuxLossWeights& weights) {
    if (!same_shape(mel_hat->value, mel_ref)) {
        throw std::runtime_error("aux_total: predicted and reference mel shapes differ");
    }
    AuxLoss out;
    out.l1 = mae_op(mel_hat, make_const(mel_ref));
    out.style = style_loss_op(style_encoder.forward(mel_hat), make_const(ref_style));
    out.pitch = pitch_loss_op(pitch_proxy.forward(mel_hat), make_const(ref_f0));
    out.total = add(add(affine(out.l1, weights.l1, 0.0), affine(out.style, weights.style, 0.0)),
                    affine(out.pitch, weights.pitch, 0.0));
    return out;
}

AuxLoss aux_total(const VarPtr& mel_hat, const TensorData& mel_ref,
                  const StyleEncoder& style_encoder, const PitchProxy& pitch_proxy,
                  const AuxLossWeights& weights) {
    return aux_total_cached(mel_hat, mel_ref, style_encoder, pitch_proxy,
                            style_encoder.embed(mel_ref), pitch_proxy.estimate(mel_ref),
                            weights);
}

} // namespace nn

} // namespace svskit
