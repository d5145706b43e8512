#include "svskit/networks.hpp"

#include <cmath>
#include <stdexcept>

namespace svskit::nn {

namespace {

double fan_in_scale(const std::vector<std::size_t>& shape) {
    // For [K,M] linear weights fan-in is K; for conv [Cout,Cin,...] it is
    // Cin times the kernel footprint.
    if (shape.size() == 2) return 1.0 / std::sqrt(static_cast<double>(shape[0]));
    std::size_t fan = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) fan *= shape[i];
    return 1.0 / std::sqrt(static_cast<double>(fan == 0 ? 1 : fan));
}

} // namespace

VarPtr ParamStore::add(const std::string& name, std::vector<std::size_t> shape,
                       std::uint64_t seed, double scale) {
    if (params_.count(name)) throw std::runtime_error("duplicate parameter: " + name);
    TensorData t(shape);
    Rng rng(derive_seed(seed, "init:" + name));
    rng.fill_gaussian(t, scale);
    VarPtr v = make_leaf(std::move(t), true);
    order_.push_back(name);
    params_[name] = v;
    return v;
}

VarPtr ParamStore::add_zeros(const std::string& name, std::vector<std::size_t> shape) {
    if (params_.count(name)) throw std::runtime_error("duplicate parameter: " + name);
    VarPtr v = make_leaf(TensorData(std::move(shape)), true);
    order_.push_back(name);
    params_[name] = v;
    return v;
}

VarPtr ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::runtime_error("unknown parameter: " + name);
    return it->second;
}

void ParamStore::zero_grad() {
    for (const std::string& name : order_) {
        VarPtr p = params_.at(name);
        p->ensure_grad();
        std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
    }
}

double ParamStore::grad_norm() const {
    double acc = 0.0;
    for (const std::string& name : order_) {
        const VarPtr& p = params_.at(name);
        if (p->grad.data.size() != p->value.data.size()) continue;
        for (double g : p->grad.data) acc += g * g;
    }
    return std::sqrt(acc);
}

void ParamStore::clip_grad_norm(double max_norm) {
    const double norm = grad_norm();
    if (norm <= max_norm || norm == 0.0) return;
    const double scale = max_norm / norm;
    for (const std::string& name : order_) {
        const VarPtr& p = params_.at(name);
        if (p->grad.data.size() != p->value.data.size()) continue;
        for (double& g : p->grad.data) g *= scale;
    }
}

void ParamStore::set_requires_grad(bool enabled) {
    for (const std::string& name : order_) params_.at(name)->requires_grad = enabled;
}

std::size_t ParamStore::total_elements() const {
    std::size_t n = 0;
    for (const std::string& name : order_) n += params_.at(name)->numel();
    return n;
}

VarPtr project(const VarPtr& e, const VarPtr& weight, const VarPtr& bias) {
    if (weight->value.rank() != 2 || bias->value.rank() != 1 ||
        bias->numel() != weight->value.cols()) {
        throw std::runtime_error("project: weight must be [K,M] with bias [M]");
    }
    if (e->value.rank() == 1) {
        if (e->numel() != weight->value.rows()) {
            throw std::runtime_error("project: embedding dim " + std::to_string(e->numel()) +
                                     " does not match weight rows " +
                                     std::to_string(weight->value.rows()));
        }
        VarPtr row = reshape(e, {1, e->numel()});
        VarPtr out = add_rowvec(matmul(row, weight), bias);
        return reshape(out, {bias->numel()});
    }
    if (e->value.rank() == 2) {
        return add_rowvec(matmul(e, weight), bias);
    }
    throw std::runtime_error("project: embedding must be rank 1 or 2");
}

VarPtr fuse_embeddings(const VarPtr& a, const VarPtr& b, const VarPtr& c) {
    if (!same_shape(a->value, b->value) || !same_shape(a->value, c->value)) {
        throw std::runtime_error("fuse_embeddings: dimensions differ (" +
                                 shape_string(a->value.shape) + ", " +
                                 shape_string(b->value.shape) + ", " +
                                 shape_string(c->value.shape) + ")");
    }
    return add(add(a, b), c);
}

AuxModel::AuxModel(std::uint64_t seed) {
    auto w = [&](const std::string& name, std::vector<std::size_t> shape) {
        params_.add(name, shape, seed, fan_in_scale(shape));
    };
    w("proj_word.weight", {kEmbedDim, kContentDim});
    params_.add_zeros("proj_word.bias", {kContentDim});
    w("proj_phone.weight", {kEmbedDim, kContentDim});
    params_.add_zeros("proj_phone.bias", {kContentDim});
    const std::size_t dims[5] = {kContentDim, kHidden, kHidden, kHidden, kMels};
    for (int layer = 0; layer < 4; ++layer) {
        const std::string base = "dec" + std::to_string(layer);
        w(base + ".weight", {dims[layer + 1], dims[layer], 3});
        params_.add_zeros(base + ".bias", {dims[layer + 1]});
    }
}

VarPtr AuxModel::content_rows(const VarPtr& e_word, const VarPtr& e_phone,
                              const VarPtr& e_score) const {
    VarPtr pw = project(e_word, params_.get("proj_word.weight"), params_.get("proj_word.bias"));
    VarPtr pp = project(e_phone, params_.get("proj_phone.weight"), params_.get("proj_phone.bias"));
    return fuse_embeddings(pw, pp, e_score);
}

VarPtr AuxModel::decode(const VarPtr& content_frames) const {
    VarPtr h = content_frames;
    for (int layer = 0; layer < 4; ++layer) {
        const std::string base = "dec" + std::to_string(layer);
        h = nn::tanh(conv1d(h, params_.get(base + ".weight"), params_.get(base + ".bias")));
    }
    return h;
}

VarPtr AuxModel::forward(const TensorData& e_word, const TensorData& e_phone,
                         const TensorData& e_score,
                         const std::vector<std::size_t>& frame_counts) const {
    VarPtr content = content_rows(make_const(e_word), make_const(e_phone), make_const(e_score));
    VarPtr frames = repeat_rows(content, frame_counts);
    return decode(frames);
}

DenoiserModel::DenoiserModel(std::uint64_t seed) {
    auto w = [&](const std::string& name, std::vector<std::size_t> shape) {
        params_.add(name, shape, seed, fan_in_scale(shape));
    };
    w("in.weight", {kMels, kHidden});
    params_.add_zeros("in.bias", {kHidden});
    w("cond_content.weight", {kContentDim, kHidden});
    params_.add_zeros("cond_content.bias", {kHidden});
    w("cond_step.weight", {kStepDim, kHidden});
    params_.add_zeros("cond_step.bias", {kHidden});
    w("cond_mert.weight", {kPriorDim, kHidden});
    params_.add_zeros("cond_mert.bias", {kHidden});
    w("cond_vec.weight", {kPriorDim, kHidden});
    params_.add_zeros("cond_vec.bias", {kHidden});
    for (std::size_t blk = 0; blk < kBlocks; ++blk) {
        const std::string base = "res" + std::to_string(blk);
        w(base + ".weight", {kHidden, kHidden, 3});
        params_.add_zeros(base + ".bias", {kHidden});
    }
    w("out.weight", {kHidden, kMels});
    params_.add_zeros("out.bias", {kMels});
}

VarPtr DenoiserModel::forward(const VarPtr& noisy_mel, const VarPtr& content_frames,
                              const TensorData& step_embed, const TensorData& mert_embed,
                              const TensorData& vec_embed) const {
    if (noisy_mel->value.rank() != 2 || noisy_mel->value.cols() != kMels) {
        throw std::runtime_error("denoiser expects a [N,80] mel input");
    }
    if (content_frames->value.rank() != 2 ||
        content_frames->value.rows() != noisy_mel->value.rows() ||
        content_frames->value.cols() != kContentDim) {
        throw std::runtime_error("denoiser conditioning must be [N,256] matching the mel length");
    }
    if (step_embed.numel() != kStepDim) throw std::runtime_error("step embedding must have 128 elements");
    if (mert_embed.numel() != kPriorDim || vec_embed.numel() != kPriorDim) {
        throw std::runtime_error("prior embeddings must have 1024 elements");
    }

    VarPtr h = add_rowvec(matmul(noisy_mel, params_.get("in.weight")), params_.get("in.bias"));
    VarPtr cond = add_rowvec(matmul(content_frames, params_.get("cond_content.weight")),
                             params_.get("cond_content.bias"));
    auto vec_branch = [&](const TensorData& v, const char* base) {
        TensorData row = v;
        row.shape = {1, v.numel()};
        VarPtr projected = add_rowvec(matmul(make_const(std::move(row)),
                                             params_.get(std::string(base) + ".weight")),
                                      params_.get(std::string(base) + ".bias"));
        return reshape(projected, {kHidden});
    };
    VarPtr global = add(add(vec_branch(step_embed, "cond_step"), vec_branch(mert_embed, "cond_mert")),
                        vec_branch(vec_embed, "cond_vec"));
    cond = add_rowvec(cond, global);

    for (std::size_t blk = 0; blk < kBlocks; ++blk) {
        const std::string base = "res" + std::to_string(blk);
        VarPtr z = add(conv1d(h, params_.get(base + ".weight"), params_.get(base + ".bias")), cond);
        h = add(h, nn::tanh(z));
    }
    return add_rowvec(matmul(h, params_.get("out.weight")), params_.get("out.bias"));
}

StyleEncoder::StyleEncoder(std::uint64_t seed) : channels_{1, 4, 8, 8, 16} {
    auto w = [&](const std::string& name, std::vector<std::size_t> shape) {
        params_.add(name, shape, seed, fan_in_scale(shape));
    };
    for (std::size_t blk = 0; blk + 1 < channels_.size(); ++blk) {
        const std::string base = "blk" + std::to_string(blk);
        const std::size_t cin = channels_[blk], cout = channels_[blk + 1];
        w(base + ".a.weight", {cout, cin, 3, 3});
        params_.add_zeros(base + ".a.bias", {cout});
        w(base + ".b.weight", {cout, cout, 3, 3});
        params_.add_zeros(base + ".b.bias", {cout});
        if (cin != cout) {
            w(base + ".skip.weight", {cout, cin, 1, 1});
            params_.add_zeros(base + ".skip.bias", {cout});
        }
    }
    w("head.weight", {channels_.back(), kStyleDim});
    params_.add_zeros("head.bias", {kStyleDim});
    params_.set_requires_grad(false);
}

VarPtr StyleEncoder::forward(const VarPtr& mel) const {
    if (mel->value.rank() != 2) throw std::runtime_error("style encoder expects [N,80]");
    VarPtr h = reshape(mel, {1, mel->value.rows(), mel->value.cols()});
    for (std::size_t blk = 0; blk + 1 < channels_.size(); ++blk) {
        const std::string base = "blk" + std::to_string(blk);
        const std::size_t cin = channels_[blk], cout = channels_[blk + 1];
        VarPtr y = nn::tanh(conv2d(h, params_.get(base + ".a.weight"), params_.get(base + ".a.bias")));
        VarPtr z = conv2d(y, params_.get(base + ".b.weight"), params_.get(base + ".b.bias"));
        VarPtr skip = cin == cout
                          ? h
                          : conv2d(h, params_.get(base + ".skip.weight"), params_.get(base + ".skip.bias"));
        h = avg_pool2d(nn::tanh(add(z, skip)));
    }
    VarPtr pooled = global_avg_pool2d(h);
    VarPtr row = reshape(pooled, {1, channels_.back()});
    VarPtr out = add_rowvec(matmul(row, params_.get("head.weight")), params_.get("head.bias"));
    return reshape(out, {kStyleDim});
}

TensorData StyleEncoder::embed(const TensorData& mel) const {
    return forward(make_const(mel))->value;
}

PitchProxy::PitchProxy(const MelConfig& config, double temperature)
    : temperature_(temperature) {
    if (!(temperature > 0.0)) throw std::runtime_error("pitch proxy temperature must be positive");
    MelFilterbank fb(config);
    centers_ = TensorData::matrix(fb.centers_hz.size(), 1);
    for (std::size_t i = 0; i < fb.centers_hz.size(); ++i) centers_(i, 0) = fb.centers_hz[i];
}

VarPtr PitchProxy::forward(const VarPtr& mel) const {
    if (mel->value.rank() != 2 || mel->value.cols() != centers_.rows()) {
        throw std::runtime_error("pitch proxy expects [N, n_mels]");
    }
    VarPtr weights = softmax_rows(mel, temperature_);
    VarPtr f0 = matmul(weights, make_const(centers_));
    return reshape(f0, {mel->value.rows()});
}

TensorData PitchProxy::estimate(const TensorData& mel) const {
    return forward(make_const(mel))->value;
}

} // namespace svskit::nn
