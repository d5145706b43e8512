#include "svskit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "svskit/mel.hpp"

namespace svskit {

namespace {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues (diagonal) and the orthogonal matrix of column eigenvectors.
void jacobi_eigen(TensorData& a, TensorData& v) {
    const std::size_t n = a.rows();
    v = TensorData::matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-18) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
}

} // namespace

double mcd_from_cepstra(const TensorData& cep_ref, const TensorData& cep_gen) {
    if (!same_shape(cep_ref, cep_gen) || cep_ref.rank() != 2 || cep_ref.rows() == 0) {
        throw std::runtime_error("mcd: cepstra must share a non-empty [frames, order] shape");
    }
    const std::size_t frames = cep_ref.rows(), order = cep_ref.cols();
    double acc = 0.0;
    for (std::size_t f = 0; f < frames; ++f) {
        double sq = 0.0;
        for (std::size_t k = 0; k < order; ++k) {
            const double d = cep_ref(f, k) - cep_gen(f, k);
            sq += d * d;
        }
        acc += std::sqrt(2.0 * sq);
    }
    return 10.0 / std::log(10.0) * acc / static_cast<double>(frames);
}

double mcd_db(const TensorData& log_mel_ref, const TensorData& log_mel_gen, int order) {
    if (!same_shape(log_mel_ref, log_mel_gen)) {
        throw std::runtime_error("mcd: log-mel shapes differ");
    }
    return mcd_from_cepstra(mel_cepstrum(log_mel_ref, order), mel_cepstrum(log_mel_gen, order));
}

double logf0_rmse(const PitchTrack& ref, const PitchTrack& gen) {
    const std::size_t n = std::min(ref.size(), gen.size());
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!ref.voiced[i] || !gen.voiced[i]) continue;
        if (ref.f0_hz[i] <= 0.0 || gen.f0_hz[i] <= 0.0) continue;
        const double d = std::log(ref.f0_hz[i]) - std::log(gen.f0_hz[i]);
        acc += d * d;
        ++count;
    }
    return count == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(count));
}

double vuv_agreement(const PitchTrack& ref, const PitchTrack& gen) {
    const std::size_t n = std::min(ref.size(), gen.size());
    if (n == 0) return 1.0;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if ((ref.voiced[i] != 0) == (gen.voiced[i] != 0)) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(n);
}

double cosine_similarity(const TensorData& a, const TensorData& b) {
    if (a.numel() != b.numel() || a.numel() == 0) {
        throw std::runtime_error("cosine_similarity: vectors must be equally long and non-empty");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < 1e-12 || nb < 1e-12) return (na < 1e-12 && nb < 1e-12) ? 1.0 : 0.0;
    return dot / (na * nb);
}

std::string eval_report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["mcd_db"] = report.mcd_db;
    j["logf0_rmse"] = report.logf0_rmse;
    j["mel_mae"] = report.mel_mae;
    j["vuv_accuracy"] = report.vuv_accuracy;
    j["cosine_similarity"] = report.cosine_similarity;
    return j.dump(2) + "\n";
}

Pca2D pca_2d(const TensorData& vectors) {
    if (vectors.rank() != 2 || vectors.rows() < 2 || vectors.cols() < 1) {
        throw std::runtime_error("pca_2d: need at least two row vectors");
    }
    const std::size_t n = vectors.rows(), d = vectors.cols();
    if (n > 512) throw std::runtime_error("pca_2d: too many rows (limit 512)");

    TensorData centered = vectors;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += vectors(i, j);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) centered(i, j) -= mean;
    }

    // Gram matrix keeps the eigenproblem N x N even for wide embeddings.
    TensorData gram = TensorData::matrix(n, n);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += centered(i, k) * centered(j, k);
            gram(i, j) = acc;
            gram(j, i) = acc;
        }
        trace += gram(i, i);
    }

    TensorData eigvecs;
    jacobi_eigen(gram, eigvecs);

    std::vector<std::pair<double, std::size_t>> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = {gram(i, i), i};
    std::sort(eig.begin(), eig.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    Pca2D out;
    out.points = TensorData::matrix(n, 2);
    for (std::size_t axis = 0; axis < 2 && axis < n; ++axis) {
        const double lambda = std::max(eig[axis].first, 0.0);
        const std::size_t col = eig[axis].second;
        const double scale = std::sqrt(lambda);
        for (std::size_t i = 0; i < n; ++i) out.points(i, axis) = eigvecs(i, col) * scale;
        out.explained[axis] = trace > 1e-12 ? lambda / trace : 0.0;
        // Deterministic orientation: largest-magnitude coordinate positive.
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(out.points(i, axis)) > std::abs(out.points(arg, axis))) arg = i;
        }
        if (out.points(arg, axis) < 0.0) {
            for (std::size_t i = 0; i < n; ++i) out.points(i, axis) = -out.points(i, axis);
        }
    }
    return out;
}

} // namespace svskit
