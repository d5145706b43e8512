#pragma once

#include <string>
#include <vector>

#include "svskit/pitch.hpp"
#include "svskit/tensor.hpp"

namespace svskit {

/// Mel-cepstral distortion in dB: frame-mean of
/// (10 / ln 10) * sqrt(2 * sum_k (c_k - c'_k)^2) over cepstral coefficients
/// 1..order computed from the two log-mel spectrograms (equal shapes).
double mcd_db(const TensorData& log_mel_ref, const TensorData& log_mel_gen, int order = 13);
double mcd_from_cepstra(const TensorData& cep_ref, const TensorData& cep_gen);

/// RMSE of natural-log f0 over frames voiced in both tracks; 0 when no frame
/// is voiced in both.
double logf0_rmse(const PitchTrack& ref, const PitchTrack& gen);

/// Fraction of frames whose voiced flags agree.
double vuv_agreement(const PitchTrack& ref, const PitchTrack& gen);

/// Cosine similarity of two equal-length vectors; degenerate norms give 1
/// when both vectors are (near) zero and 0 otherwise.
double cosine_similarity(const TensorData& a, const TensorData& b);

/// Objective report for one reference/generated pair (or corpus means).
struct EvalReport {
    double mcd_db = 0.0;
    double logf0_rmse = 0.0;
    double mel_mae = 0.0;
    double vuv_accuracy = 0.0;
    double cosine_similarity = 0.0;
};

std::string eval_report_to_json(const EvalReport& report);

/// Two-dimensional PCA of row vectors [N, D]: rows are centered, projected
/// onto the top two principal axes (points [N, 2]), with the explained
/// variance ratio of each axis. Axis signs are fixed by making the largest
/// magnitude coordinate of each axis positive.
struct Pca2D {
    TensorData points;              // [N, 2]
    double explained[2] = {0.0, 0.0};
};

Pca2D pca_2d(const TensorData& vectors);

} // namespace svskit
