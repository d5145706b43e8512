#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "svskit/mel.hpp"
#include "svskit/metrics.hpp"
#include "svskit/rng.hpp"

using namespace svskit;

namespace {

PitchTrack make_track(std::vector<double> f0, std::vector<std::uint8_t> voiced) {
    PitchTrack t;
    t.f0_hz = std::move(f0);
    t.voiced = std::move(voiced);
    return t;
}

} // namespace

TEST_CASE("identical inputs score perfectly on every metric") {
    Rng rng(1);
    TensorData mel({30, 80});
    rng.fill_gaussian(mel, 0.5);
    for (double& v : mel.data) v = -2.0 + v; // plausible log-mel values
    CHECK(mcd_db(mel, mel) == doctest::Approx(0.0));

    const PitchTrack t = make_track({100, 110, 0, 120}, {1, 1, 0, 1});
    CHECK(logf0_rmse(t, t) == doctest::Approx(0.0));
    CHECK(vuv_agreement(t, t) == doctest::Approx(1.0));

    TensorData v({5});
    rng.fill_gaussian(v, 1.0);
    CHECK(cosine_similarity(v, v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mcd matches the closed form for a single-coefficient gap") {
    // cepstra differing by d in exactly one coefficient per frame:
    // mcd = (10 / ln 10) * sqrt(2) * |d|
    TensorData cep_ref({4, 13}, 0.0);
    TensorData cep_gen({4, 13}, 0.0);
    for (std::size_t f = 0; f < 4; ++f) cep_gen(f, 2) = 0.7;
    const double expected = 10.0 / std::log(10.0) * std::sqrt(2.0) * 0.7;
    CHECK(mcd_from_cepstra(cep_ref, cep_gen) == doctest::Approx(expected).epsilon(1e-12));

    // frame-mean over unequal per-frame distances
    TensorData gen2 = cep_ref;
    gen2(0, 1) = 1.0; // only frame 0 differs
    const double frame0 = 10.0 / std::log(10.0) * std::sqrt(2.0) * 1.0;
    CHECK(mcd_from_cepstra(cep_ref, gen2) == doctest::Approx(frame0 / 4.0).epsilon(1e-12));
}

TEST_CASE("mcd is symmetric and grows with spectral distance") {
    Rng rng(7);
    TensorData ref({20, 80});
    rng.fill_gaussian(ref, 0.4);
    TensorData near = ref;
    TensorData far = ref;
    Rng rng2(8);
    for (double& v : near.data) v += 0.01 * rng2.gaussian();
    Rng rng3(9);
    for (double& v : far.data) v += 0.5 * rng3.gaussian();
    const double d_near = mcd_db(ref, near);
    const double d_far = mcd_db(ref, far);
    CHECK(d_near > 0.0);
    CHECK(d_far > d_near);
    CHECK(mcd_db(ref, far) == doctest::Approx(mcd_db(far, ref)).epsilon(1e-12));
    TensorData other({21, 80}, 0.0);
    CHECK_THROWS(mcd_db(ref, other));
}

TEST_CASE("log-f0 rmse uses the natural log over jointly voiced frames") {
    // one octave apart on every jointly voiced frame -> rmse = ln 2
    const PitchTrack ref = make_track({220, 220, 0, 220}, {1, 1, 0, 1});
    const PitchTrack gen = make_track({440, 440, 440, 440}, {1, 1, 1, 1});
    CHECK(logf0_rmse(ref, gen) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // mixed distances: rmse over the two jointly voiced frames
    const PitchTrack ref2 = make_track({100, 100}, {1, 1});
    const PitchTrack gen2 = make_track({100, 200}, {1, 1});
    CHECK(logf0_rmse(ref2, gen2) ==
          doctest::Approx(std::sqrt((0.0 + std::log(2.0) * std::log(2.0)) / 2.0)).epsilon(1e-12));

    // no jointly voiced frame -> 0 by convention
    const PitchTrack a = make_track({100, 0}, {1, 0});
    const PitchTrack b = make_track({0, 100}, {0, 1});
    CHECK(logf0_rmse(a, b) == 0.0);
    // unequal lengths compare over the overlap
    const PitchTrack longer = make_track({100, 100, 999}, {1, 1, 1});
    CHECK(logf0_rmse(ref2, longer) == doctest::Approx(0.0));
}

TEST_CASE("voicing agreement counts matching flags") {
    const PitchTrack ref = make_track({100, 0, 100, 0}, {1, 0, 1, 0});
    const PitchTrack gen = make_track({100, 0, 0, 0}, {1, 0, 0, 0});
    CHECK(vuv_agreement(ref, gen) == doctest::Approx(0.75));
    CHECK(vuv_agreement(ref, ref) == doctest::Approx(1.0));
}

TEST_CASE("cosine similarity oracles") {
    TensorData a({2});
    a.data = {1.0, 0.0};
    TensorData b({2});
    b.data = {0.0, 1.0};
    TensorData c({2});
    c.data = {-1.0, 0.0};
    TensorData d({2});
    d.data = {1.0, 1.0};
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));
    CHECK(cosine_similarity(a, c) == doctest::Approx(-1.0));
    CHECK(cosine_similarity(a, d) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    // degenerate norms
    TensorData zero({2}, 0.0);
    CHECK(cosine_similarity(zero, zero) == doctest::Approx(1.0));
    CHECK(cosine_similarity(zero, a) == doctest::Approx(0.0));
}

TEST_CASE("evaluation report serializes every field as valid JSON") {
    EvalReport r;
    r.mcd_db = 6.25;
    r.logf0_rmse = 0.125;
    r.mel_mae = 0.0625;
    r.vuv_accuracy = 0.875;
    r.cosine_similarity = 0.5;
    const std::string json = eval_report_to_json(r);
    CHECK(json.find("\"mcd_db\"") != std::string::npos);
    CHECK(json.find("\"logf0_rmse\"") != std::string::npos);
    CHECK(json.find("\"mel_mae\"") != std::string::npos);
    CHECK(json.find("\"vuv_accuracy\"") != std::string::npos);
    CHECK(json.find("\"cosine_similarity\"") != std::string::npos);
    CHECK(json.find("6.25") != std::string::npos);
    CHECK(json.find("0.875") != std::string::npos);
}

TEST_CASE("pca recovers a dominant axis and orders explained variance") {
    // points spread mostly along (1,1,0,...)/sqrt(2) with small noise on a
    // second direction
    const std::size_t n = 40;
    const std::size_t d = 6;
    TensorData rows({n, d}, 0.0);
    Rng rng(909);
    for (std::size_t i = 0; i < n; ++i) {
        const double main_coord = 4.0 * rng.gaussian();
        const double minor_coord = 0.5 * rng.gaussian();
        rows(i, 0) = main_coord / std::sqrt(2.0);
        rows(i, 1) = main_coord / std::sqrt(2.0);
        rows(i, 2) = minor_coord;
    }
    const Pca2D pca = pca_2d(rows);
    REQUIRE(pca.points.shape == std::vector<std::size_t>{n, 2});
    CHECK(pca.explained[0] >= pca.explained[1]);
    CHECK(pca.explained[0] > 0.9);
    CHECK(pca.explained[0] + pca.explained[1] <= 1.0 + 1e-9);

    // projection is centered
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += pca.points(i, 0);
        mean_y += pca.points(i, 1);
    }
    CHECK(std::fabs(mean_x / static_cast<double>(n)) < 1e-9);
    CHECK(std::fabs(mean_y / static_cast<double>(n)) < 1e-9);

    // the first axis carries (almost) all the variance of the main coordinate
    double var0 = 0.0;
    double var1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        var0 += pca.points(i, 0) * pca.points(i, 0);
        var1 += pca.points(i, 1) * pca.points(i, 1);
    }
    CHECK(var0 > var1);
}

TEST_CASE("pca is deterministic and sign-normalized") {
    Rng rng(31);
    TensorData rows({10, 5});
    rng.fill_gaussian(rows, 1.0);
    const Pca2D p1 = pca_2d(rows);
    const Pca2D p2 = pca_2d(rows);
    CHECK(p1.points.data == p2.points.data);
    CHECK(p1.explained[0] == p2.explained[0]);
    // negating all inputs flips the centered data; the sign convention keeps
    // the axes deterministic (projections flip at most in sign)
    TensorData neg = rows;
    for (double& v : neg.data) v = -v;
    const Pca2D p3 = pca_2d(neg);
    CHECK(std::fabs(std::fabs(p3.points(0, 0)) - std::fabs(p1.points(0, 0))) < 1e-9);
    CHECK(p3.explained[0] == doctest::Approx(p1.explained[0]).epsilon(1e-12));
}

TEST_CASE("pca handles few rows by zero-filling missing axes") {
    TensorData rows({3, 4});
    Rng rng(77);
    rng.fill_gaussian(rows, 1.0);
    const Pca2D p = pca_2d(rows);
    REQUIRE(p.points.shape == std::vector<std::size_t>{3, 2});
    // 3 centered points span at most rank 2 -> the two ratios cover it all
    CHECK(p.explained[0] + p.explained[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS(pca_2d(TensorData({1, 4}, 0.0)));
}
