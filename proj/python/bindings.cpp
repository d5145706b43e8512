// Python bindings for the core toolkit operations, with numpy interop.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svskit/diffusion.hpp"
#include "svskit/embeddings.hpp"
#include "svskit/griffin_lim.hpp"
#include "svskit/losses.hpp"
#include "svskit/mel.hpp"
#include "svskit/metrics.hpp"
#include "svskit/pitch.hpp"
#include "svskit/score.hpp"
#include "svskit/tensor.hpp"
#include "svskit/wav.hpp"

namespace py = pybind11;
using namespace svskit;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

TensorData tensor_from_array(const DoubleArray& array) {
    TensorData t;
    t.shape.assign(array.shape(), array.shape() + array.ndim());
    t.data.assign(array.data(), array.data() + array.size());
    if (t.shape.empty()) t.shape = {1};
    return t;
}

py::array_t<double> array_from_tensor(const TensorData& t) {
    py::array_t<double> out(t.shape);
    std::copy(t.data.begin(), t.data.end(), out.mutable_data());
    return out;
}

std::vector<double> vector_from_array(const DoubleArray& array) {
    return std::vector<double>(array.data(), array.data() + array.size());
}

py::array_t<double> array_from_vector(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

PitchTrack track_from_arrays(const DoubleArray& f0, const py::object& voiced_obj,
                             double hop_seconds) {
    PitchTrack track;
    track.hop_seconds = hop_seconds;
    track.f0_hz = vector_from_array(f0);
    if (voiced_obj.is_none()) {
        track.voiced.resize(track.f0_hz.size());
        for (std::size_t i = 0; i < track.f0_hz.size(); ++i) {
            track.voiced[i] = track.f0_hz[i] > 0.0 ? 1 : 0;
        }
    } else {
        auto voiced = voiced_obj.cast<py::array_t<bool, py::array::c_style | py::array::forcecast>>();
        track.voiced.assign(voiced.data(), voiced.data() + voiced.size());
    }
    if (track.voiced.size() != track.f0_hz.size()) {
        throw py::value_error("f0 and voiced must have equal length");
    }
    return track;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Singing-voice synthesis toolkit core (C++)";

    // --- configs ---------------------------------------------------------
    py::class_<MelConfig>(m, "MelConfig")
        .def(py::init<>())
        .def_readwrite("fft_size", &MelConfig::fft_size)
        .def_readwrite("win_length", &MelConfig::win_length)
        .def_readwrite("hop_length", &MelConfig::hop_length)
        .def_readwrite("n_mels", &MelConfig::n_mels)
        .def_readwrite("fmin_hz", &MelConfig::fmin_hz)
        .def_readwrite("fmax_hz", &MelConfig::fmax_hz)
        .def_readwrite("floor_db", &MelConfig::floor_db);

    py::class_<PitchTrackerConfig>(m, "PitchTrackerConfig")
        .def(py::init<>())
        .def_readwrite("fmin_hz", &PitchTrackerConfig::fmin_hz)
        .def_readwrite("fmax_hz", &PitchTrackerConfig::fmax_hz)
        .def_readwrite("window_seconds", &PitchTrackerConfig::window_seconds)
        .def_readwrite("hop_seconds", &PitchTrackerConfig::hop_seconds)
        .def_readwrite("voicing_threshold", &PitchTrackerConfig::voicing_threshold);

    m.attr("SAMPLE_RATE") = py::int_(kSampleRate);
    m.attr("REST_NOTE") = py::int_(kRestNote);

    // --- audio io --------------------------------------------------------
    m.def("read_wav", [](const std::string& path) { return array_from_vector(read_wav(path)); },
          py::arg("path"), "Read a mono 16 kHz 16-bit PCM wav into float samples in [-1, 1].");
    m.def("write_wav",
          [](const std::string& path, const DoubleArray& wave) {
              write_wav(path, vector_from_array(wave));
          },
          py::arg("path"), py::arg("samples"));

    // --- tensors on disk -------------------------------------------------
    m.def("read_tensor", [](const std::string& path) { return array_from_tensor(read_tensor_file(path)); },
          py::arg("path"), "Read an EMB1 tensor file as a numpy array.");
    m.def("write_tensor",
          [](const std::string& path, const DoubleArray& array) {
              write_tensor_file(path, tensor_from_array(array));
          },
          py::arg("path"), py::arg("array"), "Write a numpy array as an EMB1 tensor file (float32).");

    // --- spectral features -----------------------------------------------
    m.def("mel_spectrogram",
          [](const DoubleArray& wave, const MelConfig& config) {
              return array_from_tensor(mel_spectrogram(vector_from_array(wave), config));
          },
          py::arg("samples"), py::arg("config") = MelConfig{},
          "Unnormalized log-mel spectrogram, shape [frames, n_mels].");
    m.def("normalize_mel",
          [](const DoubleArray& mel, const MelConfig& config) {
              return array_from_tensor(normalize_mel(tensor_from_array(mel), config));
          },
          py::arg("log_mel"), py::arg("config") = MelConfig{},
          "Affine map of log-mel values onto [-1, 1].");
    m.def("denormalize_mel",
          [](const DoubleArray& mel, const MelConfig& config) {
              return array_from_tensor(denormalize_mel(tensor_from_array(mel), config));
          },
          py::arg("mel"), py::arg("config") = MelConfig{});
    m.def("mel_cepstrum",
          [](const DoubleArray& log_mel, int order) {
              return array_from_tensor(mel_cepstrum(tensor_from_array(log_mel), order));
          },
          py::arg("log_mel"), py::arg("order") = 13,
          "Orthonormal DCT-II cepstra, coefficients 1..order per frame.");
    m.def("griffin_lim",
          [](const DoubleArray& log_mel, const MelConfig& config, int iterations,
             std::uint64_t seed) {
              return array_from_vector(
                  griffin_lim(tensor_from_array(log_mel), config, iterations, seed));
          },
          py::arg("log_mel"), py::arg("config") = MelConfig{}, py::arg("iterations") = 32,
          py::arg("seed") = 0, "Phase-retrieval reconstruction of a waveform from log-mels.");

    // --- pitch and segmentation -------------------------------------------
    m.def("extract_f0",
          [](const DoubleArray& wave, const PitchTrackerConfig& config) {
              const PitchTrack track = extract_f0_autocorr(vector_from_array(wave), config);
              py::array_t<bool> voiced(static_cast<py::ssize_t>(track.size()));
              for (std::size_t i = 0; i < track.size(); ++i) {
                  voiced.mutable_data()[i] = track.voiced[i] != 0;
              }
              return py::make_tuple(array_from_vector(track.f0_hz), voiced);
          },
          py::arg("samples"), py::arg("config") = PitchTrackerConfig{},
          "Autocorrelation pitch track; returns (f0_hz, voiced) per 10 ms frame.");
    m.def("interpolate_unvoiced",
          [](const DoubleArray& f0, const py::object& voiced, double hop_seconds) {
              return array_from_vector(
                  interpolate_unvoiced(track_from_arrays(f0, voiced, hop_seconds)).f0_hz);
          },
          py::arg("f0_hz"), py::arg("voiced") = py::none(), py::arg("hop_seconds") = 0.010,
          "Linear interpolation across unvoiced gaps (edges copy the nearest voiced value).");
    m.def("segment_on_silence",
          [](const DoubleArray& wave, double threshold_db, double min_gap_seconds) {
              return segment_on_silence(vector_from_array(wave), threshold_db, min_gap_seconds);
          },
          py::arg("samples"), py::arg("threshold_db") = -40.0, py::arg("min_gap_seconds") = 0.5,
          "Phrase spans [(start_s, end_s), ...] split on silences longer than min_gap.");
    m.def("hz_to_midi", &hz_to_midi, py::arg("f0_hz"));

    // --- score text format -------------------------------------------------
    py::class_<MusicScore>(m, "MusicScore")
        .def(py::init<>())
        .def_readwrite("utterance_id", &MusicScore::utterance_id)
        .def_readwrite("text", &MusicScore::text)
        .def_readwrite("phones", &MusicScore::phones)
        .def_readwrite("notes", &MusicScore::notes)
        .def_readwrite("note_durations", &MusicScore::note_durations)
        .def_readwrite("phone_durations", &MusicScore::phone_durations)
        .def_readwrite("slurs", &MusicScore::slurs)
        .def("__len__", &MusicScore::size)
        .def("__repr__", [](const MusicScore& s) {
            return "<MusicScore " + s.utterance_id + ", " + std::to_string(s.size()) + " rows>";
        });
    m.def("parse_score", [](const std::string& line) { return parse_score(line); }, py::arg("line"));
    m.def("write_score", &write_score, py::arg("score"));
    m.def("parse_score_file", &parse_score_file, py::arg("text"));
    m.def("write_score_file",
          [](const std::vector<MusicScore>& scores) {
              return write_score_file(std::span<const MusicScore>(scores.data(), scores.size()));
          },
          py::arg("scores"));

    // --- diffusion ---------------------------------------------------------
    py::class_<DiffusionSchedule>(m, "DiffusionSchedule")
        .def_readonly("steps", &DiffusionSchedule::steps)
        .def_readonly("beta", &DiffusionSchedule::beta)
        .def_readonly("alpha", &DiffusionSchedule::alpha)
        .def_readonly("alpha_bar", &DiffusionSchedule::alpha_bar)
        .def_readonly("sigma", &DiffusionSchedule::sigma)
        .def("beta_at", &DiffusionSchedule::beta_at, py::arg("t"))
        .def("alpha_at", &DiffusionSchedule::alpha_at, py::arg("t"))
        .def("alpha_bar_at", &DiffusionSchedule::alpha_bar_at, py::arg("t"))
        .def("sigma_at", &DiffusionSchedule::sigma_at, py::arg("t"));
    m.def("make_schedule", &make_schedule, py::arg("steps") = 100, py::arg("beta_start") = 1e-4,
          py::arg("beta_end") = 6e-2);
    m.def("q_sample",
          [](const DoubleArray& m0, int t, const DoubleArray& eps,
             const DiffusionSchedule& schedule) {
              return array_from_tensor(
                  q_sample(tensor_from_array(m0), t, tensor_from_array(eps), schedule));
          },
          py::arg("m0"), py::arg("t"), py::arg("eps"), py::arg("schedule"));
    m.def("reverse_step",
          [](const DoubleArray& mt, const DoubleArray& eps_hat, int t, const DoubleArray& z,
             const DiffusionSchedule& schedule) {
              return array_from_tensor(reverse_step(tensor_from_array(mt),
                                                    tensor_from_array(eps_hat), t,
                                                    tensor_from_array(z), schedule));
          },
          py::arg("mt"), py::arg("eps_hat"), py::arg("t"), py::arg("z"), py::arg("schedule"));
    m.def("sample",
          [](const py::function& denoiser, const DoubleArray& m_hat, int q,
             const DiffusionSchedule& schedule, std::uint64_t seed) {
              Rng rng(seed);
              DenoiserFn fn = [&denoiser](const TensorData& mt, int t) {
                  const py::object out = denoiser(array_from_tensor(mt), t);
                  return tensor_from_array(out.cast<DoubleArray>());
              };
              return array_from_tensor(sample(fn, tensor_from_array(m_hat), q, schedule, rng));
          },
          py::arg("denoiser"), py::arg("m_hat"), py::arg("q"), py::arg("schedule"),
          py::arg("seed") = 0,
          "Shallow-start reverse diffusion; denoiser(m_t, t) must return predicted noise.");

    // --- losses and metrics -------------------------------------------------
    m.def("ccc",
          [](const DoubleArray& x, const DoubleArray& y) {
              const std::vector<double> vx = vector_from_array(x);
              const std::vector<double> vy = vector_from_array(y);
              return ccc(vx, vy).ccc;
          },
          py::arg("x"), py::arg("y"), "Concordance correlation coefficient.");
    m.def("pitch_loss",
          [](const DoubleArray& x, const DoubleArray& y, double floor) {
              const std::vector<double> vx = vector_from_array(x);
              const std::vector<double> vy = vector_from_array(y);
              return pitch_loss(vx, vy, floor);
          },
          py::arg("x"), py::arg("y"), py::arg("floor") = 0.01);
    m.def("style_loss",
          [](const DoubleArray& a, const DoubleArray& b) {
              const std::vector<double> va = vector_from_array(a);
              const std::vector<double> vb = vector_from_array(b);
              return style_loss(va, vb);
          },
          py::arg("a"), py::arg("b"));
    m.def("mcd_db",
          [](const DoubleArray& ref, const DoubleArray& gen, int order) {
              return mcd_db(tensor_from_array(ref), tensor_from_array(gen), order);
          },
          py::arg("log_mel_ref"), py::arg("log_mel_gen"), py::arg("order") = 13);
    m.def("logf0_rmse",
          [](const DoubleArray& f0_ref, const DoubleArray& f0_gen) {
              return logf0_rmse(track_from_arrays(f0_ref, py::none(), 0.010),
                                track_from_arrays(f0_gen, py::none(), 0.010));
          },
          py::arg("f0_ref"), py::arg("f0_gen"),
          "Root-mean-square log-F0 difference over frames voiced in both tracks.");
    m.def("vuv_agreement",
          [](const DoubleArray& f0_ref, const DoubleArray& f0_gen) {
              return vuv_agreement(track_from_arrays(f0_ref, py::none(), 0.010),
                                   track_from_arrays(f0_gen, py::none(), 0.010));
          },
          py::arg("f0_ref"), py::arg("f0_gen"));
    m.def("cosine_similarity",
          [](const DoubleArray& a, const DoubleArray& b) {
              return cosine_similarity(tensor_from_array(a), tensor_from_array(b));
          },
          py::arg("a"), py::arg("b"));
    m.def("pca_2d",
          [](const DoubleArray& vectors) {
              const Pca2D p = pca_2d(tensor_from_array(vectors));
              return py::make_tuple(array_from_tensor(p.points),
                                    py::make_tuple(p.explained[0], p.explained[1]));
          },
          py::arg("vectors"),
          "Projects row vectors onto their two leading principal axes; returns (points, explained).");

    // --- embeddings ---------------------------------------------------------
    m.def("pseudo_embedding",
          [](const std::string& kind, const std::string& key, std::uint64_t seed) {
              return array_from_tensor(pseudo_embedding(pseudo_kind_from_name(kind), key, seed));
          },
          py::arg("kind"), py::arg("key"), py::arg("seed") = 1234,
          "Deterministic unit-norm stand-in embedding ('word', 'phone', 'mert', 'vec').");
    m.def("step_embedding",
          [](int t, std::size_t dim) { return array_from_tensor(step_embedding(t, dim)); },
          py::arg("t"), py::arg("dim") = 128);
    m.def("audio_digest",
          [](const DoubleArray& wave) { return audio_digest(vector_from_array(wave)); },
          py::arg("samples"));
}
