// Copyright 2026 The uti2speech Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uti2speech/contf0.hpp"
#include "uti2speech/dataset.hpp"
#include "uti2speech/evalmetrics.hpp"
#include "uti2speech/melbank.hpp"
#include "uti2speech/mvf.hpp"
#include "uti2speech/postproc.hpp"
#include "uti2speech/resize.hpp"
#include "uti2speech/vocoder.hpp"
#include "uti2speech/wav.hpp"

namespace py = pybind11;
using namespace uti2speech;

namespace {

Waveform waveform_from(py::array_t<double, py::array::c_style> samples) {
  Waveform wav;
  auto buf = samples.request();
  if (buf.ndim != 1) throw Error("invalid-input", "expected a 1-D array");
  const double* p = static_cast<const double*>(buf.ptr);
  wav.samples.assign(p, p + buf.shape[0]);
  return wav;
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(
      std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

MatF matf_from(py::array_t<float, py::array::c_style> a) {
  auto buf = a.request();
  if (buf.ndim != 2) throw Error("invalid-input", "expected a 2-D array");
  MatF m(static_cast<int>(buf.shape[0]), static_cast<int>(buf.shape[1]));
  const float* p = static_cast<const float*>(buf.ptr);
  std::copy(p, p + m.data.size(), m.data.begin());
  return m;
}

py::array_t<float> to_array(const MatF& m) {
  py::array_t<float> out({static_cast<py::ssize_t>(m.rows),
                          static_cast<py::ssize_t>(m.cols)});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

py::array_t<double> to_array(const MatD& m) {
  py::array_t<double> out({static_cast<py::ssize_t>(m.rows),
                           static_cast<py::ssize_t>(m.cols)});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

MelSpectrogram mel_from(py::array_t<float, py::array::c_style> values,
                        int hop) {
  MelSpectrogram mel;
  mel.hop = hop;
  mel.values = matf_from(values);
  return mel;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ultrasound-to-speech pipeline: mel features, continuous "
            "vocoder, objective evaluation";
  m.attr("SAMPLE_RATE") = kSampleRate;
  m.attr("HOP") = kHopSamples;

  py::register_exception<Error>(m, "Uti2SpeechError");

  m.def(
      "mel_spectrogram",
      [](py::array_t<double, py::array::c_style> samples, double fmin,
         double fmax, int n_mels) {
        auto fb = build_mel_filterbank(fmin, fmax, n_mels);
        return to_array(
            mel_spectrogram(waveform_from(samples), StftConfig{}, fb).values);
      },
      py::arg("samples"), py::arg("fmin") = 0.0, py::arg("fmax") = 8000.0,
      py::arg("n_mels") = 80,
      "Log mel-spectrogram (frames x n_mels) at the 270-sample hop");

  m.def(
      "mel_filterbank",
      [](double fmin, double fmax, int n_mels) {
        return to_array(build_mel_filterbank(fmin, fmax, n_mels).weights);
      },
      py::arg("fmin") = 0.0, py::arg("fmax") = 8000.0, py::arg("n_mels") = 80);

  m.def(
      "resize_frame",
      [](py::array_t<uint8_t, py::array::c_style> frame) {
        auto buf = frame.request();
        if (buf.ndim != 2) throw Error("invalid-input", "expected 2-D uint8");
        return to_array(resize_frame(static_cast<const uint8_t*>(buf.ptr),
                                     static_cast<int>(buf.shape[0]),
                                     static_cast<int>(buf.shape[1])));
      },
      py::arg("frame"), "Bicubic resize of one scanline frame to 64x128");

  m.def(
      "track_contf0",
      [](py::array_t<double, py::array::c_style> samples) {
        return to_array(track_contf0(waveform_from(samples)));
      },
      py::arg("samples"), "Continuous log-F0 contour, one value per frame");

  m.def(
      "estimate_mvf",
      [](py::array_t<double, py::array::c_style> samples,
         py::array_t<double, py::array::c_style> log_f0) {
        auto contour = waveform_from(log_f0);
        return to_array(
            estimate_mvf(waveform_from(samples), contour.samples));
      },
      py::arg("samples"), py::arg("log_f0"));

  m.def(
      "analyze",
      [](py::array_t<double, py::array::c_style> samples) {
        auto params = analyze_utterance(waveform_from(samples));
        py::dict out;
        out["gain"] = to_array(params.gain);
        out["lsp"] = to_array(params.lsp);
        out["log_f0"] = to_array(params.log_f0);
        out["log_mvf"] = to_array(params.log_mvf);
        return out;
      },
      py::arg("samples"),
      "Continuous-vocoder analysis: gain, LSPs, log-F0, log-MVF per frame");

  m.def(
      "synthesize",
      [](py::array_t<double, py::array::c_style> gain,
         py::array_t<double, py::array::c_style> lsp,
         py::array_t<double, py::array::c_style> log_f0,
         py::array_t<double, py::array::c_style> log_mvf, uint64_t seed) {
        ContParams params;
        params.gain = waveform_from(gain).samples;
        params.log_f0 = waveform_from(log_f0).samples;
        params.log_mvf = waveform_from(log_mvf).samples;
        auto buf = lsp.request();
        if (buf.ndim != 2) throw Error("invalid-input", "lsp must be 2-D");
        params.order = static_cast<int>(buf.shape[1]);
        params.lsp = MatD(static_cast<int>(buf.shape[0]), params.order);
        const double* p = static_cast<const double*>(buf.ptr);
        std::copy(p, p + params.lsp.data.size(), params.lsp.data.begin());
        return to_array(synthesize(params, MgcConfig{}, seed).samples);
      },
      py::arg("gain"), py::arg("lsp"), py::arg("log_f0"), py::arg("log_mvf"),
      py::arg("seed") = 1, "Continuous-vocoder synthesis to 22050 Hz samples");

  m.def(
      "waveform_to_melcepstra",
      [](py::array_t<double, py::array::c_style> samples) {
        return to_array(waveform_to_melcepstra(waveform_from(samples)));
      },
      py::arg("samples"), "Order-24 mel-cepstra per frame (for MCD)");

  m.def(
      "mcd",
      [](py::array_t<double, py::array::c_style> ref,
         py::array_t<double, py::array::c_style> test) {
        auto to_matd = [](py::array_t<double, py::array::c_style>& a) {
          auto buf = a.request();
          if (buf.ndim != 2) throw Error("invalid-input", "expected 2-D");
          MatD m(static_cast<int>(buf.shape[0]),
                 static_cast<int>(buf.shape[1]));
          const double* p = static_cast<const double*>(buf.ptr);
          std::copy(p, p + m.data.size(), m.data.begin());
          return m;
        };
        auto r = to_matd(ref), t = to_matd(test);
        return mcd(r, t);
      },
      py::arg("ref"), py::arg("test"), "Mel-cepstral distortion in dB");

  m.def(
      "ranksum_test",
      [](std::vector<double> a, std::vector<double> b) {
        auto res = ranksum_test(a, b);
        py::dict out;
        out["u"] = res.u;
        out["p"] = res.p;
        out["significant"] = res.significant;
        out["exact"] = res.exact;
        return out;
      },
      py::arg("a"), py::arg("b"),
      "Mann-Whitney-Wilcoxon ranksum (two-sided)");

  m.def(
      "resample_hop",
      [](py::array_t<float, py::array::c_style> mel, int src_hop,
         int target_hop) {
        return to_array(resample_hop(mel_from(mel, src_hop), target_hop)
                            .values);
      },
      py::arg("mel"), py::arg("src_hop") = kHopSamples,
      py::arg("target_hop") = kConditioningHop);

  m.def(
      "savgol_smooth",
      [](py::array_t<float, py::array::c_style> mel, int window,
         int polyorder) {
        SmoothingConfig cfg{window, polyorder};
        return to_array(
            savgol_smooth(mel_from(mel, kConditioningHop), cfg).values);
      },
      py::arg("mel"), py::arg("window") = 5, py::arg("polyorder") = 3);

  m.def(
      "griffin_lim",
      [](py::array_t<float, py::array::c_style> mel, int hop, int iterations,
         uint64_t seed) {
        auto fb = build_mel_filterbank();
        auto result = griffin_lim(mel_from(mel, hop), fb, iterations, seed);
        return py::make_tuple(to_array(result.wav.samples),
                              to_array(result.residuals));
      },
      py::arg("mel"), py::arg("hop") = kHopSamples, py::arg("iterations") = 60,
      py::arg("seed") = 0,
      "Waveform and per-iteration residuals from a log-mel spectrogram");

  m.def(
      "split_dataset",
      [](std::vector<std::string> ids, uint64_t seed, double train, double val,
         double test) {
        auto split = split_dataset(std::move(ids), seed, {train, val, test});
        py::dict out;
        out["train"] = split.train;
        out["validation"] = split.validation;
        out["test"] = split.test;
        return out;
      },
      py::arg("ids"), py::arg("seed") = 42, py::arg("train") = 0.85,
      py::arg("validation") = 0.10, py::arg("test") = 0.05);

  m.def(
      "read_wav",
      [](const std::string& path) {
        auto wav = read_wav(path);
        return py::make_tuple(to_array(wav.samples), wav.sample_rate);
      },
      py::arg("path"));
  m.def(
      "write_wav",
      [](const std::string& path,
         py::array_t<double, py::array::c_style> samples) {
        write_wav(path, waveform_from(samples));
      },
      py::arg("path"), py::arg("samples"));
}
