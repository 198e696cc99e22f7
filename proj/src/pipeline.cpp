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

#include "uti2speech/pipeline.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "binio.hpp"
#include "uti2speech/evalmetrics.hpp"
#include "uti2speech/resize.hpp"
#include "uti2speech/ultrasound.hpp"
#include "uti2speech/vocoder.hpp"
#include "uti2speech/wav.hpp"

namespace uti2speech {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_artifact(const std::string& path, const std::string& stage) {
  require(fs::exists(path), "stage-dependency",
          stage + " needs missing file " + path);
}

int resolve_jobs(const PipelineConfig& cfg) {
  if (cfg.jobs > 0) return cfg.jobs;
  if (const char* env = std::getenv("UTI2SPEECH_JOBS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

// Utterance-level worker pool; each task touches only its own files.
template <typename Fn>
void parallel_for_ids(const std::vector<std::string>& ids, int jobs, Fn fn) {
  if (jobs <= 1) {
    for (const auto& id : ids) fn(id);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= ids.size()) return;
        try {
          fn(ids[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::string> all_ids(const DatasetSplit& split) {
  std::vector<std::string> ids = split.train;
  ids.insert(ids.end(), split.validation.begin(), split.validation.end());
  ids.insert(ids.end(), split.test.begin(), split.test.end());
  return ids;
}

void dump_matrix_tsv(const std::string& path, const MatF& m) {
  std::ofstream out(path);
  require(out.good(), "io-error", "cannot write " + path);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c)
      out << m.at(r, c) << (c + 1 == m.cols ? '\n' : '\t');
  }
}

// Stacks per-utterance feature matrices (images or targets) in id order.
MatF stack_rows(const std::vector<MatF>& mats) {
  int rows = 0, cols = 0;
  for (const auto& m : mats) {
    rows += m.rows;
    if (cols == 0) cols = m.cols;
    require(m.cols == cols, "invalid-input", "inconsistent widths to stack");
  }
  MatF out(rows, cols);
  int at = 0;
  for (const auto& m : mats) {
    std::copy(m.data.begin(), m.data.end(), out.row(at));
    at += m.rows;
  }
  return out;
}

struct LoadedSubset {
  MatF inputs;
  MatF targets;
};

LoadedSubset load_subset(const PipelineConfig& cfg,
                         const std::vector<std::string>& ids,
                         const std::string& target_kind,
                         const std::string& stage) {
  std::vector<MatF> xs, ys;
  for (const auto& id : ids) {
    const auto img_path = feature_dir(cfg) + "/" + id + ".img";
    require_artifact(img_path, stage);
    xs.push_back(read_images(img_path));
    if (target_kind == "mel") {
      const auto mel_path = feature_dir(cfg) + "/" + id + ".mel";
      require_artifact(mel_path, stage);
      ys.push_back(read_mel(mel_path).values);
    } else {
      const auto cvp_path = feature_dir(cfg) + "/" + id + ".cvp";
      require_artifact(cvp_path, stage);
      const auto params = read_contparams(cvp_path);
      ys.push_back(target_kind == "spectral"
                       ? contparams_to_spectral(params)
                       : contparams_to_excitation(params));
    }
    require(xs.back().rows == ys.back().rows, "invalid-input",
            id + ": image/target frame counts differ");
  }
  return {stack_rows(xs), stack_rows(ys)};
}

// Fits the normalizer on the training subset, normalizes in place, trains
// one model and writes it with its log.
void train_one_model(const PipelineConfig& cfg, const DatasetSplit& split,
                     const std::string& target_kind,
                     const std::string& model_name) {
  auto train_set = load_subset(cfg, split.train, target_kind, "train");
  auto val_set = load_subset(cfg, split.validation, target_kind, "train");

  auto norm = fit_normalizer({&train_set.targets});
  normalizer_apply(norm, train_set.targets);
  normalizer_apply(norm, val_set.targets);

  CnnModel model(CnnArchitecture::standard(train_set.targets.cols));
  model.init_weights(cfg.train.seed);
  auto result = train(model, train_set.inputs, train_set.targets,
                      val_set.inputs, val_set.targets, cfg.train);
  model.target_norm = norm;

  fs::create_directories(model_dir(cfg));
  save_model(model_dir(cfg) + "/" + model_name + ".cnn", model);
  write_normalizer(model_dir(cfg) + "/" + model_name + ".nrm", norm);
  write_training_log(model_dir(cfg) + "/" + model_name + "_train_log.tsv",
                     result.history);
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "io-error", "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("invalid-config", path + ": " + e.what());
  }
  PipelineConfig cfg;
  try {
    cfg.corpus_root = j.at("corpus_root").get<std::string>();
    cfg.output_root = j.at("output_root").get<std::string>();
    cfg.feature = j.value("feature", cfg.feature);
    if (j.contains("split")) {
      const auto& s = j["split"];
      cfg.split_ratios.train = s.value("train", cfg.split_ratios.train);
      cfg.split_ratios.validation =
          s.value("validation", cfg.split_ratios.validation);
      cfg.split_ratios.test = s.value("test", cfg.split_ratios.test);
      cfg.split_seed = s.value("seed", cfg.split_seed);
    }
    if (j.contains("stft")) {
      const auto& s = j["stft"];
      cfg.stft.fft_size = s.value("fft_size", cfg.stft.fft_size);
      cfg.stft.win_size = s.value("win_size", cfg.stft.win_size);
      cfg.stft.hop = s.value("hop", cfg.stft.hop);
    }
    if (j.contains("mel")) {
      const auto& s = j["mel"];
      cfg.mel_fmin = s.value("fmin", cfg.mel_fmin);
      cfg.mel_fmax = s.value("fmax", cfg.mel_fmax);
      cfg.n_mels = s.value("n_mels", cfg.n_mels);
    }
    if (j.contains("mgc")) {
      const auto& s = j["mgc"];
      cfg.mgc.order = s.value("order", cfg.mgc.order);
      cfg.mgc.alpha = s.value("alpha", cfg.mgc.alpha);
      cfg.mgc.gamma = s.value("gamma", cfg.mgc.gamma);
      cfg.mgc.max_iterations = s.value("max_iterations", cfg.mgc.max_iterations);
      cfg.mgc.tolerance = s.value("tolerance", cfg.mgc.tolerance);
    }
    if (j.contains("train")) {
      const auto& s = j["train"];
      cfg.train.learning_rate = s.value("learning_rate", cfg.train.learning_rate);
      cfg.train.batch_size = s.value("batch_size", cfg.train.batch_size);
      cfg.train.max_epochs = s.value("max_epochs", cfg.train.max_epochs);
      cfg.train.patience = s.value("patience", cfg.train.patience);
      cfg.train.seed = s.value("seed", cfg.train.seed);
    }
    if (j.contains("smoothing")) {
      const auto& s = j["smoothing"];
      cfg.smoothing.window = s.value("window", cfg.smoothing.window);
      cfg.smoothing.polyorder = s.value("polyorder", cfg.smoothing.polyorder);
    }
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      cfg.synth_noise_seed = s.value("noise_seed", cfg.synth_noise_seed);
      cfg.griffinlim_iterations =
          s.value("griffinlim_iterations", cfg.griffinlim_iterations);
      cfg.griffinlim_seed = s.value("griffinlim_seed", cfg.griffinlim_seed);
    }
    cfg.write_tsv_dumps = j.value("write_tsv_dumps", cfg.write_tsv_dumps);
    cfg.jobs = j.value("jobs", cfg.jobs);
  } catch (const json::exception& e) {
    fail("invalid-config", path + ": " + e.what());
  }
  require(cfg.feature == "mel" || cfg.feature == "contvoc", "invalid-config",
          "feature must be mel or contvoc");
  require(fs::exists(cfg.corpus_root), "invalid-config",
          "corpus_root does not exist: " + cfg.corpus_root);
  return cfg;
}

std::string split_path(const PipelineConfig& cfg) {
  return cfg.output_root + "/split.tsv";
}
std::string feature_dir(const PipelineConfig& cfg) {
  return cfg.output_root + "/features";
}
std::string model_dir(const PipelineConfig& cfg) {
  return cfg.output_root + "/models";
}
std::string pred_dir(const PipelineConfig& cfg) {
  return cfg.output_root + "/pred";
}
std::string synth_dir(const PipelineConfig& cfg) {
  return cfg.output_root + "/synth";
}
std::string eval_dir(const PipelineConfig& cfg) {
  return cfg.output_root + "/eval";
}

void write_images(const std::string& path, const MatF& frames, int rows,
                  int cols) {
  require(frames.cols == rows * cols, "invalid-input",
          "frame width does not match rows*cols");
  binio::Writer w(path);
  w.magic("IMG1");
  w.i32(frames.rows);
  w.i32(rows);
  w.i32(cols);
  w.f32_array(frames.data.data(), frames.data.size());
  w.close();
}

MatF read_images(const std::string& path) {
  binio::Reader r(path);
  r.expect_magic("IMG1", "malformed-images");
  const int frames = r.i32("malformed-images");
  const int rows = r.i32("malformed-images");
  const int cols = r.i32("malformed-images");
  require(frames >= 0 && rows >= 1 && cols >= 1, "malformed-images",
          path + ": implausible header");
  MatF out(frames, rows * cols);
  r.f32_array(out.data.data(), out.data.size(), "malformed-images");
  return out;
}

std::vector<std::string> discover_utterances(const std::string& corpus_root) {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(corpus_root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".bin")
      continue;
    const std::string id = entry.path().stem().string();
    const auto base = entry.path().parent_path() / id;
    if (fs::exists(base.string() + ".meta") &&
        fs::exists(base.string() + ".wav"))
      ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void cmd_split(const PipelineConfig& cfg) {
  auto ids = discover_utterances(cfg.corpus_root);
  require(!ids.empty(), "stage-dependency",
          "no utterances (<id>.bin/.meta/.wav) under " + cfg.corpus_root);
  auto split = split_dataset(ids, cfg.split_seed, cfg.split_ratios);
  fs::create_directories(cfg.output_root);
  write_split(split_path(cfg), split);
}

void cmd_extract(const PipelineConfig& cfg) {
  require_artifact(split_path(cfg), "extract");
  const auto split = read_split(split_path(cfg));
  fs::create_directories(feature_dir(cfg));
  const auto fb = build_mel_filterbank(cfg.mel_fmin, cfg.mel_fmax, cfg.n_mels,
                                       cfg.stft.fft_size);

  parallel_for_ids(all_ids(split), resolve_jobs(cfg), [&](const std::string& id) {
    const auto base = cfg.corpus_root + "/" + id;
    require_artifact(base + ".bin", "extract");
    require_artifact(base + ".meta", "extract");
    require_artifact(base + ".wav", "extract");
    auto us = read_ultrasound(base + ".bin", base + ".meta");
    auto wav = read_wav(base + ".wav");
    require_standard_rate(wav);
    const int frames = align_frames(us, wav, cfg.stft.hop);

    // Resized network inputs.
    MatF images(frames, kImageRows * kImageCols);
    for (int t = 0; t < frames; ++t) {
      auto img = resize_frame(us.frame(t), us.num_vectors, us.pix_per_vector);
      std::copy(img.data.begin(), img.data.end(), images.row(t));
    }
    write_images(feature_dir(cfg) + "/" + id + ".img", images, kImageRows,
                 kImageCols);

    // Mel target, truncated to the aligned frame count.
    auto mel = mel_spectrogram(wav, cfg.stft, fb);
    mel.values.rows = frames;
    mel.values.data.resize(static_cast<size_t>(frames) * mel.values.cols);
    write_mel(feature_dir(cfg) + "/" + id + ".mel", mel);
    if (cfg.write_tsv_dumps)
      dump_matrix_tsv(feature_dir(cfg) + "/" + id + ".mel.tsv", mel.values);

    // Continuous-vocoder target.
    auto params = analyze_utterance(wav, cfg.mgc);
    params.gain.resize(frames);
    params.log_f0.resize(frames);
    params.log_mvf.resize(frames);
    params.lsp.rows = frames;
    params.lsp.data.resize(static_cast<size_t>(frames) * params.lsp.cols);
    write_contparams(feature_dir(cfg) + "/" + id + ".cvp", params);
  });
}

void cmd_train(const PipelineConfig& cfg) {
  require_artifact(split_path(cfg), "train");
  const auto split = read_split(split_path(cfg));
  require(!split.train.empty() && !split.validation.empty(), "invalid-input",
          "train stage needs nonempty train and validation subsets");
  if (cfg.feature == "mel") {
    train_one_model(cfg, split, "mel", "mel");
  } else {
    train_one_model(cfg, split, "spectral", "spectral");
    train_one_model(cfg, split, "excitation", "excitation");
  }
}

void cmd_predict(const PipelineConfig& cfg) {
  require_artifact(split_path(cfg), "predict");
  const auto split = read_split(split_path(cfg));
  fs::create_directories(pred_dir(cfg));

  if (cfg.feature == "mel") {
    const auto model_path = model_dir(cfg) + "/mel.cnn";
    require_artifact(model_path, "predict");
    const auto model = load_model(model_path);
    parallel_for_ids(split.test, resolve_jobs(cfg), [&](const std::string& id) {
      const auto img_path = feature_dir(cfg) + "/" + id + ".img";
      require_artifact(img_path, "predict");
      auto pred = predict_sequence(model, read_images(img_path));
      MelSpectrogram mel;
      mel.hop = cfg.stft.hop;
      mel.values = std::move(pred);
      write_mel(pred_dir(cfg) + "/" + id + ".mel", mel);
      if (cfg.write_tsv_dumps)
        dump_matrix_tsv(pred_dir(cfg) + "/" + id + ".mel.tsv", mel.values);
    });
  } else {
    const auto spectral_path = model_dir(cfg) + "/spectral.cnn";
    const auto excitation_path = model_dir(cfg) + "/excitation.cnn";
    require_artifact(spectral_path, "predict");
    require_artifact(excitation_path, "predict");
    const auto spectral = load_model(spectral_path);
    const auto excitation = load_model(excitation_path);
    parallel_for_ids(split.test, resolve_jobs(cfg), [&](const std::string& id) {
      const auto img_path = feature_dir(cfg) + "/" + id + ".img";
      require_artifact(img_path, "predict");
      const auto images = read_images(img_path);
      auto params = features_to_contparams(
          predict_sequence(spectral, images),
          predict_sequence(excitation, images));
      write_contparams(pred_dir(cfg) + "/" + id + ".cvp", params);
    });
  }
}

void cmd_synth(const PipelineConfig& cfg, const std::string& engine) {
  require(engine == "contvoc" || engine == "griffinlim" || engine == "export",
          "invalid-config", "engine must be contvoc, griffinlim or export");
  require_artifact(split_path(cfg), "synth");
  const auto split = read_split(split_path(cfg));
  const auto out_dir =
      engine == "export" ? cfg.output_root + "/cond" : synth_dir(cfg);
  fs::create_directories(out_dir);
  const auto fb = build_mel_filterbank(cfg.mel_fmin, cfg.mel_fmax, cfg.n_mels,
                                       cfg.stft.fft_size);

  parallel_for_ids(split.test, resolve_jobs(cfg), [&](const std::string& id) {
    if (engine == "contvoc") {
      const auto cvp_path = pred_dir(cfg) + "/" + id + ".cvp";
      require_artifact(cvp_path, "synth");
      auto wav = synthesize(read_contparams(cvp_path), cfg.mgc,
                            cfg.synth_noise_seed);
      write_wav(out_dir + "/" + id + ".wav", wav);
      return;
    }
    const auto mel_path = pred_dir(cfg) + "/" + id + ".mel";
    require_artifact(mel_path, "synth");
    auto mel = read_mel(mel_path);
    auto conditioned = savgol_smooth(resample_hop(mel, kConditioningHop),
                                     cfg.smoothing);
    if (engine == "export") {
      export_conditioning(out_dir + "/" + id + ".mel", conditioned);
    } else {
      auto result = griffin_lim(conditioned, fb, cfg.griffinlim_iterations,
                                cfg.griffinlim_seed);
      write_wav(out_dir + "/" + id + ".wav", result.wav);
    }
  });
}

void cmd_eval(const PipelineConfig& cfg, bool on_features) {
  require_artifact(split_path(cfg), "eval");
  const auto split = read_split(split_path(cfg));
  fs::create_directories(eval_dir(cfg));

  McdReport report;
  for (const auto& id : split.test) {
    MatD ref, test;
    if (on_features) {
      const auto ref_path = feature_dir(cfg) + "/" + id + ".cvp";
      const auto test_path = pred_dir(cfg) + "/" + id + ".cvp";
      require_artifact(ref_path, "eval");
      require_artifact(test_path, "eval");
      auto to_mcep = [&](const ContParams& params) {
        MatD out(params.frames(), params.order + 1);
        for (int t = 0; t < params.frames(); ++t) {
          LspFrame frame;
          frame.gain = params.gain[t];
          frame.lsp.assign(params.lsp.row(t),
                           params.lsp.row(t) + params.order);
          auto mcep = mgc_to_mcep(lsp_to_mgc(frame, cfg.mgc), cfg.mgc);
          std::copy(mcep.begin(), mcep.end(), out.row(t));
        }
        return out;
      };
      ref = to_mcep(read_contparams(ref_path));
      test = to_mcep(read_contparams(test_path));
    } else {
      const auto ref_path = cfg.corpus_root + "/" + id + ".wav";
      const auto test_path = synth_dir(cfg) + "/" + id + ".wav";
      require_artifact(ref_path, "eval");
      require_artifact(test_path, "eval");
      ref = waveform_to_melcepstra(read_wav(ref_path));
      test = waveform_to_melcepstra(read_wav(test_path));
    }
    const int frames = std::min(ref.rows, test.rows);
    require(frames >= 1, "refused", id + ": no overlapping frames");
    ref.rows = frames;
    ref.data.resize(static_cast<size_t>(frames) * ref.cols);
    test.rows = frames;
    test.data.resize(static_cast<size_t>(frames) * test.cols);
    report.utterance.push_back(id);
    report.value_db.push_back(mcd(ref, test));
    report.frames_used.push_back(frames);
  }
  require(!report.utterance.empty(), "refused", "no test utterances to score");
  double mean = 0.0;
  for (double v : report.value_db) mean += v;
  report.mean_db = mean / report.value_db.size();
  write_mcd_report(eval_dir(cfg) + "/mcd.tsv", report);
}

void cmd_mushra(const std::string& scores_csv, const std::string& out_tsv) {
  require_artifact(scores_csv, "mushra");
  write_mushra_report(out_tsv, read_mushra_csv(scores_csv));
}

}  // namespace uti2speech
