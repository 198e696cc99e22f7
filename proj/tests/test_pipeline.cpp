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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "uti2speech/pipeline.hpp"
#include "uti2speech/ultrasound.hpp"
#include "uti2speech/vocoder.hpp"
#include "uti2speech/wav.hpp"

using namespace uti2speech;
namespace fs = std::filesystem;

namespace {

// Three tiny utterances: patterned ultrasound frames plus a vowel-like
// waveform whose pitch varies per utterance.
void make_toy_corpus(const std::string& dir, int n_utts = 3, int frames = 6) {
  fs::create_directories(dir);
  for (int u = 0; u < n_utts; ++u) {
    UltrasoundSequence us;
    us.num_frames = frames;
    us.num_vectors = 24;
    us.pix_per_vector = 64;
    us.fps = kUltrasoundFps;
    us.frames.resize(us.num_frames * us.frame_bytes());
    for (int t = 0; t < frames; ++t) {
      uint8_t* frame = us.frame(t);
      for (int r = 0; r < us.num_vectors; ++r)
        for (int c = 0; c < us.pix_per_vector; ++c)
          frame[r * us.pix_per_vector + c] = static_cast<uint8_t>(
              (r * 3 + c * 5 + t * 17 + u * 41) % 251);
    }
    const std::string id = "utt" + std::to_string(u);
    write_ultrasound(dir + "/" + id + ".bin", dir + "/" + id + ".meta", us);
    auto wav =
        testutil::synth_vowel(130.0 + 20.0 * u,
                              frames * kHopSamples / 22050.0 + 0.01);
    wav.samples.resize(static_cast<size_t>(frames) * kHopSamples);
    write_wav(dir + "/" + id + ".wav", wav);
  }
}

std::string write_toy_config(const std::string& path,
                             const std::string& corpus,
                             const std::string& out,
                             const std::string& feature,
                             int epochs = 3) {
  std::ofstream cfg(path);
  cfg << R"({
  "corpus_root": ")" << corpus << R"(",
  "output_root": ")" << out << R"(",
  "feature": ")" << feature << R"(",
  "split": {"train": 0.34, "validation": 0.33, "test": 0.33, "seed": 7},
  "train": {"learning_rate": 0.001, "batch_size": 4, "max_epochs": )"
      << epochs << R"(, "patience": 100, "seed": 11},
  "synth": {"noise_seed": 5, "griffinlim_iterations": 30, "griffinlim_seed": 2}
})";
  cfg.close();
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("full toy pipeline: mel route") {
  testutil::TempDir dir("pipe_mel");
  make_toy_corpus(dir.path("corpus"));
  auto cfg = load_config(write_toy_config(dir.path("cfg.json"),
                                          dir.path("corpus"), dir.path("out"),
                                          "mel", 2));

  cmd_split(cfg);
  auto split = read_split(split_path(cfg));
  CHECK(split.train.size() == 1);
  CHECK(split.validation.size() == 1);
  CHECK(split.test.size() == 1);

  cmd_extract(cfg);
  for (const auto& id : {"utt0", "utt1", "utt2"}) {
    CHECK(fs::exists(feature_dir(cfg) + "/" + id + std::string(".img")));
    CHECK(fs::exists(feature_dir(cfg) + "/" + id + std::string(".mel")));
    CHECK(fs::exists(feature_dir(cfg) + "/" + id + std::string(".cvp")));
  }
  // Synchrony contract: feature frame counts match the image count.
  auto images = read_images(feature_dir(cfg) + "/utt0.img");
  auto mel = read_mel(feature_dir(cfg) + "/utt0.mel");
  CHECK(images.rows == 6);
  CHECK(mel.values.rows == 6);
  CHECK(mel.values.cols == 80);

  cmd_train(cfg);
  CHECK(fs::exists(model_dir(cfg) + "/mel.cnn"));
  {
    std::ifstream log(model_dir(cfg) + "/mel_train_log.tsv");
    std::string header;
    std::getline(log, header);
    CHECK(header == "epoch\ttrain_mse\tval_mse");
    int rows = 0;
    std::string line;
    while (std::getline(log, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 2);  // max_epochs with huge patience
  }

  cmd_predict(cfg);
  const std::string test_id = split.test.front();
  auto pred = read_mel(pred_dir(cfg) + "/" + test_id + ".mel");
  CHECK(pred.values.rows == 6);
  CHECK(pred.values.cols == 80);
  CHECK(pred.hop == kHopSamples);

  cmd_synth(cfg, "griffinlim");
  auto wav = read_wav(synth_dir(cfg) + "/" + test_id + ".wav");
  CHECK(wav.size() > 0);

  cmd_synth(cfg, "export");
  auto cond = read_mel(cfg.output_root + "/cond/" + test_id + ".mel");
  CHECK(cond.hop == kConditioningHop);
  CHECK(cond.values.cols == 80);

  cmd_eval(cfg);
  const auto report = slurp(eval_dir(cfg) + "/mcd.tsv");
  CHECK(report.find(test_id) != std::string::npos);
  CHECK(report.find("mean") != std::string::npos);

  SUBCASE("stages are idempotent") {
    const auto before = slurp(feature_dir(cfg) + "/utt1.mel");
    cmd_extract(cfg);
    CHECK(slurp(feature_dir(cfg) + "/utt1.mel") == before);
    const auto split_before = slurp(split_path(cfg));
    cmd_split(cfg);
    CHECK(slurp(split_path(cfg)) == split_before);
  }
}

TEST_CASE("full toy pipeline: continuous-vocoder route") {
  testutil::TempDir dir("pipe_cvp");
  make_toy_corpus(dir.path("corpus"));
  auto cfg = load_config(write_toy_config(dir.path("cfg.json"),
                                          dir.path("corpus"), dir.path("out"),
                                          "contvoc", 1));
  cmd_split(cfg);
  cmd_extract(cfg);
  cmd_train(cfg);
  CHECK(fs::exists(model_dir(cfg) + "/spectral.cnn"));
  CHECK(fs::exists(model_dir(cfg) + "/excitation.cnn"));

  cmd_predict(cfg);
  auto split = read_split(split_path(cfg));
  const std::string test_id = split.test.front();
  auto params = read_contparams(pred_dir(cfg) + "/" + test_id + ".cvp");
  validate_params(params);  // sanitized predictions satisfy the invariants
  CHECK(params.frames() == 6);

  cmd_synth(cfg, "contvoc");
  auto wav = read_wav(synth_dir(cfg) + "/" + test_id + ".wav");
  CHECK(wav.size() == 6 * kHopSamples);

  cmd_eval(cfg);
  CHECK(fs::exists(eval_dir(cfg) + "/mcd.tsv"));

  SUBCASE("feature-space MCD path") {
    cmd_eval(cfg, true);
    const auto report = slurp(eval_dir(cfg) + "/mcd.tsv");
    CHECK(report.find(test_id) != std::string::npos);
  }
}

TEST_CASE("pipeline determinism: identical artifacts for identical seeds") {
  testutil::TempDir dir("pipe_det");
  make_toy_corpus(dir.path("corpus"));
  auto run = [&](const std::string& out) {
    auto cfg = load_config(write_toy_config(dir.path("cfg_" + out + ".json"),
                                            dir.path("corpus"), dir.path(out),
                                            "mel", 1));
    cmd_split(cfg);
    cmd_extract(cfg);
    cmd_train(cfg);
    cmd_predict(cfg);
    cmd_synth(cfg, "griffinlim");
    cmd_synth(cfg, "export");
    return cfg;
  };
  auto a = run("out_a");
  auto b = run("out_b");
  auto split = read_split(split_path(a));
  const std::string test_id = split.test.front();
  CHECK(slurp(model_dir(a) + "/mel.cnn") == slurp(model_dir(b) + "/mel.cnn"));
  CHECK(slurp(synth_dir(a) + "/" + test_id + ".wav") ==
        slurp(synth_dir(b) + "/" + test_id + ".wav"));
  CHECK(slurp(a.output_root + "/cond/" + test_id + ".mel") ==
        slurp(b.output_root + "/cond/" + test_id + ".mel"));
}

TEST_CASE("identical reference and synthesis give a 0 dB MCD row") {
  testutil::TempDir dir("pipe_zero");
  make_toy_corpus(dir.path("corpus"));
  auto cfg = load_config(write_toy_config(dir.path("cfg.json"),
                                          dir.path("corpus"), dir.path("out"),
                                          "mel"));
  cmd_split(cfg);
  auto split = read_split(split_path(cfg));
  fs::create_directories(synth_dir(cfg));
  for (const auto& id : split.test)
    fs::copy_file(dir.path("corpus") + "/" + id + ".wav",
                  synth_dir(cfg) + "/" + id + ".wav");
  cmd_eval(cfg);
  const auto report = slurp(eval_dir(cfg) + "/mcd.tsv");
  CHECK(report.find(split.test.front() + "\t0\t") != std::string::npos);
}

TEST_CASE("missing upstream artifacts raise stage-dependency errors") {
  testutil::TempDir dir("pipe_dep");
  make_toy_corpus(dir.path("corpus"));
  auto cfg = load_config(write_toy_config(dir.path("cfg.json"),
                                          dir.path("corpus"), dir.path("out"),
                                          "mel"));
  CHECK_THROWS_WITH_AS(cmd_extract(cfg), doctest::Contains("stage-dependency"),
                       Error);
  cmd_split(cfg);
  CHECK_THROWS_WITH_AS(cmd_train(cfg), doctest::Contains("stage-dependency"),
                       Error);
  CHECK_THROWS_WITH_AS(cmd_predict(cfg),
                       doctest::Contains("stage-dependency"), Error);

  SUBCASE("config validation") {
    std::ofstream bad(dir.path("bad.json"));
    bad << R"({"corpus_root": "/nonexistent/place", "output_root": "x"})";
    bad.close();
    CHECK_THROWS_WITH_AS(load_config(dir.path("bad.json")),
                         doctest::Contains("invalid-config"), Error);
  }
}

TEST_CASE("CLI binary drives the stages and reports machine-readable errors") {
  const char* bin = std::getenv("UTI2SPEECH_BIN");
  if (!bin) return;  // only run when ctest provides the binary path
  testutil::TempDir dir("pipe_cli");
  make_toy_corpus(dir.path("corpus"));
  write_toy_config(dir.path("cfg.json"), dir.path("corpus"), dir.path("out"),
                   "mel");

  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(bin) + " " + args + " 2>" +
                            dir.path("stderr.txt") + " >/dev/null";
    return std::system(cmd.c_str());
  };
  CHECK(run("split --config " + dir.path("cfg.json")) == 0);
  CHECK(fs::exists(dir.path("out") + "/split.tsv"));

  // Missing features: exit nonzero with the documented error line.
  CHECK(run("train --config " + dir.path("cfg.json")) != 0);
  const auto err = slurp(dir.path("stderr.txt"));
  CHECK(err.find("uti2speech-error\tstage-dependency\t") != std::string::npos);

  // MUSHRA path end to end.
  {
    std::ofstream csv(dir.path("scores.csv"));
    csv << "listener,system,sentence,score\n";
    for (int l = 0; l < 8; ++l) {
      csv << "L" << l << ",sysA,s0," << 40 + l << "\n";
      csv << "L" << l << ",sysB,s0," << 60 + l << "\n";
    }
  }
  CHECK(run("mushra --scores " + dir.path("scores.csv") + " --out " +
            dir.path("mushra.tsv")) == 0);
  const auto tsv = slurp(dir.path("mushra.tsv"));
  CHECK(tsv.find("sysA\tsysB") != std::string::npos);
}
