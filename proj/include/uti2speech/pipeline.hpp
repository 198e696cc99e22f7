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

#pragma once

#include <string>
#include <vector>

#include "uti2speech/cnn.hpp"
#include "uti2speech/dataset.hpp"
#include "uti2speech/mel.hpp"
#include "uti2speech/mgc.hpp"
#include "uti2speech/postproc.hpp"
#include "uti2speech/stft.hpp"

namespace uti2speech {

// One config file drives every stage; all randomness flows from the named
// seeds in here.
struct PipelineConfig {
  std::string corpus_root;  // <id>.bin + <id>.meta + <id>.wav per utterance
  std::string output_root;
  std::string feature = "mel";  // "mel" (D=80) or "contvoc" (D=25 + D=2)

  SplitRatios split_ratios;
  uint64_t split_seed = 42;

  StftConfig stft;
  double mel_fmin = 0.0;
  double mel_fmax = 8000.0;
  int n_mels = 80;

  MgcConfig mgc;
  TrainConfig train;
  SmoothingConfig smoothing;

  uint64_t synth_noise_seed = 1;
  int griffinlim_iterations = 60;
  uint64_t griffinlim_seed = 0;

  bool write_tsv_dumps = false;  // plot-friendly TSV next to binaries
  int jobs = 0;                  // 0: UTI2SPEECH_JOBS env var, else 1
};

// Parses the JSON config; requires corpus_root to exist.
PipelineConfig load_config(const std::string& path);

// Resolved output locations (all under output_root).
std::string split_path(const PipelineConfig& cfg);
std::string feature_dir(const PipelineConfig& cfg);
std::string model_dir(const PipelineConfig& cfg);
std::string pred_dir(const PipelineConfig& cfg);
std::string synth_dir(const PipelineConfig& cfg);
std::string eval_dir(const PipelineConfig& cfg);

// Resized-image cache: "IMG1" magic + {frames, rows, cols} LE int32 +
// row-major float32 frames.
void write_images(const std::string& path, const MatF& frames, int rows,
                  int cols);
MatF read_images(const std::string& path);

// Utterance ids found in the corpus (sorted; id = basename of .bin with
// matching .meta and .wav).
std::vector<std::string> discover_utterances(const std::string& corpus_root);

// Pipeline stages. Each is idempotent: unchanged inputs produce
// byte-identical outputs. Missing upstream artifacts raise
// "stage-dependency" errors naming the file.
void cmd_split(const PipelineConfig& cfg);
void cmd_extract(const PipelineConfig& cfg);
void cmd_train(const PipelineConfig& cfg);
void cmd_predict(const PipelineConfig& cfg);
void cmd_synth(const PipelineConfig& cfg, const std::string& engine);
void cmd_eval(const PipelineConfig& cfg, bool on_features = false);
void cmd_mushra(const std::string& scores_csv, const std::string& out_tsv);

}  // namespace uti2speech
