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

#include <CLI11.hpp>

#include <iostream>

#include "uti2speech/pipeline.hpp"

namespace {

// Machine-readable error line: "uti2speech-error\t<code>\t<message>".
int report_error(const std::string& code, const std::string& message) {
  std::cerr << "uti2speech-error\t" << code << "\t" << message << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ultrasound-to-speech toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  int jobs_override = 0;
  std::string engine = "contvoc";
  bool eval_on_features = false;
  std::string scores_csv, mushra_out;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "pipeline config (JSON)")
        ->required();
    sub->add_option("--jobs", jobs_override,
                    "utterance-level parallelism (default: UTI2SPEECH_JOBS "
                    "env var or 1)");
  };

  add_config(app.add_subcommand("split", "write the train/val/test manifest"));
  add_config(app.add_subcommand(
      "extract", "resize ultrasound frames and extract acoustic features"));
  add_config(app.add_subcommand("train", "train the image-to-features model"));
  add_config(app.add_subcommand(
      "predict", "predict features for the test utterances"));
  auto* synth = app.add_subcommand("synth", "generate waveforms or export "
                                            "neural-vocoder conditioning");
  add_config(synth);
  synth->add_option("--engine", engine, "contvoc | griffinlim | export")
      ->check(CLI::IsMember({"contvoc", "griffinlim", "export"}));
  auto* eval = app.add_subcommand("eval", "mel-cepstral distortion report");
  add_config(eval);
  eval->add_flag("--features", eval_on_features,
                 "compare predicted vs reference feature files instead of "
                 "waveforms");
  auto* mushra =
      app.add_subcommand("mushra", "ranksum analysis of listening scores");
  mushra->add_option("--scores", scores_csv,
                     "CSV: listener,system,sentence,score")
      ->required();
  mushra->add_option("--out", mushra_out, "output TSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (mushra->parsed()) {
      uti2speech::cmd_mushra(scores_csv, mushra_out);
      return 0;
    }
    auto cfg = uti2speech::load_config(config_path);
    if (jobs_override > 0) cfg.jobs = jobs_override;
    const std::string stage = app.get_subcommands().front()->get_name();
    if (stage == "split") {
      uti2speech::cmd_split(cfg);
    } else if (stage == "extract") {
      uti2speech::cmd_extract(cfg);
    } else if (stage == "train") {
      uti2speech::cmd_train(cfg);
    } else if (stage == "predict") {
      uti2speech::cmd_predict(cfg);
    } else if (stage == "synth") {
      uti2speech::cmd_synth(cfg, engine);
    } else if (stage == "eval") {
      uti2speech::cmd_eval(cfg, eval_on_features);
    }
  } catch (const uti2speech::Error& e) {
    return report_error(e.code(), e.message());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
