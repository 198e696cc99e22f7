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

#include "uti2speech/ultrasound.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace uti2speech {

namespace {

std::map<std::string, std::string> read_meta(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "invalid-metadata", "cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

template <typename T>
T meta_value(const std::map<std::string, std::string>& kv,
             const std::string& key, const std::string& path) {
  auto it = kv.find(key);
  require(it != kv.end(), "invalid-metadata",
          path + ": missing key " + key);
  std::istringstream ss(it->second);
  T value{};
  ss >> value;
  require(!ss.fail(), "invalid-metadata",
          path + ": cannot parse " + key + "=" + it->second);
  return value;
}

}  // namespace

UltrasoundSequence read_ultrasound(const std::string& container_path,
                                   const std::string& meta_path) {
  auto kv = read_meta(meta_path);
  UltrasoundSequence us;
  us.num_vectors = meta_value<int>(kv, "NumVectors", meta_path);
  us.pix_per_vector = meta_value<int>(kv, "PixPerVector", meta_path);
  us.fps = meta_value<double>(kv, "FramesPerSec", meta_path);
  require(us.num_vectors > 0 && us.pix_per_vector > 0, "invalid-metadata",
          meta_path + ": non-positive frame dimensions");
  require(us.fps > 0.0, "invalid-metadata", meta_path + ": FramesPerSec <= 0");

  std::ifstream in(container_path, std::ios::binary | std::ios::ate);
  require(in.good(), "malformed-container", "cannot open " + container_path);
  const auto size = static_cast<size_t>(in.tellg());
  const size_t frame_bytes = us.frame_bytes();
  require(size % frame_bytes == 0, "malformed-container",
          container_path + ": " + std::to_string(size) +
              " bytes not divisible by frame size " +
              std::to_string(frame_bytes));
  us.num_frames = static_cast<int>(size / frame_bytes);
  require(us.num_frames >= 1, "malformed-container",
          container_path + ": empty container");
  us.frames.resize(size);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(us.frames.data()),
          static_cast<std::streamsize>(size));
  require(in.gcount() == static_cast<std::streamsize>(size),
          "malformed-container", container_path + ": short read");
  return us;
}

void write_ultrasound(const std::string& container_path,
                      const std::string& meta_path,
                      const UltrasoundSequence& us) {
  {
    std::ofstream out(container_path, std::ios::binary);
    require(out.good(), "io-error", "cannot write " + container_path);
    out.write(reinterpret_cast<const char*>(us.frames.data()),
              static_cast<std::streamsize>(us.frames.size()));
    require(out.good(), "io-error", "short write to " + container_path);
  }
  std::ofstream meta(meta_path);
  require(meta.good(), "io-error", "cannot write " + meta_path);
  meta << "NumVectors=" << us.num_vectors << "\n"
       << "PixPerVector=" << us.pix_per_vector << "\n"
       << "FramesPerSec=" << us.fps << "\n";
}

int align_frames(const UltrasoundSequence& us, const Waveform& wav, int hop) {
  require(hop >= 1, "invalid-hop", "hop must be >= 1");
  const int audio_frames =
      wav.size() > 0 ? wav.size() / hop + 1 : 0;
  const int t = std::min(us.num_frames, audio_frames);
  require(t > 0, "empty-overlap", "no overlapping frames between streams");
  return t;
}

}  // namespace uti2speech
