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

#include <cstdint>
#include <string>
#include <vector>

#include "uti2speech/common.hpp"

namespace uti2speech {

// Time-ordered raw scanline frames, 8-bit echo intensities.
struct UltrasoundSequence {
  int num_frames = 0;
  int num_vectors = 0;     // scanlines per frame
  int pix_per_vector = 0;  // samples per scanline
  double fps = kUltrasoundFps;
  std::vector<uint8_t> frames;  // frame-major, num_vectors x pix_per_vector

  size_t frame_bytes() const {
    return static_cast<size_t>(num_vectors) * pix_per_vector;
  }
  const uint8_t* frame(int t) const { return frames.data() + t * frame_bytes(); }
  uint8_t* frame(int t) { return frames.data() + t * frame_bytes(); }
};

// Container: raw concatenated uint8 frames, plus a key=value sidecar with
// NumVectors, PixPerVector and FramesPerSec.
UltrasoundSequence read_ultrasound(const std::string& container_path,
                                   const std::string& meta_path);
void write_ultrasound(const std::string& container_path,
                      const std::string& meta_path,
                      const UltrasoundSequence& us);

// Number of frames both streams cover: min of the ultrasound frame count
// and the audio frame count at the given hop (floor(N/hop) + 1 centered
// frames). Throws "empty-overlap" when zero.
int align_frames(const UltrasoundSequence& us, const Waveform& wav,
                 int hop = kHopSamples);

}  // namespace uti2speech
