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

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "test_util.hpp"
#include "uti2speech/dataset.hpp"
#include "uti2speech/resize.hpp"
#include "uti2speech/ultrasound.hpp"
#include "uti2speech/wav.hpp"

using namespace uti2speech;

namespace {

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_meta(const std::string& path, int nv, int ppv, double fps) {
  std::ofstream out(path);
  out << "NumVectors=" << nv << "\nPixPerVector=" << ppv
      << "\nFramesPerSec=" << fps << "\n";
}

// Independent Keys-kernel oracle: direct 2D evaluation over the 4x4 tap
// neighborhood, no separable passes.
double keys_weight(double x) {
  const double a = -0.5;
  x = std::fabs(x);
  if (x <= 1.0) return (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0;
  if (x < 2.0) return a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a;
  return 0.0;
}

double resize_oracle_at(const MatD& src, int out_rows, int out_cols, int y,
                        int x) {
  const double sy = (y + 0.5) * (static_cast<double>(src.rows) / out_rows) - 0.5;
  const double sx = (x + 0.5) * (static_cast<double>(src.cols) / out_cols) - 0.5;
  const int by = static_cast<int>(std::floor(sy)) - 1;
  const int bx = static_cast<int>(std::floor(sx)) - 1;
  double acc = 0.0;
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      const int r = std::clamp(by + j, 0, src.rows - 1);
      const int c = std::clamp(bx + i, 0, src.cols - 1);
      acc += keys_weight(sy - (by + j)) * keys_weight(sx - (bx + i)) *
             src.at(r, c);
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("read_ultrasound parses the container against the sidecar") {
  testutil::TempDir dir("ingest");
  const int nv = 64, ppv = 842;
  std::vector<uint8_t> bytes(2 * nv * ppv, 0);
  for (size_t i = 0; i < bytes.size(); ++i)
    bytes[i] = static_cast<uint8_t>(i * 131 % 251);
  write_bytes(dir.path("u.bin"), bytes);
  write_meta(dir.path("u.meta"), nv, ppv, 81.67);

  auto us = read_ultrasound(dir.path("u.bin"), dir.path("u.meta"));
  CHECK(us.num_frames == 2);
  CHECK(us.num_vectors == nv);
  CHECK(us.pix_per_vector == ppv);
  CHECK(us.fps == doctest::Approx(81.67));
  CHECK(us.frame(1)[0] == bytes[size_t(nv) * ppv]);

  SUBCASE("indivisible size is a malformed container") {
    bytes.push_back(0);
    write_bytes(dir.path("bad.bin"), bytes);
    CHECK_THROWS_WITH_AS(read_ultrasound(dir.path("bad.bin"), dir.path("u.meta")),
                         doctest::Contains("malformed-container"), Error);
  }
  SUBCASE("missing metadata key") {
    std::ofstream out(dir.path("bad.meta"));
    out << "NumVectors=64\nFramesPerSec=81.67\n";
    out.close();
    CHECK_THROWS_WITH_AS(read_ultrasound(dir.path("u.bin"), dir.path("bad.meta")),
                         doctest::Contains("invalid-metadata"), Error);
  }
}

TEST_CASE("all-zero container keeps content and fps") {
  testutil::TempDir dir("ingest0");
  write_bytes(dir.path("z.bin"), std::vector<uint8_t>(3 * 16 * 32, 0));
  write_meta(dir.path("z.meta"), 16, 32, 60.0);
  auto us = read_ultrasound(dir.path("z.bin"), dir.path("z.meta"));
  CHECK(us.num_frames == 3);
  CHECK(us.fps == doctest::Approx(60.0));
  CHECK(std::all_of(us.frames.begin(), us.frames.end(),
                    [](uint8_t b) { return b == 0; }));
}

TEST_CASE("ultrasound write/read round trip is the identity on frames") {
  testutil::TempDir dir("ingest_rt");
  UltrasoundSequence us;
  us.num_frames = 4;
  us.num_vectors = 8;
  us.pix_per_vector = 12;
  us.fps = 81.67;
  us.frames.resize(us.num_frames * us.frame_bytes());
  std::mt19937 rng(7);
  for (auto& b : us.frames) b = static_cast<uint8_t>(rng());

  write_ultrasound(dir.path("rt.bin"), dir.path("rt.meta"), us);
  auto back = read_ultrasound(dir.path("rt.bin"), dir.path("rt.meta"));
  CHECK(back.num_frames == us.num_frames);
  CHECK(back.frames == us.frames);
}

TEST_CASE("resize reproduces constants") {
  MatD src(16, 20, 128.0 / 255.0);
  auto out = resize_bicubic(src, kImageRows, kImageCols);
  for (const double v : out.data) CHECK(v == doctest::Approx(128.0 / 255.0).epsilon(1e-6));
}

TEST_CASE("resize of a horizontal ramp stays linear in the column index") {
  MatD src(64, 842);
  for (int r = 0; r < src.rows; ++r)
    for (int c = 0; c < src.cols; ++c) src.at(r, c) = static_cast<double>(c);
  auto out = resize_bicubic(src, 64, 128);
  // Fit expected slope/intercept from the sampling geometry.
  const double scale = 842.0 / 128.0;
  for (int r = 0; r < out.rows; ++r) {
    for (int c = 0; c < out.cols; ++c) {
      const double expected = (c + 0.5) * scale - 0.5;
      CHECK(out.at(r, c) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
  // Exactly linear: second differences vanish.
  for (int c = 2; c < out.cols; ++c) {
    const double dd = out.at(0, c) - 2.0 * out.at(0, c - 1) + out.at(0, c - 2);
    CHECK(std::fabs(dd) < 1e-6);
  }
}

TEST_CASE("resize matches the direct Keys-kernel oracle everywhere") {
  MatD src(64, 842);
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto& v : src.data) v = uni(rng);
  auto out = resize_bicubic(src, kImageRows, kImageCols);
  for (int y = 0; y < kImageRows; ++y)
    for (int x = 0; x < kImageCols; ++x)
      CHECK(std::fabs(out.at(y, x) -
                      resize_oracle_at(src, kImageRows, kImageCols, y, x)) <
            1e-9);
}

TEST_CASE("resize commutes with affine intensity changes") {
  MatD src(32, 50);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto& v : src.data) v = uni(rng);
  MatD affine = src;
  const double a = 1.7, b = -0.3;
  for (auto& v : affine.data) v = a * v + b;

  auto out1 = resize_bicubic(src, 20, 24);
  auto out2 = resize_bicubic(affine, 20, 24);
  for (size_t i = 0; i < out1.data.size(); ++i)
    CHECK(out2.data[i] == doctest::Approx(a * out1.data[i] + b).epsilon(1e-6));
}

TEST_CASE("resize_frame clamps into [0,1] and rejects tiny sources") {
  std::vector<uint8_t> frame(8 * 8, 128);
  auto out = resize_frame(frame.data(), 8, 8);
  CHECK(out.rows == kImageRows);
  CHECK(out.cols == kImageCols);
  for (float v : out.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
    CHECK(v == doctest::Approx(128.0 / 255.0).epsilon(1e-6));
  }
  CHECK_THROWS_WITH_AS(resize_frame(frame.data(), 3, 8),
                       doctest::Contains("too-small-input"), Error);
}

TEST_CASE("align_frames truncates to the shorter stream") {
  UltrasoundSequence us;
  us.num_vectors = 4;
  us.pix_per_vector = 4;

  Waveform wav;
  wav.sample_rate = kSampleRate;

  us.num_frames = 100;
  wav.samples.assign(27000, 0.0);  // 100 hops + centered frame = 101
  CHECK(align_frames(us, wav) == 100);

  us.num_frames = 50;
  wav.samples.assign(270000, 0.0);
  CHECK(align_frames(us, wav) == 50);

  us.num_frames = 0;
  CHECK_THROWS_WITH_AS(align_frames(us, wav),
                       doctest::Contains("empty-overlap"), Error);
}

TEST_CASE("split sizes follow largest-remainder rounding") {
  std::vector<std::string> ids;
  for (int i = 0; i < 209; ++i) ids.push_back("utt" + std::to_string(i));
  auto split = split_dataset(ids, 42);
  CHECK(split.train.size() == 178);
  CHECK(split.validation.size() == 21);
  CHECK(split.test.size() == 10);

  ids.resize(20);
  auto small = split_dataset(ids, 42);
  CHECK(small.train.size() == 17);
  CHECK(small.validation.size() == 2);
  CHECK(small.test.size() == 1);
}

TEST_CASE("split is deterministic and a partition") {
  std::vector<std::string> ids;
  for (int i = 0; i < 57; ++i) ids.push_back("s" + std::to_string(i));
  auto a = split_dataset(ids, 7);
  auto b = split_dataset(ids, 7);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);

  std::set<std::string> all(ids.begin(), ids.end());
  std::set<std::string> seen;
  for (const auto* list : {&a.train, &a.validation, &a.test}) {
    for (const auto& id : *list) {
      CHECK(seen.insert(id).second);  // pairwise disjoint
      CHECK(all.count(id) == 1);
    }
  }
  CHECK(seen.size() == all.size());  // exhaustive

  CHECK_THROWS_WITH_AS(split_dataset({"a", "b"}, 1),
                       doctest::Contains("too-few-utterances"), Error);
}

TEST_CASE("split manifest round trips") {
  testutil::TempDir dir("split");
  std::vector<std::string> ids;
  for (int i = 0; i < 12; ++i) ids.push_back("u" + std::to_string(i));
  auto split = split_dataset(ids, 3);
  write_split(dir.path("split.tsv"), split);
  auto back = read_split(dir.path("split.tsv"));
  CHECK(back.train == split.train);
  CHECK(back.validation == split.validation);
  CHECK(back.test == split.test);
}

TEST_CASE("wav io round trips 16-bit content") {
  testutil::TempDir dir("wav");
  auto wav = testutil::sine(440.0, 0.05, 0.7);
  write_wav(dir.path("a.wav"), wav);
  auto back = read_wav(dir.path("a.wav"));
  CHECK(back.sample_rate == kSampleRate);
  CHECK(back.size() == wav.size());
  for (int i = 0; i < wav.size(); ++i)
    CHECK(back.samples[i] == doctest::Approx(wav.samples[i]).epsilon(1e-3));
}
