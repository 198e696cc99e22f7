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

// Little-endian binary file helpers shared by the MEL1/NRM1/CVP1/CNN1
// container writers.

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "uti2speech/common.hpp"

namespace uti2speech::binio {

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    require(out_.good(), "io-error", "cannot write " + path);
  }
  void magic(const char tag[4]) { out_.write(tag, 4); }
  void i32(int32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out_.write(reinterpret_cast<const char*>(b), 4);
  }
  void f32(float v) {
    static_assert(sizeof(float) == 4);
    uint32_t u;
    std::memcpy(&u, &v, 4);
    i32(static_cast<int32_t>(u));
  }
  void f32_array(const float* p, size_t n) {
    for (size_t i = 0; i < n; ++i) f32(p[i]);
  }
  void close() {
    out_.flush();
    require(out_.good(), "io-error", "short write to " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    require(in_.good(), "io-error", "cannot open " + path);
  }
  void expect_magic(const char tag[4], const std::string& error_code) {
    char buf[4] = {0, 0, 0, 0};
    in_.read(buf, 4);
    require(in_.gcount() == 4 && std::memcmp(buf, tag, 4) == 0, error_code,
            path_ + ": bad magic, expected " + std::string(tag, 4));
  }
  int32_t i32(const std::string& error_code) {
    unsigned char b[4];
    in_.read(reinterpret_cast<char*>(b), 4);
    require(in_.gcount() == 4, error_code, path_ + ": truncated file");
    return static_cast<int32_t>(static_cast<uint32_t>(b[0]) |
                                (static_cast<uint32_t>(b[1]) << 8) |
                                (static_cast<uint32_t>(b[2]) << 16) |
                                (static_cast<uint32_t>(b[3]) << 24));
  }
  float f32(const std::string& error_code) {
    const uint32_t u = static_cast<uint32_t>(i32(error_code));
    float v;
    std::memcpy(&v, &u, 4);
    return v;
  }
  void f32_array(float* p, size_t n, const std::string& error_code) {
    for (size_t i = 0; i < n; ++i) p[i] = f32(error_code);
  }
  bool at_eof() {
    in_.peek();
    return in_.eof();
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
};

}  // namespace uti2speech::binio
