// Copyright 2026 The Preictal Authors.
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

#include "preictal/io.hpp"

#include <filesystem>
#include <fstream>

#include "preictal/error.hpp"

namespace preictal {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(errc::io_error, "read failed for '" + path + "'");
  return bytes;
}

void write_binary_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(errc::io_error, "cannot create '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(errc::io_error, "write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io_error, "cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(errc::io_error, "read failed for '" + path + "'");
  return text;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(errc::io_error, "cannot create '" + path + "'");
  out << text;
  if (!out) throw Error(errc::io_error, "write failed for '" + path + "'");
}

void make_directories(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw Error(errc::io_error, "cannot create directory '" + path + "'");
}

std::string find_summary_file(const std::string& directory) {
  std::vector<std::string> hits;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(directory, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.find("summary") != std::string::npos && name.ends_with(".txt")) {
      hits.push_back(entry.path().string());
    }
  }
  if (ec) throw Error(errc::io_error, "cannot list '" + directory + "'");
  if (hits.size() != 1) {
    throw Error(errc::io_error, "expected exactly one *summary*.txt in '" +
                                    directory + "', found " +
                                    std::to_string(hits.size()));
  }
  return hits.front();
}

}  // namespace preictal
