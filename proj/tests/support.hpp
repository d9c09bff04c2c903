// Copyright 2026 The revlogic Authors.
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


// Shared helpers for the unit and acceptance tests.

#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "revlogic/llm_gateway.hpp"
#include "revlogic/paper_model.hpp"

namespace revlogic::testing {

namespace fs = std::filesystem;

inline fs::path fixtures_dir() { return REVLOGIC_FIXTURES_DIR; }
inline fs::path assets_dir() { return REVLOGIC_ASSETS_DIR; }

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& data) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << data;
}

/// Markdown fixtures of one directory, sorted by name.
inline std::vector<fs::path> markdown_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".md") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline PaperDocument load_paper(const fs::path& file) {
  return parse_markdown(read_file(file), file.stem().string(), "test");
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("revlogic-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline BackendProfile mock_profile(std::string model = "mock") {
  BackendProfile p;
  p.endpoint_url = "mock://test";
  p.model_name = std::move(model);
  return p;
}

struct MockSetup {
  std::shared_ptr<MockBackend> mock = std::make_shared<MockBackend>();
  std::unique_ptr<Gateway> gateway;

  MockSetup() {
    GatewayOptions opts;
    opts.retry.base_backoff = std::chrono::milliseconds(0);
    gateway = std::make_unique<Gateway>(mock, std::move(opts));
  }
};

}  // namespace revlogic::testing
