// Copyright 2026 The ETTFS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ettfs/data.hpp"

#include <fstream>

#include "ettfs/error.hpp"

namespace ettfs {
namespace {

constexpr uint32_t kIdxImagesMagic = 0x00000803;
constexpr uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(msg("cannot open ", path));
  in.seekg(0, std::ios::end);
  const std::streamoff len = in.tellg();
  in.seekg(0);
  std::vector<uint8_t> bytes(static_cast<size_t>(len));
  in.read(reinterpret_cast<char*>(bytes.data()), len);
  if (!in) throw FormatError(msg("short read from ", path));
  return bytes;
}

uint32_t read_be32(const std::vector<uint8_t>& b, size_t at,
                   const std::string& path) {
  if (at + 4 > b.size()) {
    throw FormatError(msg(path, ": truncated at byte offset ", at));
  }
  return (uint32_t(b[at]) << 24) | (uint32_t(b[at + 1]) << 16) |
         (uint32_t(b[at + 2]) << 8) | uint32_t(b[at + 3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path,
                 const std::string& labels_path) {
  const std::vector<uint8_t> img = read_file(images_path);
  const std::vector<uint8_t> lab = read_file(labels_path);

  if (read_be32(img, 0, images_path) != kIdxImagesMagic) {
    throw FormatError(msg(images_path, ": bad image magic at byte offset 0"));
  }
  const int64_t count = read_be32(img, 4, images_path);
  const int64_t rows = read_be32(img, 8, images_path);
  const int64_t cols = read_be32(img, 12, images_path);
  const size_t img_need = 16 + size_t(count) * size_t(rows) * size_t(cols);
  if (img.size() < img_need) {
    throw FormatError(msg(images_path, ": truncated at byte offset ",
                          img.size(), ", expected ", img_need));
  }

  if (read_be32(lab, 0, labels_path) != kIdxLabelsMagic) {
    throw FormatError(msg(labels_path, ": bad label magic at byte offset 0"));
  }
  const int64_t lab_count = read_be32(lab, 4, labels_path);
  if (lab_count != count) {
    throw FormatError(msg("count mismatch: ", count, " images in ",
                          images_path, " vs ", lab_count, " labels in ",
                          labels_path));
  }
  if (lab.size() < 8 + size_t(count)) {
    throw FormatError(msg(labels_path, ": truncated at byte offset ",
                          lab.size(), ", expected ", 8 + size_t(count)));
  }

  Dataset d;
  d.count = count;
  d.item_shape = {1, rows, cols};
  d.images.assign(img.begin() + 16,
                  img.begin() + static_cast<ptrdiff_t>(img_need));
  d.labels.assign(lab.begin() + 8, lab.begin() + 8 + count);
  return d;
}

Dataset load_cifar10(const std::string& dir, bool train) {
  constexpr int64_t kRecord = 3073;  // label byte + 3*32*32 image
  Dataset d;
  d.item_shape = {3, 32, 32};
  std::vector<std::string> files;
  if (train) {
    for (int i = 1; i <= 5; ++i) {
      files.push_back(dir + "/data_batch_" + std::to_string(i) + ".bin");
    }
  } else {
    files.push_back(dir + "/test_batch.bin");
  }
  for (const auto& path : files) {
    const std::vector<uint8_t> bytes = read_file(path);
    if (bytes.empty() || bytes.size() % kRecord != 0) {
      throw FormatError(msg(path, ": size ", bytes.size(),
                            " is not a multiple of ", kRecord,
                            "-byte records"));
    }
    const int64_t n = static_cast<int64_t>(bytes.size()) / kRecord;
    for (int64_t i = 0; i < n; ++i) {
      const uint8_t* rec = bytes.data() + i * kRecord;
      d.labels.push_back(rec[0]);
      d.images.insert(d.images.end(), rec + 1, rec + kRecord);
    }
    d.count += n;
  }
  return d;
}

Dataset load_named_dataset(const std::string& name, const std::string& data_dir,
                           bool train) {
  const std::string base = data_dir + "/" + name;
  if (name == "mnist" || name == "fashion") {
    const std::string prefix = train ? "train" : "t10k";
    return load_idx(base + "/" + prefix + "-images-idx3-ubyte",
                    base + "/" + prefix + "-labels-idx1-ubyte");
  }
  if (name == "cifar10") return load_cifar10(base, train);
  throw ConfigError(msg("unknown dataset \"", name,
                        "\" (expected mnist, fashion, or cifar10)"));
}

}  // namespace ettfs
