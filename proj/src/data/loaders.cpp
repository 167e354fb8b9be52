/*
 * Copyright 2026 The Spyker Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spyker/data/loaders.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "spyker/errors.hpp"

namespace spyker::data {
namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw LoadError(LoadError::Kind::kOpen, "cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const unsigned char* b) {
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

void require_size(const std::vector<unsigned char>& buf, std::size_t need,
                  const std::filesystem::path& p) {
  if (buf.size() < need) {
    throw LoadError(LoadError::Kind::kTruncated, p.string() + ": truncated (" +
                                                     std::to_string(buf.size()) + " of " +
                                                     std::to_string(need) + " bytes)");
  }
}

void require_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& p) {
  if (got != want) {
    char msg[96];
    std::snprintf(msg, sizeof msg, ": bad IDX magic 0x%08x (expected 0x%08x)", got, want);
    throw LoadError(LoadError::Kind::kMagic, p.string() + msg);
  }
}

template <typename T>
void put_le(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "cache writer assumes little-endian host");
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get_le(const std::vector<unsigned char>& buf, std::size_t& off, const std::filesystem::path& p) {
  require_size(buf, off + sizeof(T), p);
  T v;
  std::memcpy(&v, buf.data() + off, sizeof v);
  off += sizeof v;
  return v;
}

constexpr std::array<char, 8> kCacheMagic = {'S', 'P', 'Y', 'K', 'D', 'S', 'E', 'T'};

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::string name) {
  const auto img = read_all(images);
  const auto lab = read_all(labels);

  require_size(img, 4, images);
  require_magic(be32(img.data()), kIdxImagesMagic, images);
  require_size(lab, 4, labels);
  require_magic(be32(lab.data()), kIdxLabelsMagic, labels);
  require_size(img, 16, images);
  require_size(lab, 8, labels);

  const std::size_t n_img = be32(img.data() + 4);
  const std::size_t rows = be32(img.data() + 8);
  const std::size_t cols = be32(img.data() + 12);
  const std::size_t n_lab = be32(lab.data() + 4);
  if (n_img != n_lab) {
    throw LoadError(LoadError::Kind::kCountMismatch,
                    "IDX sample counts differ: " + std::to_string(n_img) + " images vs " +
                        std::to_string(n_lab) + " labels");
  }
  const std::size_t dim = rows * cols;
  require_size(img, 16 + n_img * dim, images);
  require_size(lab, 8 + n_lab, labels);
  if (n_img == 0 || dim == 0) throw LoadError(LoadError::Kind::kFormat, images.string() + ": empty IDX payload");

  Dataset d;
  d.name = std::move(name);
  d.dim = dim;
  d.features.resize(n_img * dim);
  d.labels.resize(n_img);
  for (std::size_t i = 0; i < n_img * dim; ++i) d.features[i] = static_cast<float>(img[16 + i]) / 255.0f;
  int max_label = 0;
  for (std::size_t i = 0; i < n_img; ++i) {
    d.labels[i] = lab[8 + i];
    max_label = std::max(max_label, int{lab[8 + i]});
  }
  d.n_classes = std::max(2, max_label + 1);
  return d;
}

Dataset load_cifar10_gray16(const std::vector<std::filesystem::path>& batches, std::string name) {
  constexpr std::size_t kRecord = 1 + 3 * 32 * 32;
  Dataset d;
  d.name = std::move(name);
  d.dim = 16 * 16;
  d.n_classes = 10;
  for (const auto& p : batches) {
    const auto buf = read_all(p);
    if (buf.empty() || buf.size() % kRecord != 0) {
      throw LoadError(LoadError::Kind::kTruncated, p.string() + ": size is not a multiple of the CIFAR record");
    }
    for (std::size_t off = 0; off < buf.size(); off += kRecord) {
      const unsigned char label = buf[off];
      if (label > 9) throw LoadError(LoadError::Kind::kFormat, p.string() + ": label out of range");
      d.labels.push_back(label);
      const unsigned char* px = buf.data() + off + 1;
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          float acc = 0.0f;
          for (int c = 0; c < 3; ++c) {
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) acc += px[c * 1024 + (2 * y + dy) * 32 + (2 * x + dx)];
            }
          }
          d.features.push_back(acc / (12.0f * 255.0f));
        }
      }
    }
  }
  if (d.labels.empty()) throw LoadError(LoadError::Kind::kTruncated, "no CIFAR records loaded");
  return d;
}

void save_cache(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError(LoadError::Kind::kOpen, "cannot write " + path.string());
  out.write(kCacheMagic.data(), kCacheMagic.size());
  put_le<std::uint32_t>(out, kCacheVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.dim));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.n_classes));
  put_le<std::uint64_t>(out, d.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.name.size()));
  out.write(d.name.data(), static_cast<std::streamsize>(d.name.size()));
  out.write(reinterpret_cast<const char*>(d.features.data()),
            static_cast<std::streamsize>(d.features.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(d.labels.data()),
            static_cast<std::streamsize>(d.labels.size() * sizeof(std::int32_t)));
  if (!out) throw LoadError(LoadError::Kind::kOpen, "write failed for " + path.string());
}

Dataset load_cache(const std::filesystem::path& path) {
  const auto buf = read_all(path);
  require_size(buf, kCacheMagic.size(), path);
  if (!std::equal(kCacheMagic.begin(), kCacheMagic.end(), buf.begin())) {
    throw LoadError(LoadError::Kind::kMagic, path.string() + ": not a dataset cache file");
  }
  std::size_t off = kCacheMagic.size();
  const auto version = get_le<std::uint32_t>(buf, off, path);
  if (version != kCacheVersion) {
    throw LoadError(LoadError::Kind::kFormat, path.string() + ": unsupported cache version " + std::to_string(version));
  }
  Dataset d;
  d.dim = get_le<std::uint32_t>(buf, off, path);
  d.n_classes = static_cast<int>(get_le<std::uint32_t>(buf, off, path));
  const auto n = get_le<std::uint64_t>(buf, off, path);
  const auto name_len = get_le<std::uint32_t>(buf, off, path);
  require_size(buf, off + name_len, path);
  d.name.assign(reinterpret_cast<const char*>(buf.data() + off), name_len);
  off += name_len;
  require_size(buf, off + n * d.dim * 4 + n * 4, path);
  d.features.resize(n * d.dim);
  std::memcpy(d.features.data(), buf.data() + off, d.features.size() * 4);
  off += d.features.size() * 4;
  d.labels.resize(n);
  std::memcpy(d.labels.data(), buf.data() + off, d.labels.size() * 4);
  return d;
}

}  // namespace spyker::data
