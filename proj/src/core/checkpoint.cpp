//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/core/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "scm/core/error.hpp"

namespace scm::checkpoint {
namespace {

constexpr const char* kMagic = "scicore-checkpoint";

void write_f64_le(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_f64_le(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
    throw Error(Errc::CheckpointError, "truncated tensor payload");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string next_line(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::CheckpointError, "truncated manifest");
  return line;
}

}  // namespace

void save(const std::filesystem::path& path, const ParamRefs& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::IoError, "cannot write " + path.string());
  os << kMagic << " 1\n" << "tensors " << params.size() << "\n";
  for (const Parameter* p : params) {
    os << p->name << " f64 " << p->value.shape().size();
    for (std::size_t d : p->value.shape()) os << ' ' << d;
    os << '\n';
  }
  os << "end\n";
  for (const Parameter* p : params) {
    for (double v : p->value.values()) write_f64_le(os, v);
  }
  if (!os) throw Error(Errc::IoError, "failed writing " + path.string());
}

TensorMap load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::IoError, "cannot read " + path.string());

  std::istringstream header(next_line(is));
  std::string magic;
  int version = 0;
  header >> magic >> version;
  if (magic != kMagic || version != 1) {
    throw Error(Errc::CheckpointError, path.string() + " is not a version-1 checkpoint");
  }
  std::istringstream count_line(next_line(is));
  std::string word;
  std::size_t count = 0;
  if (!(count_line >> word >> count) || word != "tensors") {
    throw Error(Errc::CheckpointError, "missing tensor count");
  }

  std::vector<std::pair<std::string, Shape>> manifest;
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream ls(next_line(is));
    std::string name, dtype;
    std::size_t rank = 0;
    if (!(ls >> name >> dtype >> rank) || dtype != "f64") {
      throw Error(Errc::CheckpointError, "bad manifest entry " + std::to_string(i));
    }
    Shape shape(rank);
    for (std::size_t& d : shape) {
      if (!(ls >> d) || d == 0) throw Error(Errc::CheckpointError, "bad shape for " + name);
    }
    manifest.emplace_back(std::move(name), std::move(shape));
  }
  if (next_line(is) != "end") throw Error(Errc::CheckpointError, "missing manifest terminator");

  TensorMap out;
  for (auto& [name, shape] : manifest) {
    std::vector<double> data(shape_size(shape));
    for (double& v : data) v = read_f64_le(is);
    out.emplace(name, Tensor(shape, std::move(data)));
  }
  return out;
}

void restore(const TensorMap& tensors, const ParamRefs& params, bool allow_missing) {
  for (Parameter* p : params) {
    auto it = tensors.find(p->name);
    if (it == tensors.end()) {
      if (allow_missing) continue;
      throw Error(Errc::CheckpointError, "checkpoint has no tensor " + p->name);
    }
    if (it->second.shape() != p->value.shape()) {
      throw Error(Errc::CheckpointError, p->name + " has shape " +
                                             shape_string(it->second.shape()) + ", expected " +
                                             shape_string(p->value.shape()));
    }
    p->value = it->second;
  }
}

}  // namespace scm::checkpoint
