#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "kgtext/model.hpp"

namespace kgtext {

// Versioned binary checkpoint: magic, manifest (dims, seed, iteration, vocab
// hash), the vocabulary itself, then raw parameter tensors stored as float64
// little-endian. Layout documented in README.
inline constexpr char kCheckpointMagic[8] = {'K', 'G', 'T', 'X', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <class X>
void write_pod(std::ostream& out, X x) {
  out.write(reinterpret_cast<const char*>(&x), sizeof(X));
}

template <class X>
X read_pod(std::istream& in) {
  X x{};
  in.read(reinterpret_cast<char*>(&x), sizeof(X));
  if (!in) throw std::runtime_error("truncated checkpoint");
  return x;
}

inline void write_str(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_str(std::istream& in) {
  auto n = read_pod<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error("truncated checkpoint");
  return s;
}

}  // namespace detail

template <class T>
void save_checkpoint(const std::string& path, const Seq2SeqModel<T>& model,
                     std::uint64_t iteration) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::write_pod<std::uint32_t>(out, kCheckpointVersion);
  detail::write_pod<std::int32_t>(out, model.dims().embed);
  detail::write_pod<std::int32_t>(out, model.dims().hidden);
  detail::write_pod<double>(out, model.dims().dropout);
  detail::write_pod<std::int32_t>(out, model.dims().max_decode_steps);
  detail::write_pod<std::uint64_t>(out, model.seed());
  detail::write_pod<std::uint64_t>(out, iteration);
  detail::write_pod<std::uint64_t>(out, model.vocab().hash());
  detail::write_pod<std::uint64_t>(out, model.vocab().size());
  for (const auto& tok : model.vocab().tokens()) detail::write_str(out, tok);
  detail::write_pod<std::uint64_t>(out, model.params().size());
  for (const auto& p : model.params()) {
    detail::write_str(out, p.name);
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rows()));
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.cols()));
    for (int j = 0; j < p.value.cols(); ++j) {
      for (int i = 0; i < p.value.rows(); ++i) {
        detail::write_pod<double>(out, static_cast<double>(p.value(i, j)));
      }
    }
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

template <class T>
struct LoadedCheckpoint {
  Seq2SeqModel<T> model;
  std::uint64_t iteration = 0;
};

template <class T>
LoadedCheckpoint<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string_view(magic, 8) != std::string_view(kCheckpointMagic, 8)) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  auto version = detail::read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  ModelDims dims;
  dims.embed = detail::read_pod<std::int32_t>(in);
  dims.hidden = detail::read_pod<std::int32_t>(in);
  dims.dropout = detail::read_pod<double>(in);
  dims.max_decode_steps = detail::read_pod<std::int32_t>(in);
  auto seed = detail::read_pod<std::uint64_t>(in);
  auto iteration = detail::read_pod<std::uint64_t>(in);
  auto vocab_hash = detail::read_pod<std::uint64_t>(in);
  auto vocab_size = detail::read_pod<std::uint64_t>(in);
  Vocabulary vocab;
  for (std::uint64_t i = 0; i < vocab_size; ++i) vocab.push(detail::read_str(in));
  if (vocab.hash() != vocab_hash) throw std::runtime_error("vocab hash mismatch in " + path);

  LoadedCheckpoint<T> out{Seq2SeqModel<T>(std::move(vocab), dims, seed), iteration};
  auto n_params = detail::read_pod<std::uint64_t>(in);
  if (n_params != out.model.params().size()) {
    throw std::runtime_error("parameter count mismatch in " + path);
  }
  for (auto& p : out.model.params()) {
    auto name = detail::read_str(in);
    auto rows = detail::read_pod<std::uint32_t>(in);
    auto cols = detail::read_pod<std::uint32_t>(in);
    if (name != p.name || static_cast<Eigen::Index>(rows) != p.value.rows() ||
        static_cast<Eigen::Index>(cols) != p.value.cols()) {
      throw std::runtime_error("parameter layout mismatch in " + path + " at " + name);
    }
    for (std::uint32_t j = 0; j < cols; ++j) {
      for (std::uint32_t i = 0; i < rows; ++i) {
        p.value(i, j) = static_cast<T>(detail::read_pod<double>(in));
      }
    }
  }
  return out;
}

}  // namespace kgtext
