#pragma once

// Binary checkpoints: the full conservative state plus enough metadata to
// resume a run bit-exactly.
//
// Layout (all integers and doubles little-endian):
//
//   bytes 0..7    magic "NSCHCKPT"
//   u32           format version (1)
//   u32           dim (2 or 3)
//   u64           n (points per axis)
//   f64           t
//   u64           step_index
//   f64           diss_integral (running dissipation integral of the run)
//   f64 × 7       model parameters: rho_bar, gamma, p_coeff, nu0, nu1,
//                 lam0, eps
//   f64 × n^dim   rho   (grid storage order)
//   f64 × n^dim   m[0] … m[dim-1]
//   f64 × n^dim   c
//   u64           FNV-1a 64 hash of every preceding byte
//
// Loading verifies magic, version, dimension, and the checksum, and rejects
// truncated or corrupted files.  Saving and loading round-trip the doubles
// bit-for-bit.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsch/model.hpp"

namespace nsch {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

struct CheckpointInfo {
  std::uint32_t version = 0;
  int dim = 0;
  std::int64_t n = 0;
  double t = 0.0;
  std::uint64_t step_index = 0;
  double diss_integral = 0.0;
  ModelParams params;
};

namespace detail {

inline constexpr char ckpt_magic[8] = {'N', 'S', 'C', 'H',
                                       'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t ckpt_version = 1;

inline std::uint64_t fnv1a(const char* data, std::size_t len) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

template <class T>
void put(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <class T>
T get(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size())
    throw std::runtime_error("checkpoint: file truncated");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

inline void put_params(std::string& buf, const ModelParams& p) {
  put(buf, p.rho_bar);
  put(buf, p.gamma);
  put(buf, p.p_coeff);
  put(buf, p.nu0);
  put(buf, p.nu1);
  put(buf, p.lam0);
  put(buf, p.eps);
}

inline ModelParams get_params(const std::string& buf, std::size_t& pos) {
  ModelParams p;
  p.rho_bar = get<double>(buf, pos);
  p.gamma = get<double>(buf, pos);
  p.p_coeff = get<double>(buf, pos);
  p.nu0 = get<double>(buf, pos);
  p.nu1 = get<double>(buf, pos);
  p.lam0 = get<double>(buf, pos);
  p.eps = get<double>(buf, pos);
  return p;
}

template <int D>
void put_field(std::string& buf, const Field<D>& f) {
  const std::size_t bytes = static_cast<std::size_t>(f.grid->size()) * 8;
  const std::size_t at = buf.size();
  buf.resize(at + bytes);
  std::memcpy(buf.data() + at, f.v.data(), bytes);
}

template <int D>
void get_field(const std::string& buf, std::size_t& pos, Field<D>& f) {
  const std::size_t bytes = static_cast<std::size_t>(f.grid->size()) * 8;
  if (pos + bytes > buf.size())
    throw std::runtime_error("checkpoint: file truncated");
  std::memcpy(f.v.data(), buf.data() + pos, bytes);
  pos += bytes;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("checkpoint: cannot open " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  return buf;
}

/// Verifies magic/version/checksum and parses the fixed-size header.
inline CheckpointInfo parse_header(const std::string& buf, std::size_t& pos,
                                   bool verify_checksum) {
  if (buf.size() < sizeof(ckpt_magic) + 8)
    throw std::runtime_error("checkpoint: file truncated");
  if (std::memcmp(buf.data(), ckpt_magic, sizeof(ckpt_magic)) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  if (verify_checksum) {
    const std::uint64_t stored =
        [&] {
          std::size_t p = buf.size() - 8;
          return get<std::uint64_t>(buf, p);
        }();
    const std::uint64_t computed = fnv1a(buf.data(), buf.size() - 8);
    if (stored != computed)
      throw std::runtime_error("checkpoint: checksum mismatch");
  }
  pos = sizeof(ckpt_magic);
  CheckpointInfo info;
  info.version = get<std::uint32_t>(buf, pos);
  if (info.version != ckpt_version)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(info.version));
  info.dim = static_cast<int>(get<std::uint32_t>(buf, pos));
  if (info.dim != 2 && info.dim != 3)
    throw std::runtime_error("checkpoint: dimension must be 2 or 3");
  info.n = static_cast<std::int64_t>(get<std::uint64_t>(buf, pos));
  info.t = get<double>(buf, pos);
  info.step_index = get<std::uint64_t>(buf, pos);
  info.diss_integral = get<double>(buf, pos);
  info.params = get_params(buf, pos);
  return info;
}

}  // namespace detail

template <int D>
void save_checkpoint(const std::filesystem::path& path, const State<D>& st,
                     const ModelParams& p, std::uint64_t step_index,
                     double diss_integral = 0.0) {
  std::string buf;
  buf.reserve(104 + static_cast<std::size_t>(st.grid()->size()) * (D + 2) * 8 +
              8);
  buf.append(detail::ckpt_magic, sizeof(detail::ckpt_magic));
  detail::put(buf, detail::ckpt_version);
  detail::put(buf, static_cast<std::uint32_t>(D));
  detail::put(buf, static_cast<std::uint64_t>(st.grid()->n()));
  detail::put(buf, st.t);
  detail::put(buf, step_index);
  detail::put(buf, diss_integral);
  detail::put_params(buf, p);
  detail::put_field(buf, st.rho);
  for (int a = 0; a < D; ++a) detail::put_field(buf, st.m[a]);
  detail::put_field(buf, st.c);
  detail::put(buf, detail::fnv1a(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("checkpoint: cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

/// Reads only the metadata (still validating the checksum), for dimension
/// dispatch before calling the typed loader.
inline CheckpointInfo peek_checkpoint(const std::filesystem::path& path) {
  const std::string buf = detail::slurp(path);
  std::size_t pos = 0;
  return detail::parse_header(buf, pos, true);
}

template <int D>
std::pair<State<D>, CheckpointInfo> load_checkpoint(
    const std::filesystem::path& path) {
  const std::string buf = detail::slurp(path);
  std::size_t pos = 0;
  CheckpointInfo info = detail::parse_header(buf, pos, true);
  if (info.dim != D)
    throw std::runtime_error("checkpoint: dimension mismatch (file has " +
                             std::to_string(info.dim) + ")");
  const std::size_t npts = [&] {
    std::size_t v = 1;
    for (int a = 0; a < D; ++a) v *= static_cast<std::size_t>(info.n);
    return v;
  }();
  const std::size_t want = pos + npts * (D + 2) * 8 + 8;
  if (buf.size() != want)
    throw std::runtime_error("checkpoint: unexpected size");

  auto g = Grid<D>::make(info.n);
  State<D> st(g);
  st.t = info.t;
  detail::get_field(buf, pos, st.rho);
  for (int a = 0; a < D; ++a) detail::get_field(buf, pos, st.m[a]);
  detail::get_field(buf, pos, st.c);
  return {std::move(st), info};
}

}  // namespace nsch
