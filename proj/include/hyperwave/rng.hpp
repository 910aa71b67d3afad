#pragma once

// Counter-based random numbers (Philox4x32-10) and a chunked Monte Carlo
// driver whose result depends only on (seed, operation id, chunk plan).

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hyperwave/core.hpp"

namespace hyperwave::rng {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// A reproducible stream keyed by (seed, operation id, chunk index).
/// The counter's upper words carry the chunk and operation; the lower word
/// walks through the stream.
class Stream {
public:
  Stream(std::uint64_t seed, std::uint32_t op_id, std::uint32_t chunk)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        chunk_(chunk),
        op_(op_id) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0,1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * constants::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * constants::pi * u2);
  }

private:
  void refill() {
    buf_ = Philox4x32::block({static_cast<std::uint32_t>(counter_),
                              static_cast<std::uint32_t>(counter_ >> 32), chunk_, op_},
                             key_);
    ++counter_;
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t chunk_;
  std::uint32_t op_;
  std::uint64_t counter_ = 0;
  Philox4x32::Counter buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stable 32-bit tag for an operation name (FNV-1a).
inline std::uint32_t op_id(std::string_view name) {
  std::uint32_t h = 2166136261u;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619u;
  }
  return h;
}

/// Default worker count: HYPERWAVE_THREADS, else hardware concurrency.
inline unsigned default_threads() {
  if (const char* env = std::getenv("HYPERWAVE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Run `body(chunk_index)` for every chunk on `threads` workers. Results are
/// written by index so the caller can reduce in fixed order.
template <class Body>
void parallel_chunks(std::size_t n_chunks, unsigned threads, Body&& body) {
  if (threads <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) body(c);
    });
  }
}

/// Per-chunk running moments (Welford) with an exact merge.
struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / total;
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stderr_of_mean() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct McConfig {
  std::uint64_t seed = 42;
  std::uint64_t samples = 1'000'000;
  std::uint64_t chunk_size = 1u << 15;
  unsigned threads = 1;
};

struct McRun {
  Moments total;
  std::vector<Moments> chunks;  // in chunk order
};

/// Estimate E[sample(stream)] with samples split into fixed chunks; chunk c
/// draws from Stream(seed, op, c). Output is independent of `threads`.
template <class Sampler>
McRun run_chunked(const McConfig& cfg, std::uint32_t op, Sampler&& sample) {
  require(cfg.samples > 0, "sample count must be positive");
  require(cfg.chunk_size > 0, "chunk size must be positive");
  const std::size_t n_chunks = static_cast<std::size_t>((cfg.samples + cfg.chunk_size - 1) / cfg.chunk_size);
  McRun run;
  run.chunks.resize(n_chunks);
  parallel_chunks(n_chunks, cfg.threads, [&](std::size_t c) {
    Stream s(cfg.seed, op, static_cast<std::uint32_t>(c));
    const std::uint64_t begin = c * cfg.chunk_size;
    const std::uint64_t end = std::min<std::uint64_t>(cfg.samples, begin + cfg.chunk_size);
    Moments m;
    for (std::uint64_t i = begin; i < end; ++i) m.add(sample(s));
    run.chunks[c] = m;
  });
  for (const auto& m : run.chunks) run.total.merge(m);
  return run;
}

}  // namespace hyperwave::rng
