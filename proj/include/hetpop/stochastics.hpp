#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace hetpop {

/// Seedable generator for one unit of work.
///
/// The output sequence is a pure function of (seed, stream_id). Different
/// stream ids give independent streams, so parallel work gets one stream per
/// replication and never shares a generator. Backed by std::mt19937_64 seeded
/// through std::seed_seq, both fully specified by the standard.
class RngState {
 public:
  RngState(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform variate strictly inside (0, 1).
  double uniform_open();

  /// Integer uniformly distributed on [0, bound).
  std::int64_t uniform_index(std::int64_t bound);

  /// Fills `out` with i.i.d. standard normals (cosine-branch Box-Muller).
  ///
  /// Normals are produced in blocks of at most kNormalBlock: a block of k
  /// normals first draws k radius uniforms, then k angle uniforms.
  void fill_standard_normal(std::span<double> out);

  static constexpr std::size_t kNormalBlock = 512;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::vector<double> radius_;
  std::vector<double> angle_;
};

RngState seed_stream(std::uint64_t seed, std::uint64_t stream_id);

double uniform_open(RngState& state);

Eigen::VectorXd standard_normal(RngState& state, Eigen::Index count);

/// rows x cols matrix of standard normals, filled in column-major order.
Eigen::MatrixXd standard_normal(RngState& state, Eigen::Index rows, Eigen::Index cols);

/// z = sqrt(-2 ln u) cos(2 pi v), elementwise. All spans have equal length.
void box_muller(std::span<const double> radius_uniforms,
                std::span<const double> angle_uniforms, std::span<double> out);

/// SplitMix64 finalizer; used to derive well-spread stream ids.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hetpop
