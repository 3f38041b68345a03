#include "hetpop/stochastics.hpp"

#include <algorithm>
#include <limits>

#include "hetpop/errors.hpp"

namespace hetpop {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  return std::mt19937_64(seq);
}

// Top 53 bits as a multiple of 2^-53; a zero draw maps to the smallest
// positive double so that ln(u) stays finite.
inline double to_open_unit(std::uint64_t bits) {
  const double u = static_cast<double>(bits >> 11) * 0x1p-53;
  return u > 0.0 ? u : std::numeric_limits<double>::denorm_min();
}

}  // namespace

RngState::RngState(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngState::uniform_open() { return to_open_unit(engine_()); }

std::int64_t RngState::uniform_index(std::int64_t bound) {
  const auto pick = static_cast<std::int64_t>(uniform_open() * static_cast<double>(bound));
  return std::min(pick, bound - 1);
}

void RngState::fill_standard_normal(std::span<double> out) {
  if (radius_.size() < kNormalBlock) {
    radius_.resize(kNormalBlock);
    angle_.resize(kNormalBlock);
  }
  for (std::size_t start = 0; start < out.size(); start += kNormalBlock) {
    const std::size_t k = std::min(kNormalBlock, out.size() - start);
    for (std::size_t i = 0; i < k; ++i) radius_[i] = to_open_unit(engine_());
    for (std::size_t i = 0; i < k; ++i) angle_[i] = to_open_unit(engine_());
    box_muller(std::span<const double>(radius_.data(), k), std::span<const double>(angle_.data(), k),
               out.subspan(start, k));
  }
}

RngState seed_stream(std::uint64_t seed, std::uint64_t stream_id) { return {seed, stream_id}; }

double uniform_open(RngState& state) { return state.uniform_open(); }

Eigen::VectorXd standard_normal(RngState& state, Eigen::Index count) {
  if (count < 1) throw DomainError("standard_normal: count must be at least 1");
  Eigen::VectorXd out(count);
  state.fill_standard_normal(std::span<double>(out.data(), static_cast<std::size_t>(count)));
  return out;
}

Eigen::MatrixXd standard_normal(RngState& state, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 1 || cols < 1) throw DomainError("standard_normal: dimensions must be positive");
  Eigen::MatrixXd out(rows, cols);
  state.fill_standard_normal(std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

}  // namespace hetpop
