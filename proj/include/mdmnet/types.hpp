#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace mdm {

/// T x n observed series; column r holds node r, row t holds time t.
using TimeSeriesMatrix = Eigen::MatrixXd;

/// Maximum node count representable by ParentSet.
inline constexpr int kMaxNodes = 32;

/// Subset of node indices encoded as a bitmask (bit i set means node i,
/// 0-based, is a member).
class ParentSet {
 public:
  constexpr ParentSet() = default;
  constexpr explicit ParentSet(std::uint32_t bits) : bits_(bits) {}

  static ParentSet of(std::initializer_list<int> nodes) {
    ParentSet s;
    for (int v : nodes) s = s.with(v);
    return s;
  }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(int node) const { return (bits_ >> node) & 1u; }
  constexpr ParentSet with(int node) const { return ParentSet(bits_ | (1u << node)); }
  constexpr ParentSet without(int node) const { return ParentSet(bits_ & ~(1u << node)); }
  constexpr bool intersects(ParentSet o) const { return (bits_ & o.bits_) != 0; }
  constexpr bool subset_of(ParentSet o) const { return (bits_ & ~o.bits_) == 0; }

  /// Members in ascending order.
  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(size());
    for (std::uint32_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  friend constexpr bool operator==(ParentSet, ParentSet) = default;
  friend constexpr auto operator<=>(ParentSet a, ParentSet b) { return a.bits_ <=> b.bits_; }

 private:
  std::uint32_t bits_ = 0;
};

}  // namespace mdm
