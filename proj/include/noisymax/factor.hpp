#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace noisymax {

/// Handle of a variable inside a network. Ids are dense, starting at 0.
enum class VarId : std::uint32_t {};

constexpr std::size_t index(VarId v) noexcept { return static_cast<std::size_t>(v); }
constexpr VarId var_id(std::size_t i) noexcept { return static_cast<VarId>(i); }

/// Row-major offset of `assignment` in a table with the given per-variable
/// sizes; the last variable varies fastest. Throws OutOfRange when any
/// coordinate exceeds its size or the lengths differ.
std::size_t factor_index(std::span<const std::size_t> sizes,
                         std::span<const std::size_t> assignment);

/// Product of `sizes` (1 for an empty list). Throws GuardExceeded on overflow.
std::size_t table_size(std::span<const std::size_t> sizes);

/// Dense real-valued table over an ordered scope. Entries may be negative or
/// exceed one; nothing here assumes normalization.
class Factor {
 public:
  Factor() : values_(1, 1.0) {}

  /// All-`fill` table over `scope`; `cards[k]` is the domain size of scope[k].
  Factor(std::vector<VarId> scope, std::vector<std::size_t> cards, double fill = 0.0);

  Factor(std::vector<VarId> scope, std::vector<std::size_t> cards,
         std::vector<double> values);

  static Factor scalar(double value);

  const std::vector<VarId>& scope() const noexcept { return scope_; }
  const std::vector<std::size_t>& cards() const noexcept { return cards_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t arity() const noexcept { return scope_.size(); }

  /// Position of `v` in the scope, or arity() when absent.
  std::size_t position(VarId v) const noexcept;
  bool contains(VarId v) const noexcept { return position(v) != arity(); }
  std::size_t card_of(VarId v) const;

  double& at(std::span<const std::size_t> assignment);
  double at(std::span<const std::size_t> assignment) const;

  friend bool operator==(const Factor&, const Factor&) = default;

 private:
  std::vector<VarId> scope_;
  std::vector<std::size_t> cards_;
  std::vector<double> values_;
};

/// Advances a mixed-radix counter (last digit fastest). Returns false after
/// wrapping past the final assignment.
bool next_assignment(std::span<std::size_t> assignment, std::span<const std::size_t> sizes);

}  // namespace noisymax
