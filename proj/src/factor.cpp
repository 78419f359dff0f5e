#include "noisymax/factor.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "noisymax/error.hpp"

namespace noisymax {

std::size_t factor_index(std::span<const std::size_t> sizes,
                         std::span<const std::size_t> assignment) {
  if (sizes.size() != assignment.size()) {
    throw Error(ErrorKind::OutOfRange, "assignment length does not match scope length");
  }
  std::size_t offset = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (assignment[k] >= sizes[k]) {
      std::ostringstream msg;
      msg << "assignment[" << k << "] = " << assignment[k] << " out of range for size " << sizes[k];
      throw Error(ErrorKind::OutOfRange, msg.str());
    }
    offset = offset * sizes[k] + assignment[k];
  }
  return offset;
}

std::size_t table_size(std::span<const std::size_t> sizes) {
  std::size_t n = 1;
  for (std::size_t s : sizes) {
    if (s != 0 && n > std::numeric_limits<std::size_t>::max() / s) {
      throw Error(ErrorKind::GuardExceeded, "table size overflows");
    }
    n *= s;
  }
  return n;
}

bool next_assignment(std::span<std::size_t> assignment, std::span<const std::size_t> sizes) {
  for (std::size_t k = assignment.size(); k-- > 0;) {
    if (++assignment[k] < sizes[k]) return true;
    assignment[k] = 0;
  }
  return false;
}

namespace {

void check_scope(const std::vector<VarId>& scope, const std::vector<std::size_t>& cards) {
  if (scope.size() != cards.size()) {
    throw Error(ErrorKind::InvalidArgument, "factor scope and cardinality lists differ in length");
  }
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (cards[i] == 0) throw Error(ErrorKind::InvalidArgument, "factor variable with empty domain");
    for (std::size_t j = 0; j < i; ++j) {
      if (scope[i] == scope[j]) {
        throw Error(ErrorKind::InvalidArgument, "duplicate variable in factor scope");
      }
    }
  }
}

}  // namespace

Factor::Factor(std::vector<VarId> scope, std::vector<std::size_t> cards, double fill)
    : scope_(std::move(scope)), cards_(std::move(cards)) {
  check_scope(scope_, cards_);
  values_.assign(table_size(cards_), fill);
}

Factor::Factor(std::vector<VarId> scope, std::vector<std::size_t> cards,
               std::vector<double> values)
    : scope_(std::move(scope)), cards_(std::move(cards)), values_(std::move(values)) {
  check_scope(scope_, cards_);
  if (values_.size() != table_size(cards_)) {
    std::ostringstream msg;
    msg << "factor has " << values_.size() << " values but its scope needs " << table_size(cards_);
    throw Error(ErrorKind::MalformedDistribution, msg.str());
  }
}

Factor Factor::scalar(double value) {
  Factor f;
  f.values_[0] = value;
  return f;
}

std::size_t Factor::position(VarId v) const noexcept {
  return static_cast<std::size_t>(std::find(scope_.begin(), scope_.end(), v) - scope_.begin());
}

std::size_t Factor::card_of(VarId v) const {
  std::size_t p = position(v);
  if (p == arity()) throw Error(ErrorKind::InvalidArgument, "variable not in factor scope");
  return cards_[p];
}

double& Factor::at(std::span<const std::size_t> assignment) {
  return values_[factor_index(cards_, assignment)];
}

double Factor::at(std::span<const std::size_t> assignment) const {
  return values_[factor_index(cards_, assignment)];
}

}  // namespace noisymax
