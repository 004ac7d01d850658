#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace cokfluct {

/// Weakly decreasing tuple of positive integers. Encodes the finite abelian
/// p-group G_lambda = Z/p^{lambda_1} + Z/p^{lambda_2} + ...
class Partition {
 public:
  Partition() = default;
  Partition(std::initializer_list<int> parts);
  explicit Partition(std::vector<int> parts);

  /// Sorts descending and drops zeros before validating.
  static Partition from_unsorted(std::vector<int> values);

  const std::vector<int>& parts() const { return parts_; }
  std::size_t length() const { return parts_.size(); }
  bool empty() const { return parts_.empty(); }
  int size() const;  ///< |lambda|

  /// lambda_i for 1-based i; zero past the end.
  int part(std::size_t i) const { return i >= 1 && i <= parts_.size() ? parts_[i - 1] : 0; }

  Partition conjugate() const;

  std::string to_string() const;  ///< "(3,1)"; "()" for the empty partition
  static Partition parse(const std::string& text);

  auto operator<=>(const Partition&) const = default;

 private:
  std::vector<int> parts_;
};

Partition conjugate(const Partition& lambda);

/// All partitions of `total`, in reverse lexicographic order.
std::vector<Partition> partitions_of(int total);

}  // namespace cokfluct
