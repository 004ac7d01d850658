#include "cokfluct/partition.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace cokfluct {

Partition::Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i] < 1) throw std::invalid_argument("partition parts must be positive");
    if (i > 0 && parts_[i] > parts_[i - 1])
      throw std::invalid_argument("partition parts must be weakly decreasing");
  }
}

Partition Partition::from_unsorted(std::vector<int> values) {
  std::erase_if(values, [](int v) { return v == 0; });
  std::sort(values.begin(), values.end(), std::greater<>());
  return Partition(std::move(values));
}

int Partition::size() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }

Partition Partition::conjugate() const {
  if (parts_.empty()) return {};
  std::vector<int> out(static_cast<std::size_t>(parts_.front()), 0);
  for (int v : parts_)
    for (int i = 0; i < v; ++i) ++out[static_cast<std::size_t>(i)];
  return Partition(std::move(out));
}

Partition conjugate(const Partition& lambda) { return lambda.conjugate(); }

std::string Partition::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(parts_[i]);
  }
  return s + ")";
}

Partition Partition::parse(const std::string& text) {
  std::vector<int> values;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) {
      values.push_back(std::stoi(token));
      token.clear();
    }
  };
  for (char c : text) {
    if (c >= '0' && c <= '9') {
      token += c;
    } else if (c == ',' || c == ' ' || c == '(' || c == ')' || c == '[' || c == ']') {
      flush();
    } else {
      throw std::invalid_argument("cannot parse partition '" + text + "'");
    }
  }
  flush();
  return Partition(std::move(values));
}

std::vector<Partition> partitions_of(int total) {
  std::vector<Partition> out;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int remaining, int cap) {
    if (remaining == 0) {
      out.emplace_back(cur);
      return;
    }
    for (int v = std::min(remaining, cap); v >= 1; --v) {
      cur.push_back(v);
      rec(remaining - v, v);
      cur.pop_back();
    }
  };
  rec(total, total);
  return out;
}

}  // namespace cokfluct
