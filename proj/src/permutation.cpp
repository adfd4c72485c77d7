#include "tnperm/permutation.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "tnperm/errors.hpp"

namespace tnperm {

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  const int d = size();
  std::vector<char> seen(images_.size(), 0);
  for (int v : images_) {
    if (v < 0 || v >= d) {
      throw DomainError(fmt::format("permutation image {} outside [0, {})", v, d));
    }
    if (seen[static_cast<std::size_t>(v)]) {
      throw DomainError(fmt::format("permutation image {} repeated", v));
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

Permutation Permutation::identity(int d) {
  if (d < 0) throw DomainError("negative permutation size");
  std::vector<int> v(static_cast<std::size_t>(d));
  std::iota(v.begin(), v.end(), 0);
  return Permutation(std::move(v));
}

Permutation Permutation::rotation(int d, int k) {
  if (d <= 0) throw DomainError("rotation needs d >= 1");
  std::vector<int> v(static_cast<std::size_t>(d));
  const int shift = ((k % d) + d) % d;
  for (int j = 0; j < d; ++j) v[static_cast<std::size_t>(j)] = (j + shift) % d;
  return Permutation(std::move(v));
}

Permutation Permutation::reflection(int d) {
  if (d < 0) throw DomainError("negative permutation size");
  std::vector<int> v(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) v[static_cast<std::size_t>(j)] = d - 1 - j;
  return Permutation(std::move(v));
}

Permutation Permutation::random(int d, std::mt19937_64& rng) {
  std::vector<int> v = identity(d).images_;
  // Fisher-Yates with an explicit draw so the sequence is library independent.
  for (int i = d - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
  }
  return Permutation(std::move(v));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(images_.size());
  for (int j = 0; j < size(); ++j) inv[static_cast<std::size_t>(images_[static_cast<std::size_t>(j)])] = j;
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& inner) const {
  if (inner.size() != size()) {
    throw DomainError(fmt::format("cannot compose permutations of sizes {} and {}", size(), inner.size()));
  }
  std::vector<int> out(images_.size());
  for (int j = 0; j < size(); ++j) out[static_cast<std::size_t>(j)] = (*this)(inner(j));
  return Permutation(std::move(out));
}

std::string Permutation::to_string() const { return fmt::format("({})", fmt::join(images_, ",")); }

}  // namespace tnperm
