#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace tnperm {

/// A bijection on {0, ..., d-1}. `perm(j)` is the physical axis sitting at
/// chain position j of the loop or path.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> images);

  static Permutation identity(int d);
  /// j -> (j + k) mod d
  static Permutation rotation(int d, int k);
  /// j -> d - 1 - j
  static Permutation reflection(int d);
  static Permutation random(int d, std::mt19937_64& rng);

  int size() const noexcept { return static_cast<int>(images_.size()); }
  int operator()(int j) const { return images_.at(static_cast<std::size_t>(j)); }
  const std::vector<int>& images() const noexcept { return images_; }

  Permutation inverse() const;
  /// (*this o inner)(j) = (*this)(inner(j))
  Permutation compose(const Permutation& inner) const;

  std::string to_string() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> images_;
};

}  // namespace tnperm
