#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cmabsm {

using ArmIndex = std::uint32_t;

// A set of K distinct arms played together, stored in canonical ascending
// order so that two actions over the same arms compare equal.
class Action {
 public:
  Action() = default;

  // Sorts the indices; throws InvalidArgument on duplicates or indices >= n_arms.
  Action(std::vector<ArmIndex> arms, std::size_t n_arms);

  std::span<const ArmIndex> arms() const noexcept { return arms_; }
  std::size_t size() const noexcept { return arms_.size(); }
  ArmIndex operator[](std::size_t i) const noexcept { return arms_[i]; }
  bool contains(ArmIndex arm) const noexcept;

  std::string to_string() const;  // "{0,3,5}"

  friend bool operator==(const Action&, const Action&) = default;
  friend auto operator<=>(const Action&, const Action&) = default;

 private:
  std::vector<ArmIndex> arms_;
};

}  // namespace cmabsm
