#include "cmabsm/action.hpp"

#include <algorithm>

#include "cmabsm/errors.hpp"

namespace cmabsm {

Action::Action(std::vector<ArmIndex> arms, std::size_t n_arms) : arms_(std::move(arms)) {
  std::sort(arms_.begin(), arms_.end());
  if (std::adjacent_find(arms_.begin(), arms_.end()) != arms_.end()) {
    throw InvalidArgument("action " + to_string() + " repeats an arm");
  }
  if (!arms_.empty() && arms_.back() >= n_arms) {
    throw InvalidArgument("action " + to_string() + " references an arm >= " +
                          std::to_string(n_arms));
  }
}

bool Action::contains(ArmIndex arm) const noexcept {
  return std::binary_search(arms_.begin(), arms_.end(), arm);
}

std::string Action::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(arms_[i]);
  }
  s += '}';
  return s;
}

}  // namespace cmabsm
