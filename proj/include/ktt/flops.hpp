#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace ktt {

/// Exact operation accounting. Every matrix product charges
/// 2 * (elements of the output) * (contraction length); counts are derived
/// from operand shapes only, so they are integers and reproducible.
class FlopCounter {
 public:
  void set_phase(std::string phase) { current_ = std::move(phase); }
  const std::string& phase() const { return current_; }

  void add(std::int64_t flops) {
    phases_[current_] += flops;
    total_ += flops;
  }

  std::int64_t total() const { return total_; }

  std::int64_t for_phase(const std::string& phase) const {
    auto it = phases_.find(phase);
    return it == phases_.end() ? 0 : it->second;
  }

  const std::map<std::string, std::int64_t>& by_phase() const { return phases_; }

  void reset() {
    phases_.clear();
    total_ = 0;
  }

 private:
  std::map<std::string, std::int64_t> phases_;
  std::string current_ = "default";
  std::int64_t total_ = 0;
};

}  // namespace ktt
