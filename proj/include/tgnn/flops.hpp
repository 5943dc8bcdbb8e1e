#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace tgnn {

/// Phases that multiply-accumulate counts are attributed to.
enum class Phase : int { precompute = 0, encode, transformer, gnn, update, eval, other };

inline constexpr std::array<std::string_view, 7> kPhaseNames = {
    "precompute", "encode", "transformer", "gnn", "update", "eval", "other"};

class MacCounter {
 public:
  void add(std::uint64_t macs) { counts_[static_cast<int>(phase_)] += macs; }
  void add(Phase phase, std::uint64_t macs) { counts_[static_cast<int>(phase)] += macs; }

  std::uint64_t get(Phase phase) const { return counts_[static_cast<int>(phase)]; }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }
  void reset() { counts_.fill(0); }

  Phase phase() const { return phase_; }
  void set_phase(Phase p) { phase_ = p; }

  MacCounter& operator+=(const MacCounter& other) {
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
  }

 private:
  std::array<std::uint64_t, 7> counts_{};
  Phase phase_ = Phase::other;
};

/// Attributes MACs recorded in its lifetime to `phase`; restores the prior phase.
class PhaseScope {
 public:
  PhaseScope(MacCounter* counter, Phase phase) : counter_(counter) {
    if (counter_) {
      previous_ = counter_->phase();
      counter_->set_phase(phase);
    }
  }
  ~PhaseScope() {
    if (counter_) counter_->set_phase(previous_);
  }
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  MacCounter* counter_;
  Phase previous_ = Phase::other;
};

}  // namespace tgnn
