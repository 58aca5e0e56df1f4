// ledger.hpp — cost accounting for simulated Hamiltonian-evolution time.
//
// One ledger unit is one application of the unit-time walk operator.
// Reversed operations charge the same as their forward counterparts.

#pragma once

#include <map>
#include <string>

#include "vtamp/common.hpp"

namespace vtamp {

class CostLedger {
  public:
    void charge(double units) {
        require(units >= 0.0, "CostLedger: negative charge");
        evolution_time_ += units;
    }

    void count(const std::string& subroutine, long n = 1) {
        subroutine_counts_[subroutine] += n;
    }

    void charge(const std::string& subroutine, double units) {
        charge(units);
        count(subroutine);
    }

    double evolution_time() const noexcept { return evolution_time_; }

    long invocations(const std::string& subroutine) const {
        auto it = subroutine_counts_.find(subroutine);
        return it == subroutine_counts_.end() ? 0 : it->second;
    }

    const std::map<std::string, long>& subroutine_counts() const noexcept {
        return subroutine_counts_;
    }

    void absorb(const CostLedger& other) {
        evolution_time_ += other.evolution_time_;
        for (const auto& [name, n] : other.subroutine_counts_) subroutine_counts_[name] += n;
    }

    void reset() {
        evolution_time_ = 0.0;
        subroutine_counts_.clear();
    }

  private:
    double evolution_time_ = 0.0;
    std::map<std::string, long> subroutine_counts_;
};

}  // namespace vtamp
