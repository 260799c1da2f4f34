#pragma once

#include <cstdint>
#include <vector>

namespace rotor {

enum class EnsembleKind { Quantum, Classical };

// Scaled rotational energy after each kick; values[N] is the energy after
// kick N, values[0] the initial-state energy.
struct EnergySeries {
    std::vector<double> values;
    EnsembleKind kind = EnsembleKind::Classical;

    std::int64_t last_kick() const { return static_cast<std::int64_t>(values.size()) - 1; }
};

} // namespace rotor
