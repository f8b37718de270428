#pragma once

#include <optional>
#include <string>

#include "core/denoiser.hpp"

namespace mmd {

// "MMD1" checkpoint: arch header, parameter layout table, f64 payload,
// optional Adam second-moment block. Little-endian, byte layout
// documented in docs/checkpoint_format.md.
struct Checkpoint {
    ArchDescriptor arch;
    ParamVector params;
    std::optional<ParamVector> adam_v;
    int adam_steps = 0;
    double adam_beta2 = 0.99;
    double adam_eps = 1e-12;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mmd
