#pragma once

#include <cstdint>
#include <string>

#include "mardpg/optim.hpp"

namespace mardpg {

// Textual checkpoint, layout (stable across versions):
//   line 1: "mardpg-checkpoint v1"
//   line 2: "seed <u64>"
//   line 3: "step <int>"
//   line 4: "arrays <count>"
//   then per array two lines:
//     "<name> <rows> <cols>"
//     rows*cols values, row-major, printed with %.17g (doubles round-trip
//     exactly)
struct CheckpointMeta {
    uint64_t seed = 0;
    int64_t step = 0;
};

void save_checkpoint(const std::string& path, const ParamViews& views, const CheckpointMeta& meta);

// Loads into existing views; every array in the file must match a view by
// name and shape (order-independent), and every view must be present.
CheckpointMeta load_checkpoint(const std::string& path, const ParamViews& views);

}  // namespace mardpg
