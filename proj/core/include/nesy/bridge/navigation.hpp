#pragma once

#include <vector>

#include "nesy/envs/doorkey.hpp"
#include "nesy/envs/office_world.hpp"

namespace nesy::bridge::navigation {

enum class Goal {
  Face,   ///< end adjacent to the target, looking at it (keys, doors)
  Stand,  ///< end on the target cell (goal square)
};

/// DoorKey actions (left/right/forward) that start some shortest plan towards
/// the target, over currently passable cells. Empty if the target is already
/// reached or unreachable; `reached` tells the two apart.
std::vector<int> doorkey_first_moves(const envs::doorkey::State& s, envs::GridPos target, Goal goal, bool* reached = nullptr);

/// OfficeWorld moves starting a shortest decoration-free path to `target`.
std::vector<int> office_first_moves(const envs::office::State& s, envs::GridPos target);

}  // namespace nesy::bridge::navigation
