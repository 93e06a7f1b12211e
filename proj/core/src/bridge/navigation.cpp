#include "nesy/bridge/navigation.hpp"

#include <array>
#include <climits>
#include <deque>

namespace nesy::bridge::navigation {

namespace dk = envs::doorkey;
namespace ow = envs::office;

std::vector<int> doorkey_first_moves(const dk::State& s, envs::GridPos target, Goal goal, bool* reached) {
  const int n = s.size;
  auto index = [n](envs::GridPos p, dk::Heading h) {
    return static_cast<std::size_t>((p.y * n + p.x) * 4 + static_cast<int>(h));
  };
  auto free = [&s](envs::GridPos p) { return s.in_bounds(p) && s.at(p).passable(); };

  std::vector<int> dist(static_cast<std::size_t>(n * n * 4), INT_MAX);
  std::deque<std::pair<envs::GridPos, dk::Heading>> queue;
  auto seed = [&](envs::GridPos p, dk::Heading h) {
    auto& d = dist[index(p, h)];
    if (d == INT_MAX) {
      d = 0;
      queue.emplace_back(p, h);
    }
  };
  for (int hi = 0; hi < 4; ++hi) {
    const auto h = static_cast<dk::Heading>(hi);
    if (goal == Goal::Stand) {
      if (free(target)) seed(target, h);
    } else {
      const auto v = dk::heading_vector(h);
      const envs::GridPos p{target.x - v.x, target.y - v.y};
      if (free(p)) seed(p, h);
    }
  }

  // Backward search: predecessors of (p, h).
  while (!queue.empty()) {
    const auto [p, h] = queue.front();
    queue.pop_front();
    const int next = dist[index(p, h)] + 1;
    auto relax = [&](envs::GridPos q, dk::Heading g) {
      auto& d = dist[index(q, g)];
      if (d == INT_MAX) {
        d = next;
        queue.emplace_back(q, g);
      }
    };
    relax(p, dk::turned_right(h));  // via left
    relax(p, dk::turned_left(h));   // via right
    const auto v = dk::heading_vector(h);
    const envs::GridPos back{p.x - v.x, p.y - v.y};
    if (free(back)) relax(back, h);  // via forward
  }

  const int here = dist[index(s.agent, s.heading)];
  if (reached) *reached = here == 0;
  std::vector<int> moves;
  if (here == 0 || here == INT_MAX) return moves;
  if (dist[index(s.agent, dk::turned_left(s.heading))] == here - 1) moves.push_back(dk::Left);
  if (dist[index(s.agent, dk::turned_right(s.heading))] == here - 1) moves.push_back(dk::Right);
  const envs::GridPos ahead = s.front();
  if (free(ahead) && dist[index(ahead, s.heading)] == here - 1) moves.push_back(dk::Forward);
  return moves;
}

namespace {

using DistanceMap = std::array<int, ow::kWidth * ow::kHeight>;

bool enterable(envs::GridPos p) { return ow::layout::in_bounds(p) && ow::layout::marker(p) != 'n'; }

DistanceMap office_distances(envs::GridPos target) {
  DistanceMap dist;
  dist.fill(INT_MAX);
  auto at = [&dist](envs::GridPos p) -> int& { return dist[static_cast<std::size_t>(p.y * ow::kWidth + p.x)]; };
  std::deque<envs::GridPos> queue{target};
  at(target) = 0;
  while (!queue.empty()) {
    const auto p = queue.front();
    queue.pop_front();
    // q reaches p with action a when moving a from q lands on p.
    for (int a = ow::Left; a <= ow::Down; ++a) {
      const int opposite = a == ow::Left ? ow::Right : a == ow::Right ? ow::Left : a == ow::Up ? ow::Down : ow::Up;
      const auto q = ow::layout::moved(p, opposite);
      if (!enterable(q) || ow::layout::wall_blocks(q, a)) continue;
      if (at(q) == INT_MAX) {
        at(q) = at(p) + 1;
        queue.push_back(q);
      }
    }
  }
  return dist;
}

const DistanceMap& cached_distances(envs::GridPos target) {
  static const auto table = [] {
    std::array<DistanceMap, ow::kWidth * ow::kHeight> t;
    for (int y = 0; y < ow::kHeight; ++y)
      for (int x = 0; x < ow::kWidth; ++x) t[static_cast<std::size_t>(y * ow::kWidth + x)] = office_distances({x, y});
    return t;
  }();
  return table[static_cast<std::size_t>(target.y * ow::kWidth + target.x)];
}

}  // namespace

std::vector<int> office_first_moves(const ow::State& s, envs::GridPos target) {
  const auto& dist = cached_distances(target);
  auto at = [&dist](envs::GridPos p) { return dist[static_cast<std::size_t>(p.y * ow::kWidth + p.x)]; };
  const int here = at(s.agent);
  std::vector<int> moves;
  if (here == 0 || here == INT_MAX) return moves;
  for (int a = ow::Left; a <= ow::Down; ++a) {
    if (ow::layout::wall_blocks(s.agent, a)) continue;
    const auto q = ow::layout::moved(s.agent, a);
    if (enterable(q) && at(q) == here - 1) moves.push_back(a);
  }
  return moves;
}

}  // namespace nesy::bridge::navigation
