#include "corsched/state.hpp"

#include <cmath>

namespace corsched {

bool state_is_finite(const State& s) {
  return std::visit(
      [](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Mat3>) {
          return v.allFinite();
        } else if constexpr (std::is_same_v<T, Pose>) {
          return v.rot.allFinite() && v.trans.allFinite();
        } else if constexpr (std::is_same_v<T, TerrainPoint>) {
          return std::isfinite(v.u) && std::isfinite(v.v) && std::isfinite(v.z);
        } else {
          for (const auto& p : v.points)
            if (!p.allFinite()) return false;
          return true;
        }
      },
      s);
}

}  // namespace corsched
