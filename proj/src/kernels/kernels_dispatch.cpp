#include "dmgplan/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace dmgplan::kernels {

const Ops& active() {
  static const Ops* selected = [] {
    const char* forced = std::getenv("DMGPLAN_KERNELS");
    if (forced && std::strcmp(forced, "scalar") == 0) return &scalar_ops();
    const Ops* avx2 = avx2_ops();
    if (forced && std::strcmp(forced, "avx2") == 0 && avx2) return avx2;
    return avx2 ? avx2 : &scalar_ops();
  }();
  return *selected;
}

}  // namespace dmgplan::kernels
