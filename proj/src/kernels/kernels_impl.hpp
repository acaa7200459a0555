#pragma once

#include "loco/kernels.hpp"

namespace loco::kernels::detail {

extern const KernelTable kScalarTable;

#if defined(LOCO_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace loco::kernels::detail
