#pragma once

#include "cartcredit/kernels.hpp"

namespace cartcredit::kernels::detail {

extern const KernelTable kScalarTable;
#if defined(CARTCREDIT_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(CARTCREDIT_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif

}  // namespace cartcredit::kernels::detail
