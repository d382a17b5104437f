#include "wtconv/runtime.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace wtconv {

void retain_heap_buffers() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);  // glibc maximum on 64-bit
  mallopt(M_TRIM_THRESHOLD, 64 << 20);
#endif
}

}  // namespace wtconv
