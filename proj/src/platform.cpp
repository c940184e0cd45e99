#include "hodge/platform.hpp"

#include <cstdlib>
#include <unistd.h>

namespace hodge {

void ensure_reliable_blas(int argc, char** argv)
{
    (void)argc;
    if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
    __builtin_cpu_init();
    if (!__builtin_cpu_supports("avx512f") || !__builtin_cpu_supports("avx2")) return;
    if (setenv("OPENBLAS_CORETYPE", "Haswell", 1) != 0) return;
    execv("/proc/self/exe", argv);
    // exec failed: continue with the kernels already loaded
}

} // namespace hodge
