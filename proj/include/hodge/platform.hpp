#pragma once

namespace hodge {

///
/// OpenBLAS 0.3.20 picks AVX-512 kernels on some processors that return wrong dense factors,
/// which breaks supernodal Cholesky and UMFPACK. The kernel family is fixed when the library
/// loads, so on AVX-512 machines without an explicit OPENBLAS_CORETYPE this sets the AVX2
/// family and re-executes the current program once. Call first thing in main().
///
void ensure_reliable_blas(int argc, char** argv);

} // namespace hodge
