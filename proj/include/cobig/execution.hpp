#pragma once

namespace cobig {

/// Selects between the serial reference kernels and their OpenMP versions.
/// Both produce identical results; the serial path is kept for testing and
/// for benchmarking the parallel one against.
enum class Execution { Serial, Parallel };

} // namespace cobig
