#pragma once

namespace talkface {

/// Selects the OpenMP kernel or the serial reference it is tested against.
/// Both paths produce bit-identical results.
enum class Execution { serial, parallel };

/// Threads OpenMP would use for a parallel region (1 without OpenMP).
int max_threads();

}  // namespace talkface
