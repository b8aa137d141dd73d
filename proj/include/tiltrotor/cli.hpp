#pragma once

namespace tiltrotor {

/// Entry point of the batch front end. Returns the process exit code:
/// 0 success, 2 invalid input, 3 refused overwrite, 4 simulation aborted singular.
int run_cli(int argc, const char* const* argv);

}  // namespace tiltrotor
