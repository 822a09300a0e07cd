#pragma once

namespace sqgforge {

/// Worker count for data-parallel kernels. Defaults to 1; the CLI sets it
/// from --threads or the SQGFORGE_THREADS environment variable. A fixed
/// count keeps reductions bitwise reproducible run to run.
int thread_count();
void set_thread_count(int n);

/// Reads SQGFORGE_THREADS; returns fallback when unset or unparsable.
int thread_count_from_env(int fallback);

}  // namespace sqgforge
