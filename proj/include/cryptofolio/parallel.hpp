#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace cryptofolio {

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// path kept for testing; `parallel` distributes independent iterations over
/// OpenMP threads and must produce bit-identical results.
enum class Exec { serial, parallel };

/// Sets the OpenMP worker count; 0 leaves the runtime default.
void set_thread_count(int threads);

int thread_count();

/// Runs body(i) for i in [0, n). Iterations must be independent and write only
/// to their own output slots. The first exception by index is rethrown after
/// the loop completes.
template <class Body>
void parallel_for(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cryptofolio
