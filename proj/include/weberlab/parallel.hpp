// Minimal static-partition parallel loop over an index range.
#ifndef WEBERLAB_PARALLEL_HPP
#define WEBERLAB_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace weberlab {

// 0 selects the WEBERLAB_THREADS environment variable, then the hardware concurrency.
void set_thread_count(int threads);
int thread_count();

// Calls body(i) for i in [0, n); exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace weberlab

#endif
