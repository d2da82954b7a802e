#pragma once

#include <cstddef>
#include <functional>

namespace latdesign {

/// Worker count: LATTICE_DESIGN_THREADS if set and positive, else hardware concurrency.
unsigned default_thread_count();

/// Splits [0, n) into contiguous chunks and runs body(begin, end, chunk) on up
/// to `threads` workers. Chunk boundaries depend only on n and the chunk
/// count, so callers that merge per-chunk results in chunk order are
/// deterministic regardless of scheduling. Exceptions propagate to the caller.
void parallel_chunks(std::size_t n, std::size_t chunks, unsigned threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

}  // namespace latdesign
