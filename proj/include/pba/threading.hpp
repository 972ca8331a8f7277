#pragma once

#include <functional>

namespace pba {

// Rows are processed in fixed tiles of kTileRows regardless of the worker
// count, so any per-tile partial results can be merged in tile order and the
// final reduction is identical for 1 or N threads.
inline constexpr int kTileRows = 8;

// Number of worker threads: PHOTOBA_THREADS if set to a positive integer,
// otherwise std::thread::hardware_concurrency(), clamped to [1, 64].
int thread_count();

// Invokes fn(tile) for every tile in [0, n_tiles), distributing tiles over
// the worker pool. fn must be callable concurrently for distinct tiles.
// Must not be called reentrantly from inside fn.
void parallel_tiles(int n_tiles, const std::function<void(int)>& fn);

// Tiles the row range [0, rows) into chunks of kTileRows and invokes
// fn(tile_index, row_begin, row_end) for each.
void parallel_row_tiles(int rows, const std::function<void(int, int, int)>& fn);

// Total number of kTileRows tiles covering [0, rows).
int row_tile_count(int rows);

}  // namespace pba
