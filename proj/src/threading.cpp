#include "pba/threading.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pba {
namespace {

int detect_thread_count() {
  long n = 0;
  if (const char* env = std::getenv("PHOTOBA_THREADS")) {
    char* end = nullptr;
    n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0') n = 0;
  }
  if (n <= 0) n = static_cast<long>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (n > 64) n = 64;
  return static_cast<int>(n);
}

class TilePool {
 public:
  static TilePool& instance() {
    static TilePool pool(thread_count());
    return pool;
  }

  void run(int n_tiles, const std::function<void(int)>& fn) {
    if (n_tiles <= 0) return;
    if (workers_.empty() || n_tiles == 1) {
      for (int t = 0; t < n_tiles; ++t) fn(t);
      return;
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      fn_ = &fn;
      n_tiles_ = n_tiles;
      next_.store(0, std::memory_order_relaxed);
      remaining_.store(n_tiles, std::memory_order_relaxed);
      error_ = nullptr;
      ++generation_;
    }
    cv_.notify_all();
    work();
    {
      std::unique_lock<std::mutex> lock(mutex_);
      done_cv_.wait(lock, [this] { return remaining_.load(std::memory_order_acquire) == 0; });
      fn_ = nullptr;
      if (error_) std::rethrow_exception(error_);
    }
  }

 private:
  explicit TilePool(int threads) {
    for (int i = 1; i < threads; ++i) {
      workers_.emplace_back([this] { worker_loop(); });
    }
  }

  ~TilePool() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      stop_ = true;
      ++generation_;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      work();
    }
  }

  void work() {
    const std::function<void(int)>* fn = fn_;
    if (fn == nullptr) return;
    for (;;) {
      int t = next_.fetch_add(1, std::memory_order_relaxed);
      if (t >= n_tiles_) break;
      try {
        (*fn)(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!error_) error_ = std::current_exception();
      }
      if (remaining_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
        std::lock_guard<std::mutex> lock(mutex_);
        done_cv_.notify_all();
      }
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* fn_ = nullptr;
  int n_tiles_ = 0;
  std::atomic<int> next_{0};
  std::atomic<int> remaining_{0};
  std::exception_ptr error_;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace

int thread_count() {
  static const int n = detect_thread_count();
  return n;
}

void parallel_tiles(int n_tiles, const std::function<void(int)>& fn) {
  TilePool::instance().run(n_tiles, fn);
}

int row_tile_count(int rows) { return (rows + kTileRows - 1) / kTileRows; }

void parallel_row_tiles(int rows, const std::function<void(int, int, int)>& fn) {
  int tiles = row_tile_count(rows);
  parallel_tiles(tiles, [&](int t) {
    int begin = t * kTileRows;
    int end = begin + kTileRows < rows ? begin + kTileRows : rows;
    fn(t, begin, end);
  });
}

}  // namespace pba
