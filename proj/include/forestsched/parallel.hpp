// Copyright 2026 The forestsched Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace forestsched {

/// Fixed pool of worker threads running index loops. Callers only ever use
/// it for pure per-index work whose results are combined deterministically,
/// so the thread count never changes an answer.
class ParallelExecutor {
 public:
  /// threads == 0 picks std::thread::hardware_concurrency().
  explicit ParallelExecutor(unsigned threads = 0);
  ~ParallelExecutor();

  ParallelExecutor(const ParallelExecutor&) = delete;
  ParallelExecutor& operator=(const ParallelExecutor&) = delete;

  unsigned threads() const { return static_cast<unsigned>(workers_.size()) + 1; }

  /// Runs fn(i) for every i in [0, n) and blocks until all calls returned.
  /// The first exception thrown by any call is rethrown here.
  void for_each(std::size_t n, const std::function<void(std::size_t)>& fn);

 private:
  void worker_loop();
  void drain();

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t job_size_ = 0;
  std::size_t next_ = 0;
  std::size_t finished_ = 0;
  std::size_t generation_ = 0;
  std::size_t active_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

/// Runs sequentially when pool is null.
void parallel_for(ParallelExecutor* pool, std::size_t n,
                  const std::function<void(std::size_t)>& fn);

}  // namespace forestsched
