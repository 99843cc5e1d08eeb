#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pgmoe::detail {

/// Runs body(i) for i in [0, n). Each task writes only its own output slot, so results do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body)
{
	if (threads <= 1 || n <= 1) {
		for (std::size_t i = 0; i < n; ++i)
			body(i);
		return;
	}
	std::atomic<std::size_t> next{0};
	std::exception_ptr failure;
	std::mutex failure_mutex;
	auto worker = [&] {
		for (std::size_t i = next++; i < n; i = next++) {
			try {
				body(i);
			} catch (...) {
				std::lock_guard lock(failure_mutex);
				if (!failure)
					failure = std::current_exception();
			}
		}
	};
	std::vector<std::jthread> pool;
	const auto count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
	for (std::size_t t = 0; t < count; ++t)
		pool.emplace_back(worker);
	pool.clear();
	if (failure)
		std::rethrow_exception(failure);
}

} // namespace pgmoe::detail
