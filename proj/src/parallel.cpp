/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/parallel.cpp
 *
 * Copyright 2026 The morphfit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "morphfit/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace morphfit {

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn)
{
	const auto workers = static_cast<std::size_t>(std::clamp<long long>(jobs, 1, static_cast<long long>(std::max<std::size_t>(count, 1))));
	if (workers <= 1) {
		for (std::size_t i = 0; i < count; ++i)
			fn(i);
		return;
	}

	std::atomic<std::size_t> next{0};
	std::mutex error_mutex;
	std::exception_ptr first_error;
	std::size_t first_error_index = count;

	auto worker = [&]() {
		while (true) {
			const auto i = next.fetch_add(1);
			if (i >= count)
				return;
			try {
				fn(i);
			} catch (...) {
				std::lock_guard lock(error_mutex);
				if (i < first_error_index) {
					first_error_index = i;
					first_error = std::current_exception();
				}
			}
		}
	};

	std::vector<std::jthread> threads;
	threads.reserve(workers);
	for (std::size_t t = 0; t < workers; ++t)
		threads.emplace_back(worker);
	threads.clear(); // joins
	if (first_error)
		std::rethrow_exception(first_error);
}

} // namespace morphfit
