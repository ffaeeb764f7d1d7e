/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/random.cpp
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
#include "morphfit/core/random.hpp"

namespace morphfit {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
	x += 0x9E3779B97F4A7C15ULL;
	x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
	x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
	return x ^ (x >> 31);
}

std::uint64_t sub_seed(std::uint64_t seed, std::string_view name) noexcept
{
	// FNV-1a over the name, then mixed with the master seed.
	std::uint64_t h = 0xCBF29CE484222325ULL;
	for (const char c : name) {
		h ^= static_cast<unsigned char>(c);
		h *= 0x100000001B3ULL;
	}
	return splitmix64(splitmix64(seed) ^ h);
}

std::uint64_t sub_seed(std::uint64_t seed, std::string_view name, std::uint64_t index) noexcept
{
	return splitmix64(sub_seed(seed, name) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

} // namespace morphfit
