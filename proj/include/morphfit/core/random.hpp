/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/core/random.hpp
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
#pragma once

#ifndef MORPHFIT_CORE_RANDOM_HPP
#define MORPHFIT_CORE_RANDOM_HPP

#include <cstdint>
#include <string_view>

namespace morphfit {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/**
 * Derives a named sub-seed from a master seed. All randomness in the library
 * flows through seeds derived this way, so there is no global RNG state.
 */
std::uint64_t sub_seed(std::uint64_t seed, std::string_view name) noexcept;
std::uint64_t sub_seed(std::uint64_t seed, std::string_view name, std::uint64_t index) noexcept;

} // namespace morphfit

#endif /* MORPHFIT_CORE_RANDOM_HPP */
