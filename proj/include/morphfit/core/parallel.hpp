/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/core/parallel.hpp
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

#ifndef MORPHFIT_CORE_PARALLEL_HPP
#define MORPHFIT_CORE_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace morphfit {

/**
 * Calls \p fn(i) for every i in [0, count) using up to \p jobs threads.
 *
 * Work items must be independent. If any call throws, the exception from the
 * lowest failing index is rethrown after all threads have joined.
 */
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

} // namespace morphfit

#endif /* MORPHFIT_CORE_PARALLEL_HPP */
