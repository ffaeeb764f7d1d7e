/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/core/training_sample.hpp
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

#ifndef MORPHFIT_CORE_TRAINING_SAMPLE_HPP
#define MORPHFIT_CORE_TRAINING_SAMPLE_HPP

#include "morphfit/core/image.hpp"
#include "morphfit/core/param_vector.hpp"

#include <memory>
#include <string>

namespace morphfit {

/// An image with its ground-truth parameters and the estimate the cascade starts from.
struct TrainingSample
{
	std::shared_ptr<const GrayImage> image;
	ParamVector theta_gt;
	ParamVector theta_init;
	std::string id;
};

} // namespace morphfit

#endif /* MORPHFIT_CORE_TRAINING_SAMPLE_HPP */
