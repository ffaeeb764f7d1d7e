/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/core/param_vector.hpp
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

#ifndef MORPHFIT_CORE_PARAM_VECTOR_HPP
#define MORPHFIT_CORE_PARAM_VECTOR_HPP

#include "morphfit/camera/camera.hpp"

#include "Eigen/Core"

#include <string>
#include <vector>

namespace morphfit {

/**
 * The parameter vector the cascade estimates:
 * [rx, ry, rz, tx, ty, tz, alpha_0, ..., alpha_{K'-1}].
 *
 * Angles are degrees, translations millimetres and shape coefficients are in units of
 * the per-mode standard deviation. The layout order is part of every file format.
 */
class ParamVector
{
public:
	static constexpr int num_pose_params = 6;

	ParamVector() : values_(Eigen::VectorXd::Zero(num_pose_params)) {};
	explicit ParamVector(Eigen::VectorXd values);
	ParamVector(const camera::PoseParams& pose, const Eigen::VectorXd& shape);

	int size() const noexcept { return static_cast<int>(values_.size()); };
	int num_shape() const noexcept { return size() - num_pose_params; };

	const Eigen::VectorXd& values() const noexcept { return values_; };
	Eigen::VectorXd& values() noexcept { return values_; };
	double operator[](int i) const { return values_(i); };
	double& operator[](int i) { return values_(i); };

	camera::PoseParams pose() const;
	Eigen::VectorXd shape() const { return values_.tail(num_shape()); };
	Eigen::Vector3d angles() const { return values_.head<3>(); };

	friend bool operator==(const ParamVector& a, const ParamVector& b) { return a.values_ == b.values_; };

private:
	Eigen::VectorXd values_;
};

/// Column names for a parameter vector with \p num_shape coefficients: rx, ry, rz, tx, ty, tz, a0, a1, ...
std::vector<std::string> param_layout(int num_shape);

} // namespace morphfit

#endif /* MORPHFIT_CORE_PARAM_VECTOR_HPP */
