/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/param_vector.cpp
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
#include "morphfit/core/param_vector.hpp"

#include <stdexcept>

namespace morphfit {

ParamVector::ParamVector(Eigen::VectorXd values) : values_(std::move(values))
{
	if (values_.size() < num_pose_params)
		throw std::invalid_argument("ParamVector: needs at least the 6 pose parameters");
}

ParamVector::ParamVector(const camera::PoseParams& pose, const Eigen::VectorXd& shape)
    : values_(num_pose_params + shape.size())
{
	values_.head<num_pose_params>() << pose.rx, pose.ry, pose.rz, pose.tx, pose.ty, pose.tz;
	values_.tail(shape.size()) = shape;
}

camera::PoseParams ParamVector::pose() const
{
	return {values_(0), values_(1), values_(2), values_(3), values_(4), values_(5)};
}

std::vector<std::string> param_layout(int num_shape)
{
	std::vector<std::string> names{"rx", "ry", "rz", "tx", "ty", "tz"};
	for (int i = 0; i < num_shape; ++i)
		names.push_back("a" + std::to_string(i));
	return names;
}

} // namespace morphfit
