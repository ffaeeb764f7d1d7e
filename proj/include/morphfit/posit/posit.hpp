/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/posit/posit.hpp
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

#ifndef MORPHFIT_POSIT_POSIT_HPP
#define MORPHFIT_POSIT_POSIT_HPP

#include "morphfit/camera/camera.hpp"

#include "Eigen/Core"

#include <vector>

namespace morphfit {
namespace posit {

/// 2D-3D correspondences. Image points are pixels in the camera-projection convention.
struct Correspondences
{
	std::vector<Eigen::Vector2d> points2d;
	std::vector<Eigen::Vector3d> points3d;
	double focal = 1500.0;
	Eigen::Vector2d principal_point = Eigen::Vector2d(320.0, 240.0);
};

/// Model-to-camera transform: p_camera = rotation * p_model + translation.
struct PositResult
{
	Eigen::Matrix3d rotation;
	Eigen::Vector3d translation;
	int iterations = 0;
	bool converged = false;
};

/**
 * POSIT (DeMenthon & Davis): pose from orthography and scaling with iterations.
 *
 * The first 3D point is the reference point. Each iteration solves the scaled
 * orthographic pose through the pseudoinverse of the object matrix and updates the
 * perspective corrections; it stops when no correction changes by more than \p tolerance
 * or after \p max_iterations. The rotation is returned as the nearest rotation (SVD).
 *
 * Throws std::invalid_argument for fewer than 4 points, mismatched sizes or a
 * rank-deficient (coplanar or collinear) object matrix. Non-convergence is flagged in
 * the result, not thrown.
 */
PositResult posit(const Correspondences& correspondences, int max_iterations = 100, double tolerance = 1e-5);

struct EulerAngles
{
	double rx = 0.0;
	double ry = 0.0;
	double rz = 0.0;
};

/**
 * Angles (degrees) with R_y(ry) * R_x(rx) * R_z(rz) = R. At gimbal lock (|cos rx| < 1e-7)
 * rz is set to 0. Throws std::invalid_argument if R is not a rotation.
 */
EulerAngles euler_from_rotation(const Eigen::Matrix3d& R);

/// The POSIT result expressed as camera::PoseParams.
camera::PoseParams to_pose(const PositResult& result);

} // namespace posit
} // namespace morphfit

#endif /* MORPHFIT_POSIT_POSIT_HPP */
