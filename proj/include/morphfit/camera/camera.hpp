/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/camera/camera.hpp
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

#ifndef MORPHFIT_CAMERA_CAMERA_HPP
#define MORPHFIT_CAMERA_CAMERA_HPP

#include "Eigen/Core"

#include <optional>
#include <span>
#include <vector>

namespace morphfit {
namespace camera {

/**
 * Rigid pose of the model relative to the camera.
 *
 * Angles are in degrees: rx is pitch, ry is yaw and rz is roll. Translations are in
 * millimetres. The camera looks down the negative z axis, so a visible model has tz < 0.
 */
struct PoseParams
{
	double rx = 0.0;
	double ry = 0.0;
	double rz = 0.0;
	double tx = 0.0;
	double ty = 0.0;
	double tz = 0.0;

	friend bool operator==(const PoseParams&, const PoseParams&) = default;
};

/// Pinhole camera. Pixel centres sit at integer coordinates; v grows downwards.
struct CameraConfig
{
	double focal = 1500.0;
	int width = 640;
	int height = 480;
	double cx = 320.0;
	double cy = 240.0;

	/// A camera with the principal point at the image centre.
	static CameraConfig centered(double focal, int width, int height);

	void validate() const;
};

Eigen::Matrix3d rotation_x(double degrees);
Eigen::Matrix3d rotation_y(double degrees);
Eigen::Matrix3d rotation_z(double degrees);

/// R_y * R_x * R_z: roll is applied to a point first, then pitch, then yaw.
Eigen::Matrix3d rotation_matrix(double rx, double ry, double rz);

/**
 * The model-view matrix T * R_y * R_x * R_z for the given pose.
 *
 * Each R is a right-handed rotation about its axis; T translates by (tx, ty, tz).
 */
Eigen::Matrix4d build_modelview(const PoseParams& pose);

/**
 * Pinhole projection of a camera-space point: u = cx + f*x/(-z), v = cy - f*y/(-z).
 * Returns an empty optional for points at or behind the camera plane (z >= -1e-6).
 */
std::optional<Eigen::Vector2d> project_camera_point(const Eigen::Vector3d& point, const CameraConfig& cam);

/**
 * Projects homogeneous model-space points (one per column) to pixel coordinates.
 *
 * The result has one entry per input column; entries for points that fail to project
 * (at or behind the camera plane) are empty.
 */
std::vector<std::optional<Eigen::Vector2d>> project_points(const Eigen::Matrix4Xd& points, const PoseParams& pose,
                                                           const CameraConfig& cam);

/**
 * Coarse pose from 2D-3D landmark correspondences, used to seed the cascade.
 *
 * tz comes from the ratio of the 2D and 3D bounding-box diagonals through the pinhole
 * model, tx and ty from back-projecting the 2D centroid at that depth. All angles are 0.
 *
 * Throws std::invalid_argument for fewer than 4 correspondences, mismatched sizes, or
 * degenerate (coincident or collinear) point sets.
 */
PoseParams pose_from_landmarks_rough(std::span<const Eigen::Vector2d> points2d,
                                     std::span<const Eigen::Vector3d> points3d, const CameraConfig& cam);

} // namespace camera
} // namespace morphfit

#endif /* MORPHFIT_CAMERA_CAMERA_HPP */
