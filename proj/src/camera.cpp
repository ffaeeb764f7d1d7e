/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/camera.cpp
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
#include "morphfit/camera/camera.hpp"

#include "Eigen/Eigenvalues"
#include "Eigen/Geometry"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace morphfit {
namespace camera {

namespace {

double to_radians(double degrees)
{
	return degrees * std::numbers::pi / 180.0;
}

} // namespace

CameraConfig CameraConfig::centered(double focal, int width, int height)
{
	CameraConfig cam;
	cam.focal = focal;
	cam.width = width;
	cam.height = height;
	cam.cx = width / 2.0;
	cam.cy = height / 2.0;
	return cam;
}

void CameraConfig::validate() const
{
	if (!(focal > 0.0) || !std::isfinite(focal))
		throw std::invalid_argument("CameraConfig: focal length must be positive");
	if (width < 1 || height < 1)
		throw std::invalid_argument("CameraConfig: width and height must be at least 1");
	if (!std::isfinite(cx) || !std::isfinite(cy))
		throw std::invalid_argument("CameraConfig: principal point must be finite");
}

Eigen::Matrix3d rotation_x(double degrees)
{
	const double c = std::cos(to_radians(degrees));
	const double s = std::sin(to_radians(degrees));
	Eigen::Matrix3d R;
	R << 1.0, 0.0, 0.0,
	     0.0, c, -s,
	     0.0, s, c;
	return R;
}

Eigen::Matrix3d rotation_y(double degrees)
{
	const double c = std::cos(to_radians(degrees));
	const double s = std::sin(to_radians(degrees));
	Eigen::Matrix3d R;
	R << c, 0.0, s,
	     0.0, 1.0, 0.0,
	     -s, 0.0, c;
	return R;
}

Eigen::Matrix3d rotation_z(double degrees)
{
	const double c = std::cos(to_radians(degrees));
	const double s = std::sin(to_radians(degrees));
	Eigen::Matrix3d R;
	R << c, -s, 0.0,
	     s, c, 0.0,
	     0.0, 0.0, 1.0;
	return R;
}

Eigen::Matrix3d rotation_matrix(double rx, double ry, double rz)
{
	return rotation_y(ry) * rotation_x(rx) * rotation_z(rz);
}

Eigen::Matrix4d build_modelview(const PoseParams& pose)
{
	Eigen::Matrix4d modelview = Eigen::Matrix4d::Identity();
	modelview.topLeftCorner<3, 3>() = rotation_matrix(pose.rx, pose.ry, pose.rz);
	modelview.topRightCorner<3, 1>() = Eigen::Vector3d(pose.tx, pose.ty, pose.tz);
	return modelview;
}

std::optional<Eigen::Vector2d> project_camera_point(const Eigen::Vector3d& point, const CameraConfig& cam)
{
	if (!(point.z() < -1e-6))
		return std::nullopt;
	const double depth = -point.z();
	return Eigen::Vector2d(cam.cx + cam.focal * point.x() / depth, cam.cy - cam.focal * point.y() / depth);
}

std::vector<std::optional<Eigen::Vector2d>> project_points(const Eigen::Matrix4Xd& points, const PoseParams& pose,
                                                           const CameraConfig& cam)
{
	const Eigen::Matrix4d modelview = build_modelview(pose);
	std::vector<std::optional<Eigen::Vector2d>> projected;
	projected.reserve(points.cols());
	for (Eigen::Index i = 0; i < points.cols(); ++i) {
		const Eigen::Vector4d p = modelview * points.col(i);
		if (p(3) == 0.0 || !p.allFinite()) {
			projected.emplace_back(std::nullopt);
			continue;
		}
		projected.push_back(project_camera_point(p.head<3>() / p(3), cam));
	}
	return projected;
}

namespace {

// Ratio of smallest to largest eigenvalue of the point scatter; near zero means degenerate.
template <int Dim>
double spread_ratio(std::span<const Eigen::Matrix<double, Dim, 1>> points, int needed_rank)
{
	Eigen::Matrix<double, Dim, 1> centroid = Eigen::Matrix<double, Dim, 1>::Zero();
	for (const auto& p : points)
		centroid += p;
	centroid /= static_cast<double>(points.size());
	Eigen::Matrix<double, Dim, Dim> scatter = Eigen::Matrix<double, Dim, Dim>::Zero();
	for (const auto& p : points)
		scatter += (p - centroid) * (p - centroid).transpose();
	const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, Dim, Dim>> eig(scatter);
	const auto& ev = eig.eigenvalues(); // ascending
	const double largest = ev(Dim - 1);
	if (!(largest > 0.0))
		return 0.0;
	return ev(Dim - needed_rank) / largest;
}

} // namespace

PoseParams pose_from_landmarks_rough(std::span<const Eigen::Vector2d> points2d,
                                     std::span<const Eigen::Vector3d> points3d, const CameraConfig& cam)
{
	cam.validate();
	if (points2d.size() != points3d.size())
		throw std::invalid_argument("pose_from_landmarks_rough: 2D and 3D point counts differ");
	if (points2d.size() < 4)
		throw std::invalid_argument("pose_from_landmarks_rough: needs at least 4 correspondences");
	constexpr double degenerate = 1e-9;
	if (spread_ratio<2>(points2d, 2) < degenerate)
		throw std::invalid_argument("pose_from_landmarks_rough: 2D landmarks are coincident or collinear");
	if (spread_ratio<3>(points3d, 2) < degenerate)
		throw std::invalid_argument("pose_from_landmarks_rough: 3D landmarks are coincident or collinear");

	Eigen::Vector2d min2 = points2d[0], max2 = points2d[0], centroid2 = Eigen::Vector2d::Zero();
	for (const auto& p : points2d) {
		min2 = min2.cwiseMin(p);
		max2 = max2.cwiseMax(p);
		centroid2 += p;
	}
	centroid2 /= static_cast<double>(points2d.size());
	Eigen::Vector2d min3 = points3d[0].head<2>(), max3 = points3d[0].head<2>();
	Eigen::Vector3d centroid3 = Eigen::Vector3d::Zero();
	for (const auto& p : points3d) {
		min3 = min3.cwiseMin(p.head<2>());
		max3 = max3.cwiseMax(p.head<2>());
		centroid3 += p;
	}
	centroid3 /= static_cast<double>(points3d.size());

	// Frontal view assumed: image extent (px) = focal * model extent (mm) / depth.
	const double extent2d = (max2 - min2).norm();
	const double extent3d = (max3 - min3).norm();
	const double depth = cam.focal * extent3d / extent2d;

	PoseParams pose;
	pose.tz = -depth;
	pose.tx = (centroid2.x() - cam.cx) * depth / cam.focal - centroid3.x();
	pose.ty = -(centroid2.y() - cam.cy) * depth / cam.focal - centroid3.y();
	return pose;
}

} // namespace camera
} // namespace morphfit
