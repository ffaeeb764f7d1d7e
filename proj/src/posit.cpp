/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/posit.cpp
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
#include "morphfit/posit/posit.hpp"

#include "Eigen/Geometry"
#include "Eigen/SVD"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace morphfit {
namespace posit {

namespace {

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& M)
{
	const Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
	Eigen::Matrix3d correction = Eigen::Matrix3d::Identity();
	if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0)
		correction(2, 2) = -1.0;
	return svd.matrixU() * correction * svd.matrixV().transpose();
}

double to_degrees(double radians)
{
	return radians * 180.0 / std::numbers::pi;
}

} // namespace

PositResult posit(const Correspondences& c, int max_iterations, double tolerance)
{
	const auto n = c.points2d.size();
	if (n != c.points3d.size())
		throw std::invalid_argument("posit: 2D and 3D point counts differ");
	if (n < 4)
		throw std::invalid_argument("posit: needs at least 4 correspondences");
	if (!(c.focal > 0.0))
		throw std::invalid_argument("posit: focal length must be positive");
	if (max_iterations < 1)
		throw std::invalid_argument("posit: needs at least one iteration");

	// POSIT works in a camera frame looking down +z with image y pointing down, which is
	// our camera frame rotated by 180 degrees about x.
	std::vector<double> x(n), y(n);
	for (std::size_t i = 0; i < n; ++i) {
		x[i] = c.points2d[i].x() - c.principal_point.x();
		y[i] = c.points2d[i].y() - c.principal_point.y();
	}

	const auto m = static_cast<Eigen::Index>(n - 1);
	Eigen::MatrixXd object(m, 3);
	for (Eigen::Index i = 0; i < m; ++i)
		object.row(i) = (c.points3d[i + 1] - c.points3d[0]).transpose();
	const Eigen::JacobiSVD<Eigen::MatrixXd> svd(object, Eigen::ComputeThinU | Eigen::ComputeThinV);
	const auto& sv = svd.singularValues();
	if (!(sv(0) > 0.0) || sv(2) / sv(0) < 1e-8)
		throw std::invalid_argument("posit: object points are coplanar or collinear (rank-deficient object matrix)");
	const Eigen::MatrixXd pseudoinverse =
	    svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose(); // 3 x m

	Eigen::VectorXd epsilon = Eigen::VectorXd::Zero(m);
	Eigen::VectorXd xs(m), ys(m);
	Eigen::Vector3d i_row, j_row, k_row;
	double z0 = 0.0;
	PositResult result;
	for (int iteration = 1; iteration <= max_iterations; ++iteration) {
		for (Eigen::Index r = 0; r < m; ++r) {
			xs(r) = x[r + 1] * (1.0 + epsilon(r)) - x[0];
			ys(r) = y[r + 1] * (1.0 + epsilon(r)) - y[0];
		}
		const Eigen::Vector3d I = pseudoinverse * xs;
		const Eigen::Vector3d J = pseudoinverse * ys;
		const double scale_i = I.norm();
		const double scale_j = J.norm();
		if (!(scale_i > 0.0) || !(scale_j > 0.0))
			throw std::invalid_argument("posit: degenerate image points");
		i_row = I / scale_i;
		j_row = J / scale_j;
		k_row = i_row.cross(j_row).normalized();
		const double scale = 0.5 * (scale_i + scale_j);
		z0 = c.focal / scale;

		Eigen::VectorXd updated = object * k_row / z0;
		const double change = (updated - epsilon).cwiseAbs().maxCoeff();
		epsilon = updated;
		result.iterations = iteration;
		if (change < tolerance) {
			result.converged = true;
			break;
		}
	}

	Eigen::Matrix3d rotation_posit;
	rotation_posit.row(0) = i_row.transpose();
	rotation_posit.row(1) = j_row.transpose();
	rotation_posit.row(2) = k_row.transpose();
	rotation_posit = nearest_rotation(rotation_posit);
	const Eigen::Vector3d reference(x[0] * z0 / c.focal, y[0] * z0 / c.focal, z0);
	const Eigen::Vector3d translation_posit = reference - rotation_posit * c.points3d[0];

	const Eigen::Matrix3d flip = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
	result.rotation = flip * rotation_posit;
	result.translation = flip * translation_posit;
	return result;
}

EulerAngles euler_from_rotation(const Eigen::Matrix3d& R)
{
	if (!R.allFinite() || (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
	    R.determinant() <= 0.0)
		throw std::invalid_argument("euler_from_rotation: input is not a rotation matrix");

	// R = R_y(ry) R_x(rx) R_z(rz):
	//   R(1,2) = -sin rx, (R(1,0), R(1,1)) = cos rx (sin rz, cos rz), (R(0,2), R(2,2)) = cos rx (sin ry, cos ry).
	EulerAngles angles;
	const double sin_rx = std::clamp(-R(1, 2), -1.0, 1.0);
	angles.rx = to_degrees(std::asin(sin_rx));
	const double cos_rx = std::sqrt(R(1, 0) * R(1, 0) + R(1, 1) * R(1, 1));
	if (cos_rx < 1e-7) {
		// Gimbal lock: only ry -+ rz is observable; report rz = 0.
		angles.rz = 0.0;
		angles.ry = to_degrees(std::atan2(-R(2, 0), R(0, 0)));
	} else {
		angles.rz = to_degrees(std::atan2(R(1, 0), R(1, 1)));
		angles.ry = to_degrees(std::atan2(R(0, 2), R(2, 2)));
	}
	return angles;
}

camera::PoseParams to_pose(const PositResult& result)
{
	const auto angles = euler_from_rotation(result.rotation);
	camera::PoseParams pose;
	pose.rx = angles.rx;
	pose.ry = angles.ry;
	pose.rz = angles.rz;
	pose.tx = result.translation.x();
	pose.ty = result.translation.y();
	pose.tz = result.translation.z();
	return pose;
}

} // namespace posit
} // namespace morphfit
