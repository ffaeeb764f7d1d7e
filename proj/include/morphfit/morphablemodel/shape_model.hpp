/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/morphablemodel/shape_model.hpp
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

#ifndef MORPHFIT_MORPHABLEMODEL_SHAPE_MODEL_HPP
#define MORPHFIT_MORPHABLEMODEL_SHAPE_MODEL_HPP

#include "Eigen/Core"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace morphfit {
namespace morphablemodel {

using Triangle = std::array<int, 3>;

/// Shape coefficients in units of the per-mode standard deviation.
using ShapeCoeffs = Eigen::VectorXd;

/**
 * A PCA shape model: mean shape, orthonormal basis and per-mode standard deviations.
 *
 * Shapes are stacked as [x_1, y_1, z_1, ..., x_V, y_V, z_V] in millimetres. The
 * landmark list selects the vertices used for feature extraction; triangles are only
 * needed for rendering.
 *
 * The constructor checks every invariant (unit, pairwise orthogonal basis columns to
 * 1e-9; positive non-increasing sigmas; distinct in-range landmarks and triangle
 * indices) and throws std::invalid_argument if one does not hold. Instances are
 * immutable afterwards.
 */
class ShapeModel
{
public:
	ShapeModel(Eigen::VectorXd mean, Eigen::MatrixXd basis, Eigen::VectorXd sigmas, std::vector<int> landmark_ids,
	           std::vector<Triangle> triangles);

	int vertex_count() const noexcept { return static_cast<int>(mean_.size() / 3); };
	int num_modes() const noexcept { return static_cast<int>(basis_.cols()); };
	int num_landmarks() const noexcept { return static_cast<int>(landmark_ids_.size()); };

	const Eigen::VectorXd& mean() const noexcept { return mean_; };
	const Eigen::MatrixXd& basis() const noexcept { return basis_; };
	const Eigen::VectorXd& sigmas() const noexcept { return sigmas_; };
	const std::vector<int>& landmark_ids() const noexcept { return landmark_ids_; };
	const std::vector<Triangle>& triangles() const noexcept { return triangles_; };

	friend bool operator==(const ShapeModel& a, const ShapeModel& b)
	{
		return a.mean_ == b.mean_ && a.basis_ == b.basis_ && a.sigmas_ == b.sigmas_ &&
		       a.landmark_ids_ == b.landmark_ids_ && a.triangles_ == b.triangles_;
	};

private:
	Eigen::VectorXd mean_;
	Eigen::MatrixXd basis_;
	Eigen::VectorXd sigmas_;
	std::vector<int> landmark_ids_;
	std::vector<Triangle> triangles_;
};

/**
 * Synthesises a shape instance: mean + sum_i alpha_i * sigma_i * basis_i.
 *
 * Throws std::invalid_argument if alpha does not have exactly num_modes() entries.
 */
Eigen::VectorXd instance_shape(const ShapeModel& model, const ShapeCoeffs& alpha);

/**
 * The landmark vertices of the instance for \p alpha, as homogeneous points (one per
 * column, w = 1) in landmark_ids order. Only the landmark rows are evaluated.
 */
Eigen::Matrix4Xd select_landmarks(const ShapeModel& model, const ShapeCoeffs& alpha);

/// Extends \p alpha with zeros up to the model's number of modes.
ShapeCoeffs pad_coefficients(const ShapeModel& model, const Eigen::VectorXd& alpha);

/**
 * Builds a deterministic face-like stand-in for a real morphable model.
 *
 * The mean is a closed ellipsoidal head with nose, brow, chin and eye-socket relief,
 * facing +z. The K modes are smooth random deformation fields with the rigid motions
 * projected out, orthonormalised by Gram-Schmidt; sigmas decrease geometrically.
 * 17 landmarks are placed at eye corners, brows, nose, mouth, chin and jaw contour.
 *
 * Requires vertex_count >= 50 and 1 <= num_modes <= 20; throws std::invalid_argument
 * otherwise, or if fewer than num_modes independent modes could be generated.
 */
ShapeModel make_procedural_model(std::uint64_t seed, int vertex_count, int num_modes);

/// Landmark names of the procedural model, in landmark_ids order.
const std::vector<std::string>& procedural_landmark_names();

// MFM1 text format.
std::string to_mfm(const ShapeModel& model);
ShapeModel from_mfm(const std::string& text);
void save_model(const ShapeModel& model, const std::filesystem::path& filename);
ShapeModel load_model(const std::filesystem::path& filename);

} // namespace morphablemodel
} // namespace morphfit

#endif /* MORPHFIT_MORPHABLEMODEL_SHAPE_MODEL_HPP */
