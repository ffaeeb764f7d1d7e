/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/descriptor.cpp
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
#include "morphfit/features/descriptor.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace morphfit {
namespace features {

Descriptor extract_descriptor(const GrayImage& image, const Eigen::Vector2d& center, int patch_size)
{
	if (patch_size <= 0 || patch_size % grid_cells != 0)
		throw std::invalid_argument("extract_descriptor: patch size must be a positive multiple of 4");

	Descriptor histogram = Descriptor::Zero();
	if (!center.allFinite())
		return histogram;

	const double half = patch_size / 2.0;
	const double cell_width = static_cast<double>(patch_size) / grid_cells;
	const double sigma = patch_size / 2.0;
	const double bin_width = 2.0 * std::numbers::pi / orientation_bins;
	// Cell coordinate c = offset / cell_width + 1.5, so cell i is centred at c = i. Pixels
	// with c in (-1, 4) reach at least one cell.
	const double reach = half + cell_width / 2.0;
	// Entirely outside the zero-padded image: no gradient anywhere in the window.
	if (center.x() < -reach - 2.0 || center.y() < -reach - 2.0 || center.x() > image.width() + reach + 2.0 ||
	    center.y() > image.height() + reach + 2.0)
		return histogram;
	const int x_begin = static_cast<int>(std::floor(center.x() - reach));
	const int x_end = static_cast<int>(std::ceil(center.x() + reach));
	const int y_begin = static_cast<int>(std::floor(center.y() - reach));
	const int y_end = static_cast<int>(std::ceil(center.y() + reach));

	for (int y = y_begin; y <= y_end; ++y) {
		const double dy = y - center.y();
		const double cell_y = (dy + half) / cell_width - 0.5;
		if (cell_y <= -1.0 || cell_y >= grid_cells)
			continue;
		for (int x = x_begin; x <= x_end; ++x) {
			const double dx = x - center.x();
			const double cell_x = (dx + half) / cell_width - 0.5;
			if (cell_x <= -1.0 || cell_x >= grid_cells)
				continue;

			const double gx = image.at_padded(x + 1, y) - image.at_padded(x - 1, y);
			const double gy = image.at_padded(x, y + 1) - image.at_padded(x, y - 1);
			const double magnitude = std::sqrt(gx * gx + gy * gy);
			if (magnitude == 0.0)
				continue;
			const double weight = magnitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));

			double angle = std::atan2(gy, gx);
			if (angle < 0.0)
				angle += 2.0 * std::numbers::pi;
			const double bin = angle / bin_width;
			const int o0 = static_cast<int>(std::floor(bin)) % orientation_bins;
			const int o1 = (o0 + 1) % orientation_bins;
			const double o_frac = bin - std::floor(bin);

			const int cx0 = static_cast<int>(std::floor(cell_x));
			const int cy0 = static_cast<int>(std::floor(cell_y));
			const double fx = cell_x - cx0;
			const double fy = cell_y - cy0;
			for (int j = 0; j < 2; ++j) {
				const int row = cy0 + j;
				if (row < 0 || row >= grid_cells)
					continue;
				const double wy = j == 0 ? 1.0 - fy : fy;
				for (int i = 0; i < 2; ++i) {
					const int col = cx0 + i;
					if (col < 0 || col >= grid_cells)
						continue;
					const double w = weight * wy * (i == 0 ? 1.0 - fx : fx);
					const int base = (row * grid_cells + col) * orientation_bins;
					histogram(base + o0) += w * (1.0 - o_frac);
					histogram(base + o1) += w * o_frac;
				}
			}
		}
	}

	const double norm = histogram.norm();
	if (!(norm > 1e-12))
		return Descriptor::Zero();
	histogram /= norm;
	histogram = histogram.cwiseMin(descriptor_clamp);
	return histogram / histogram.norm();
}

Eigen::VectorXd assemble_feature(const GrayImage& image, const ParamVector& theta,
                                 const morphablemodel::ShapeModel& model, const camera::CameraConfig& cam,
                                 int patch_size)
{
	const auto alpha = morphablemodel::pad_coefficients(model, theta.shape());
	const auto landmarks = morphablemodel::select_landmarks(model, alpha);
	const auto projected = camera::project_points(landmarks, theta.pose(), cam);

	Eigen::VectorXd feature = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(projected.size()) * descriptor_size);
	bool any_projected = false;
	for (std::size_t i = 0; i < projected.size(); ++i) {
		if (!projected[i])
			continue;
		any_projected = true;
		feature.segment<descriptor_size>(static_cast<Eigen::Index>(i) * descriptor_size) =
		    extract_descriptor(image, *projected[i], patch_size);
	}
	if (!any_projected)
		throw std::runtime_error("assemble_feature: no landmark projects in front of the camera");
	return feature;
}

} // namespace features
} // namespace morphfit
