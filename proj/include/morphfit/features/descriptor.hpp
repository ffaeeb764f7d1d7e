/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/features/descriptor.hpp
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

#ifndef MORPHFIT_FEATURES_DESCRIPTOR_HPP
#define MORPHFIT_FEATURES_DESCRIPTOR_HPP

#include "morphfit/camera/camera.hpp"
#include "morphfit/core/image.hpp"
#include "morphfit/core/param_vector.hpp"
#include "morphfit/morphablemodel/shape_model.hpp"

#include "Eigen/Core"

namespace morphfit {
namespace features {

inline constexpr int grid_cells = 4;
inline constexpr int orientation_bins = 8;
inline constexpr int descriptor_size = grid_cells * grid_cells * orientation_bins;
inline constexpr int default_patch_size = 32;
inline constexpr double descriptor_clamp = 0.2;

/// Layout: index = (cell_row * 4 + cell_col) * 8 + orientation_bin.
using Descriptor = Eigen::Matrix<double, descriptor_size, 1>;

/**
 * Upright, fixed-scale SIFT-style descriptor of the patch_size x patch_size window
 * centred at \p center.
 *
 * Gradients are central differences on the zero-padded image. Each pixel votes its
 * gradient magnitude, weighted by a Gaussian with sigma = patch_size / 2, into the two
 * nearest of 8 orientation bins (bin k centred at k * 45 degrees, measured with image y
 * pointing down) and bilinearly into the four nearest of the 4x4 cells. Cell weights
 * fall off linearly over half a cell beyond the window edge, so the descriptor varies
 * continuously with \p center. The histogram is L2-normalised, clamped at 0.2 and
 * renormalised; a patch without gradient yields the zero vector.
 *
 * Throws std::invalid_argument if patch_size is not a positive multiple of 4.
 */
Descriptor extract_descriptor(const GrayImage& image, const Eigen::Vector2d& center,
                              int patch_size = default_patch_size);

/**
 * f(I, theta): one descriptor per landmark, concatenated in landmark order.
 *
 * The landmark vertices come from the shape instance for theta's coefficients (missing
 * trailing coefficients are 0) and are projected with theta's pose. A landmark that fails
 * to project contributes a zero block. Throws std::runtime_error if no landmark projects
 * and std::invalid_argument if theta has more coefficients than the model has modes.
 */
Eigen::VectorXd assemble_feature(const GrayImage& image, const ParamVector& theta,
                                 const morphablemodel::ShapeModel& model, const camera::CameraConfig& cam,
                                 int patch_size = default_patch_size);

} // namespace features
} // namespace morphfit

#endif /* MORPHFIT_FEATURES_DESCRIPTOR_HPP */
