/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/synthetic/render.hpp
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

#ifndef MORPHFIT_SYNTHETIC_RENDER_HPP
#define MORPHFIT_SYNTHETIC_RENDER_HPP

#include "morphfit/camera/camera.hpp"
#include "morphfit/core/image.hpp"
#include "morphfit/core/param_vector.hpp"
#include "morphfit/morphablemodel/shape_model.hpp"

#include "Eigen/Core"

#include <cstdint>
#include <span>
#include <vector>

namespace morphfit {
namespace synthetic {

struct RenderConfig
{
	camera::CameraConfig cam;
	std::uint64_t texture_seed = 7;
	std::uint64_t background_seed = 0;
	/// Direction towards the light, in camera space.
	Eigen::Vector3d light_direction = Eigen::Vector3d(-0.3, 0.4, 1.0).normalized();
	double ambient = 0.35;
};

/// Depth and coverage buffers produced by rasterize(). triangle is -1 where nothing was drawn.
struct RasterBuffers
{
	int width = 0;
	int height = 0;
	std::vector<double> depth;          ///< positive distance along -z of the nearest surface
	std::vector<int> triangle;          ///< index of the visible triangle
	std::vector<Eigen::Vector3d> bary;  ///< perspective-correct barycentrics within that triangle

	std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; };
};

/**
 * Z-buffered rasterisation of camera-space triangles, sampling at pixel centres.
 * Triangles with a vertex at or behind the near plane (z > -1 mm) are skipped.
 */
RasterBuffers rasterize(std::span<const Eigen::Vector3d> camera_vertices,
                        std::span<const morphablemodel::Triangle> triangles, const camera::CameraConfig& cam);

/// Face albedo at a point of the mean surface: skin value noise plus darker eyes, brows, nostrils and mouth.
double albedo(const Eigen::Vector3d& mean_surface_point, std::uint64_t texture_seed);

/// Procedural multi-octave value-noise background.
GrayImage render_background(std::uint64_t seed, int width, int height);

/**
 * Renders the shape instance for theta over a procedural background.
 *
 * Intensity is the albedo (looked up at the mean-shape surface position, so texture moves
 * with the mesh) times ambient plus Lambertian shading from the fixed light. The result is
 * quantised to 8 bits. Throws std::runtime_error if no triangle lands in the image and
 * std::invalid_argument if the model has no triangles.
 */
GrayImage render(const morphablemodel::ShapeModel& model, const ParamVector& theta, const RenderConfig& config);

} // namespace synthetic
} // namespace morphfit

#endif /* MORPHFIT_SYNTHETIC_RENDER_HPP */
