/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/render.cpp
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
#include "morphfit/synthetic/render.hpp"
#include "morphfit/core/random.hpp"

#include "Eigen/Geometry"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace morphfit {
namespace synthetic {

namespace {

constexpr double near_plane = 1.0;

double lattice_value(std::int64_t x, std::int64_t y, std::int64_t z, std::uint64_t seed)
{
	std::uint64_t h = splitmix64(seed ^ static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ULL);
	h = splitmix64(h ^ static_cast<std::uint64_t>(y) * 0xC2B2AE3D27D4EB4FULL);
	h = splitmix64(h ^ static_cast<std::uint64_t>(z) * 0x165667B19E3779F9ULL);
	return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double fade(double t)
{
	return t * t * (3.0 - 2.0 * t);
}

// Smoothly interpolated lattice noise in [0, 1).
double value_noise(double x, double y, double z, std::uint64_t seed)
{
	const double fx = std::floor(x), fy = std::floor(y), fz = std::floor(z);
	const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy), iz = static_cast<std::int64_t>(fz);
	const double tx = fade(x - fx), ty = fade(y - fy), tz = fade(z - fz);
	double result = 0.0;
	for (int dz = 0; dz < 2; ++dz) {
		for (int dy = 0; dy < 2; ++dy) {
			for (int dx = 0; dx < 2; ++dx) {
				const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty) * (dz ? tz : 1.0 - tz);
				result += w * lattice_value(ix + dx, iy + dy, iz + dz, seed);
			}
		}
	}
	return result;
}

double smoothstep(double edge0, double edge1, double x)
{
	return fade(std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0));
}

// 1 inside the ellipse, 0 outside, with a soft rim.
double ellipse(double x, double y, double cx, double cy, double rx, double ry)
{
	const double r = ((x - cx) / rx) * ((x - cx) / rx) + ((y - cy) / ry) * ((y - cy) / ry);
	return 1.0 - smoothstep(0.4, 1.2, r);
}

double mix(double a, double b, double t)
{
	return a + (b - a) * t;
}

double edge_function(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p)
{
	return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

} // namespace

RasterBuffers rasterize(std::span<const Eigen::Vector3d> camera_vertices,
                        std::span<const morphablemodel::Triangle> triangles, const camera::CameraConfig& cam)
{
	cam.validate();
	RasterBuffers buffers;
	buffers.width = cam.width;
	buffers.height = cam.height;
	const auto pixel_count = static_cast<std::size_t>(cam.width) * cam.height;
	buffers.depth.assign(pixel_count, std::numeric_limits<double>::infinity());
	buffers.triangle.assign(pixel_count, -1);
	buffers.bary.assign(pixel_count, Eigen::Vector3d::Zero());

	for (std::size_t t = 0; t < triangles.size(); ++t) {
		const auto& tri = triangles[t];
		std::array<Eigen::Vector2d, 3> screen;
		std::array<double, 3> inv_depth;
		bool visible = true;
		for (int k = 0; k < 3; ++k) {
			const Eigen::Vector3d& p = camera_vertices[tri[k]];
			if (!(p.z() < -near_plane)) {
				visible = false;
				break;
			}
			const double depth = -p.z();
			screen[k] = Eigen::Vector2d(cam.cx + cam.focal * p.x() / depth, cam.cy - cam.focal * p.y() / depth);
			inv_depth[k] = 1.0 / depth;
		}
		if (!visible)
			continue;
		const double area = edge_function(screen[0], screen[1], screen[2]);
		if (std::abs(area) < 1e-12)
			continue;

		const double min_u = std::min({screen[0].x(), screen[1].x(), screen[2].x()});
		const double max_u = std::max({screen[0].x(), screen[1].x(), screen[2].x()});
		const double min_v = std::min({screen[0].y(), screen[1].y(), screen[2].y()});
		const double max_v = std::max({screen[0].y(), screen[1].y(), screen[2].y()});
		if (max_u < 0.0 || max_v < 0.0 || min_u > cam.width - 1 || min_v > cam.height - 1)
			continue;
		const int x0 = std::max(0, static_cast<int>(std::ceil(min_u)));
		const int x1 = std::min(cam.width - 1, static_cast<int>(std::floor(max_u)));
		const int y0 = std::max(0, static_cast<int>(std::ceil(min_v)));
		const int y1 = std::min(cam.height - 1, static_cast<int>(std::floor(max_v)));

		for (int y = y0; y <= y1; ++y) {
			for (int x = x0; x <= x1; ++x) {
				const Eigen::Vector2d pixel(x, y);
				const double b0 = edge_function(screen[1], screen[2], pixel) / area;
				const double b1 = edge_function(screen[2], screen[0], pixel) / area;
				const double b2 = 1.0 - b0 - b1;
				if (b0 < 0.0 || b1 < 0.0 || b2 < 0.0)
					continue;
				// 1/depth is affine in screen space.
				const double inv = b0 * inv_depth[0] + b1 * inv_depth[1] + b2 * inv_depth[2];
				const double depth = 1.0 / inv;
				const auto idx = buffers.index(x, y);
				if (depth < buffers.depth[idx]) {
					buffers.depth[idx] = depth;
					buffers.triangle[idx] = static_cast<int>(t);
					buffers.bary[idx] =
					    Eigen::Vector3d(b0 * inv_depth[0], b1 * inv_depth[1], b2 * inv_depth[2]) / inv;
				}
			}
		}
	}
	return buffers;
}

double albedo(const Eigen::Vector3d& p, std::uint64_t texture_seed)
{
	const double x = p.x(), y = p.y(), z = p.z();
	double value = 0.62;
	value += 0.30 * (value_noise(x / 25.0, y / 25.0, z / 25.0, texture_seed) - 0.5);
	value += 0.12 * (value_noise(x / 10.0, y / 10.0, z / 10.0, texture_seed + 1) - 0.5);

	// Hair above the forehead and around the back of the head.
	value = mix(value, 0.22, smoothstep(70.0, 85.0, y + 0.25 * std::max(0.0, -z)));

	if (z > 0.0) {
		const double ax = std::abs(x);
		value = mix(value, 0.88, ellipse(ax, y, 32.0, 30.0, 15.0, 6.0));        // sclera
		value = mix(value, 0.12, ellipse(ax, y, 32.0, 30.0, 5.0, 5.0));         // iris
		value = mix(value, 0.18, ellipse(ax, y, 32.0, 47.0, 18.0, 3.5));        // brows
		value = mix(value, 0.15, ellipse(ax, y, 8.0, -12.0, 4.0, 2.5));         // nostrils
		value = mix(value, 0.38, ellipse(x, y, 0.0, -45.0, 26.0, 7.0));         // lips
		value = mix(value, 0.10, ellipse(x, y, 0.0, -45.0, 24.0, 1.3));         // mouth line
	}
	return std::clamp(value, 0.0, 1.0);
}

GrayImage render_background(std::uint64_t seed, int width, int height)
{
	const double phase_x = 1000.0 * value_noise(0.5, 0.5, 0.5, seed + 17);
	const double phase_y = 1000.0 * value_noise(1.5, 0.5, 0.5, seed + 17);
	const double contrast = 1.0 + 0.6 * value_noise(2.5, 0.5, 0.5, seed + 17);

	struct Octave
	{
		double period;
		double amplitude;
	};
	constexpr std::array<Octave, 3> octaves{{{48.0, 0.5}, {20.0, 0.3}, {9.0, 0.2}}};
	std::vector<double> sum(static_cast<std::size_t>(width) * height, 0.0);
	for (std::size_t o = 0; o < octaves.size(); ++o) {
		const auto [period, amplitude] = octaves[o];
		// Lattice values covering the image for this octave, then smooth interpolation.
		const auto gx0 = static_cast<std::int64_t>(std::floor(phase_x / period));
		const auto gy0 = static_cast<std::int64_t>(std::floor(phase_y / period));
		const int lattice_w = static_cast<int>(std::ceil(width / period)) + 3;
		const int lattice_h = static_cast<int>(std::ceil(height / period)) + 3;
		std::vector<double> lattice(static_cast<std::size_t>(lattice_w) * lattice_h);
		for (int j = 0; j < lattice_h; ++j) {
			for (int i = 0; i < lattice_w; ++i)
				lattice[static_cast<std::size_t>(j) * lattice_w + i] =
				    lattice_value(gx0 + i, gy0 + j, static_cast<std::int64_t>(o), seed);
		}
		for (int y = 0; y < height; ++y) {
			const double v = (y + phase_y) / period;
			const double fy = std::floor(v);
			const int j = static_cast<int>(static_cast<std::int64_t>(fy) - gy0);
			const double ty = fade(v - fy);
			for (int x = 0; x < width; ++x) {
				const double u = (x + phase_x) / period;
				const double fx = std::floor(u);
				const int i = static_cast<int>(static_cast<std::int64_t>(fx) - gx0);
				const double tx = fade(u - fx);
				const double* row0 = &lattice[static_cast<std::size_t>(j) * lattice_w + i];
				const double* row1 = row0 + lattice_w;
				const double top = row0[0] + (row0[1] - row0[0]) * tx;
				const double bottom = row1[0] + (row1[1] - row1[0]) * tx;
				sum[static_cast<std::size_t>(y) * width + x] += amplitude * (top + (bottom - top) * ty);
			}
		}
	}
	for (auto& v : sum)
		v = 0.5 + contrast * (v - 0.5);
	return GrayImage(width, height, std::move(sum));
}

GrayImage render(const morphablemodel::ShapeModel& model, const ParamVector& theta, const RenderConfig& config)
{
	if (model.triangles().empty())
		throw std::invalid_argument("render: the model has no triangles");
	const auto alpha = morphablemodel::pad_coefficients(model, theta.shape());
	const Eigen::VectorXd shape = morphablemodel::instance_shape(model, alpha);
	const Eigen::Matrix4d modelview = camera::build_modelview(theta.pose());
	const Eigen::Matrix3d rotation = modelview.topLeftCorner<3, 3>();
	const Eigen::Vector3d translation = modelview.topRightCorner<3, 1>();

	const int V = model.vertex_count();
	std::vector<Eigen::Vector3d> vertices(V);
	for (int v = 0; v < V; ++v)
		vertices[v] = rotation * shape.segment<3>(3 * v) + translation;

	std::vector<Eigen::Vector3d> normals(V, Eigen::Vector3d::Zero());
	for (const auto& tri : model.triangles()) {
		const Eigen::Vector3d n = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
		for (const int v : tri)
			normals[v] += n;
	}
	for (auto& n : normals) {
		const double len = n.norm();
		if (len > 0.0)
			n /= len;
	}

	const auto raster = rasterize(vertices, model.triangles(), config.cam);
	GrayImage image = render_background(config.background_seed, config.cam.width, config.cam.height);
	const Eigen::Vector3d light = config.light_direction.normalized();
	bool any = false;
	for (int y = 0; y < raster.height; ++y) {
		for (int x = 0; x < raster.width; ++x) {
			const auto idx = raster.index(x, y);
			const int t = raster.triangle[idx];
			if (t < 0)
				continue;
			any = true;
			const auto& tri = model.triangles()[t];
			const Eigen::Vector3d& b = raster.bary[idx];
			Eigen::Vector3d surface = Eigen::Vector3d::Zero();
			Eigen::Vector3d normal = Eigen::Vector3d::Zero();
			for (int k = 0; k < 3; ++k) {
				surface += b(k) * model.mean().segment<3>(3 * tri[k]);
				normal += b(k) * normals[tri[k]];
			}
			const double len = normal.norm();
			const double lambert = len > 0.0 ? std::max(0.0, normal.dot(light) / len) : 0.0;
			const double shading = config.ambient + (1.0 - config.ambient) * lambert;
			image.set(x, y, albedo(surface, config.texture_seed) * shading);
		}
	}
	if (!any)
		throw std::runtime_error("render: the face is entirely outside the view frustum");
	return quantize_8bit(image);
}

} // namespace synthetic
} // namespace morphfit
