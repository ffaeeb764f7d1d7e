/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/procedural_model.cpp
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
#include "morphfit/morphablemodel/shape_model.hpp"

#include "Eigen/Geometry"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace morphfit {
namespace morphablemodel {

namespace {

// Semi-axes of the head ellipsoid in mm; the face looks down +z.
constexpr double head_half_width = 75.0;
constexpr double head_half_height = 100.0;
constexpr double head_half_depth = 90.0;

double gauss2(double x, double y, double sx, double sy)
{
	return std::exp(-0.5 * (x * x / (sx * sx) + y * y / (sy * sy)));
}

// Facial relief along z at ellipsoid position (x, y), in mm.
double facial_relief(double x, double y)
{
	const double ax = std::abs(x);
	double dz = 0.0;
	dz += 22.0 * gauss2(x, y + 2.0, 9.0, 14.0);          // nose
	dz += 6.0 * gauss2(x, y - 22.0, 8.0, 12.0);          // nasal bridge
	dz += 7.0 * gauss2(ax - 30.0, y - 45.0, 14.0, 6.0);  // brows
	dz -= 7.0 * gauss2(ax - 32.0, y - 30.0, 11.0, 8.0);  // eye sockets
	dz += 5.0 * gauss2(ax - 45.0, y - 5.0, 15.0, 15.0);  // cheekbones
	dz += 4.0 * gauss2(x, y + 45.0, 20.0, 7.0);          // lips
	dz += 6.0 * gauss2(x, y + 82.0, 16.0, 10.0);         // chin
	return dz;
}

double smoothstep(double edge0, double edge1, double x)
{
	const double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
	return t * t * (3.0 - 2.0 * t);
}

Eigen::Vector3d surface_point(double polar, double azimuth)
{
	const Eigen::Vector3d dir(std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
	                          std::cos(polar));
	Eigen::Vector3d p(head_half_width * dir.x(), head_half_height * dir.y(), head_half_depth * dir.z());
	p.z() += smoothstep(0.0, 0.5, dir.z()) * facial_relief(p.x(), p.y());
	return p;
}

struct Mesh
{
	std::vector<Eigen::Vector3d> vertices;
	std::vector<Triangle> triangles;
	std::vector<double> front; // z-component of the vertex direction
};

/**
 * Rings of vertices around the z axis, starting at the front pole (the nose tip) and
 * ending at the back pole. Rings are spaced more densely towards the face.
 */
Mesh build_head_mesh(int vertex_count)
{
	const int rings = std::max(3, static_cast<int>(std::lround(std::sqrt((vertex_count - 2) / 2.0))));
	std::vector<double> polar(rings);
	std::vector<double> weight(rings);
	for (int i = 0; i < rings; ++i) {
		const double t = (i + 1.0) / (rings + 1.0);
		polar[i] = std::numbers::pi * std::pow(t, 1.5);
		weight[i] = std::sin(polar[i]) * (1.0 + 2.0 * std::max(0.0, std::cos(polar[i])));
	}
	const int available = vertex_count - 2;
	const double total_weight = std::accumulate(weight.begin(), weight.end(), 0.0);
	std::vector<int> counts(rings);
	for (int i = 0; i < rings; ++i)
		counts[i] = std::max(3, static_cast<int>(std::floor(available * weight[i] / total_weight)));
	int assigned = std::accumulate(counts.begin(), counts.end(), 0);
	// Hand out or take back the rounding remainder, largest rings first.
	std::vector<int> order(rings);
	std::iota(order.begin(), order.end(), 0);
	std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return weight[a] > weight[b]; });
	for (std::size_t k = 0; assigned != available; k = (k + 1) % order.size()) {
		auto& c = counts[order[k]];
		if (assigned < available) {
			++c;
			++assigned;
		} else if (c > 3) {
			--c;
			--assigned;
		}
	}

	Mesh mesh;
	auto add_vertex = [&](double pol, double az) {
		mesh.vertices.push_back(surface_point(pol, az));
		mesh.front.push_back(std::cos(pol));
		return static_cast<int>(mesh.vertices.size()) - 1;
	};

	const int front_pole = add_vertex(0.0, 0.0);
	std::vector<std::vector<int>> ring_ids(rings);
	std::vector<std::vector<double>> ring_azimuths(rings);
	for (int i = 0; i < rings; ++i) {
		const double offset = (i % 2) * 0.5;
		for (int k = 0; k < counts[i]; ++k) {
			const double az = 2.0 * std::numbers::pi * (k + offset) / counts[i];
			ring_ids[i].push_back(add_vertex(polar[i], az));
			ring_azimuths[i].push_back(az);
		}
	}
	const int back_pole = add_vertex(std::numbers::pi, 0.0);

	for (int k = 0; k < counts[0]; ++k)
		mesh.triangles.push_back({front_pole, ring_ids[0][k], ring_ids[0][(k + 1) % counts[0]]});
	// Zip neighbouring rings together by advancing whichever next vertex has the smaller azimuth.
	for (int i = 0; i + 1 < rings; ++i) {
		const auto& a = ring_ids[i];
		const auto& b = ring_ids[i + 1];
		const auto& az_a = ring_azimuths[i];
		const auto& az_b = ring_azimuths[i + 1];
		const int na = static_cast<int>(a.size());
		const int nb = static_cast<int>(b.size());
		int p = 0;
		int q = 0;
		while (p < na || q < nb) {
			const double next_a = p < na ? (p + 1 < na ? az_a[p + 1] : az_a[0] + 2.0 * std::numbers::pi)
			                             : std::numeric_limits<double>::infinity();
			const double next_b = q < nb ? (q + 1 < nb ? az_b[q + 1] : az_b[0] + 2.0 * std::numbers::pi)
			                             : std::numeric_limits<double>::infinity();
			if (next_a <= next_b) {
				mesh.triangles.push_back({a[p % na], a[(p + 1) % na], b[q % nb]});
				++p;
			} else {
				mesh.triangles.push_back({a[p % na], b[(q + 1) % nb], b[q % nb]});
				++q;
			}
		}
	}
	const auto& last = ring_ids[rings - 1];
	for (std::size_t k = 0; k < last.size(); ++k)
		mesh.triangles.push_back({back_pole, last[(k + 1) % last.size()], last[k]});

	// The surface is star-shaped about the origin: orient every triangle outwards.
	for (auto& t : mesh.triangles) {
		const Eigen::Vector3d& p0 = mesh.vertices[t[0]];
		const Eigen::Vector3d& p1 = mesh.vertices[t[1]];
		const Eigen::Vector3d& p2 = mesh.vertices[t[2]];
		const Eigen::Vector3d normal = (p1 - p0).cross(p2 - p0);
		if (normal.dot(p0 + p1 + p2) < 0.0)
			std::swap(t[1], t[2]);
	}
	return mesh;
}

struct LandmarkTarget
{
	const char* name;
	double x;
	double y;
};

const std::vector<LandmarkTarget>& landmark_targets()
{
	static const std::vector<LandmarkTarget> targets{
	    {"right_eye_outer", -48.0, 30.0}, {"right_eye_inner", -16.0, 30.0}, {"left_eye_inner", 16.0, 30.0},
	    {"left_eye_outer", 48.0, 30.0},   {"right_brow", -32.0, 48.0},      {"left_brow", 32.0, 48.0},
	    {"nose_tip", 0.0, 0.0},           {"right_nostril", -14.0, -12.0},  {"left_nostril", 14.0, -12.0},
	    {"right_mouth_corner", -25.0, -45.0}, {"left_mouth_corner", 25.0, -45.0}, {"upper_lip", 0.0, -38.0},
	    {"chin", 0.0, -85.0},             {"right_jaw", -50.0, -65.0},      {"left_jaw", 50.0, -65.0},
	    {"right_cheek", -68.0, 0.0},      {"left_cheek", 68.0, 0.0}};
	return targets;
}

std::vector<int> pick_landmarks(const Mesh& mesh)
{
	std::vector<int> ids;
	for (const auto& target : landmark_targets()) {
		int best = -1;
		double best_distance = std::numeric_limits<double>::infinity();
		for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
			if (mesh.front[v] < 0.2 || std::find(ids.begin(), ids.end(), v) != ids.end())
				continue;
			const double d = std::hypot(mesh.vertices[v].x() - target.x, mesh.vertices[v].y() - target.y);
			if (d < best_distance) {
				best_distance = d;
				best = v;
			}
		}
		if (best < 0)
			throw std::invalid_argument("make_procedural_model: mesh too coarse to place all landmarks");
		ids.push_back(best);
	}
	return ids;
}

// Removes the components along the (orthonormal) columns of basis.leftCols(count), twice for stability.
void orthogonalize(Eigen::VectorXd& v, const Eigen::MatrixXd& basis, Eigen::Index count)
{
	for (int pass = 0; pass < 2; ++pass) {
		for (Eigen::Index j = 0; j < count; ++j)
			v -= basis.col(j).dot(v) * basis.col(j);
	}
}

} // namespace

const std::vector<std::string>& procedural_landmark_names()
{
	static const std::vector<std::string> names = [] {
		std::vector<std::string> n;
		for (const auto& t : landmark_targets())
			n.emplace_back(t.name);
		return n;
	}();
	return names;
}

ShapeModel make_procedural_model(std::uint64_t seed, int vertex_count, int num_modes)
{
	if (vertex_count < 50)
		throw std::invalid_argument("make_procedural_model: needs at least 50 vertices");
	if (num_modes < 1 || num_modes > 20)
		throw std::invalid_argument("make_procedural_model: number of modes must be in [1, 20]");

	const Mesh mesh = build_head_mesh(vertex_count);
	const Eigen::Index rows = 3 * static_cast<Eigen::Index>(vertex_count);
	Eigen::VectorXd mean(rows);
	for (int v = 0; v < vertex_count; ++v)
		mean.segment<3>(3 * v) = mesh.vertices[v];

	// Rigid motions first (3 translations, 3 infinitesimal rotations); candidates are
	// orthogonalised against them and the rigid vectors are dropped afterwards.
	constexpr int rigid = 6;
	constexpr int candidates = 20;
	Eigen::MatrixXd vectors(rows, rigid + candidates);
	Eigen::Index accepted = 0;
	auto accept = [&](Eigen::VectorXd v) {
		const double before = v.norm();
		orthogonalize(v, vectors, accepted);
		const double after = v.norm();
		if (!(after > 1e-6 * before))
			return;
		vectors.col(accepted++) = v / after;
	};
	for (int axis = 0; axis < 3; ++axis) {
		Eigen::VectorXd t = Eigen::VectorXd::Zero(rows);
		for (int v = 0; v < vertex_count; ++v)
			t(3 * v + axis) = 1.0;
		accept(t);
	}
	for (int axis = 0; axis < 3; ++axis) {
		Eigen::VectorXd r(rows);
		const Eigen::Vector3d omega = Eigen::Vector3d::Unit(axis);
		for (int v = 0; v < vertex_count; ++v)
			r.segment<3>(3 * v) = omega.cross(mesh.vertices[v]);
		accept(r);
	}
	const Eigen::Index rigid_count = accepted;

	std::mt19937_64 rng(seed);
	std::normal_distribution<double> normal(0.0, 1.0);
	std::uniform_real_distribution<double> radius(25.0, 60.0);
	std::vector<int> front_vertices;
	for (int v = 0; v < vertex_count; ++v) {
		if (mesh.front[v] > 0.3)
			front_vertices.push_back(v);
	}
	std::uniform_int_distribution<std::size_t> pick(0, front_vertices.size() - 1);
	for (int c = 0; c < candidates; ++c) {
		Eigen::Matrix3d linear;
		for (int i = 0; i < 9; ++i)
			linear(i / 3, i % 3) = 0.7 * normal(rng);
		struct Bump
		{
			Eigen::Vector3d center;
			Eigen::Vector3d direction;
			double radius;
		};
		std::vector<Bump> bumps(3);
		for (auto& b : bumps) {
			b.center = mesh.vertices[front_vertices[pick(rng)]];
			b.direction = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
			b.radius = radius(rng);
		}
		Eigen::VectorXd field(rows);
		for (int v = 0; v < vertex_count; ++v) {
			const Eigen::Vector3d& p = mesh.vertices[v];
			Eigen::Vector3d d = linear * (p / 100.0);
			for (const auto& b : bumps)
				d += b.direction * std::exp(-(p - b.center).squaredNorm() / (2.0 * b.radius * b.radius));
			field.segment<3>(3 * v) = d;
		}
		accept(field);
	}
	const Eigen::Index independent = accepted - rigid_count;
	if (independent < num_modes)
		throw std::invalid_argument("make_procedural_model: only " + std::to_string(independent) +
		                            " independent modes could be generated");

	const Eigen::MatrixXd basis = vectors.middleCols(rigid_count, num_modes);
	// Per-vertex RMS displacement of a one-sigma step is sigma / sqrt(V): 7 mm for the first mode.
	Eigen::VectorXd sigmas(num_modes);
	for (int k = 0; k < num_modes; ++k)
		sigmas(k) = 7.0 * std::sqrt(static_cast<double>(vertex_count)) * std::pow(0.75, k);

	return ShapeModel(std::move(mean), basis, std::move(sigmas), pick_landmarks(mesh), mesh.triangles);
}

} // namespace morphablemodel
} // namespace morphfit
