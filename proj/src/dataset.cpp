/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/dataset.cpp
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
#include "morphfit/synthetic/dataset.hpp"
#include "morphfit/core/parallel.hpp"
#include "morphfit/core/random.hpp"
#include "morphfit/core/text.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace morphfit {
namespace synthetic {

std::string to_string(Mode mode)
{
	return mode == Mode::train ? "train" : "test";
}

Mode mode_from_string(const std::string& name)
{
	if (name == "train")
		return Mode::train;
	if (name == "test")
		return Mode::test;
	throw std::invalid_argument("unknown mode '" + name + "' (expected train or test)");
}

double ProtocolConfig::grid_step(Mode mode) const
{
	if (grid_step_deg > 0.0)
		return grid_step_deg;
	return mode == Mode::train ? 10.0 : 5.0;
}

int ProtocolConfig::backgrounds_per_pose(Mode mode) const
{
	if (backgrounds > 0)
		return backgrounds;
	return mode == Mode::train ? 5 : 1;
}

int ProtocolConfig::grid_size(Mode mode) const
{
	return static_cast<int>(std::lround(2.0 * range_deg / grid_step(mode))) + 1;
}

camera::CameraConfig ProtocolConfig::camera() const
{
	return camera::CameraConfig::centered(focal, width, height);
}

void ProtocolConfig::validate(Mode mode) const
{
	if (!(range_deg >= 0.0) || !(grid_step_deg >= 0.0))
		throw std::invalid_argument("protocol: range and grid step must be non-negative");
	const double step = grid_step(mode);
	const double cells = 2.0 * range_deg / step;
	if (std::abs(cells - std::round(cells)) > 1e-9)
		throw std::invalid_argument("protocol: grid step must divide the angle range");
	if (!(translation_sigma_mm >= 0.0))
		throw std::invalid_argument("protocol: translation sigma must be non-negative");
	if (!(tz_mm < 0.0))
		throw std::invalid_argument("protocol: tz must be negative (model in front of the camera)");
	if (!(init_perturbation_deg >= 0.0))
		throw std::invalid_argument("protocol: init perturbation must be non-negative");
	if (backgrounds < 0 || shape_modes < 0)
		throw std::invalid_argument("protocol: counts must be non-negative");
	camera().validate();
}

std::vector<TrainingSample> GeneratedSet::fixed_init_samples() const
{
	if (fixed_inits.size() != samples.size())
		throw std::logic_error("fixed initialisations are only generated in test mode");
	auto out = samples;
	for (std::size_t i = 0; i < out.size(); ++i)
		out[i].theta_init = fixed_inits[i];
	return out;
}

GeneratedSet generate_set(const morphablemodel::ShapeModel& model, const ProtocolConfig& protocol, Mode mode,
                          int jobs)
{
	protocol.validate(mode);
	if (protocol.shape_modes > model.num_modes())
		throw std::invalid_argument("protocol: more shape modes than the model has");

	const std::string prefix = to_string(mode);
	const double step = protocol.grid_step(mode);
	const int grid = protocol.grid_size(mode);
	const int per_pose = protocol.backgrounds_per_pose(mode);
	const int K = protocol.shape_modes;

	std::mt19937_64 translation_rng(sub_seed(protocol.seed, prefix + "/translation"));
	std::mt19937_64 identity_rng(sub_seed(protocol.seed, prefix + "/identity"));
	std::mt19937_64 uniform_rng(sub_seed(protocol.seed, prefix + "/init_uniform"));
	std::mt19937_64 fixed_rng(sub_seed(protocol.seed, prefix + "/init_fixed"));
	std::normal_distribution<double> translation_noise(0.0, 1.0);
	std::normal_distribution<double> identity_dist(0.0, 1.0);
	std::uniform_real_distribution<double> perturbation(-protocol.init_perturbation_deg,
	                                                    protocol.init_perturbation_deg);
	std::bernoulli_distribution sign;

	GeneratedSet set;
	set.mode = mode;
	set.protocol = protocol;
	std::vector<std::uint64_t> background_seeds;
	for (int pi = 0; pi < grid; ++pi) {
		const double pitch = -protocol.range_deg + pi * step;
		for (int yi = 0; yi < grid; ++yi) {
			const double yaw = -protocol.range_deg + yi * step;
			camera::PoseParams pose;
			pose.rx = pitch;
			pose.ry = yaw;
			pose.rz = 0.0;
			pose.tx = protocol.translation_sigma_mm * translation_noise(translation_rng);
			pose.ty = protocol.translation_sigma_mm * translation_noise(translation_rng);
			pose.tz = protocol.tz_mm;
			Eigen::VectorXd identity(K);
			for (int k = 0; k < K; ++k)
				identity(k) = identity_dist(identity_rng);
			const ParamVector gt(pose, identity);

			for (int b = 0; b < per_pose; ++b) {
				const auto index = set.samples.size();
				camera::PoseParams init_pose;
				init_pose.rx = pitch + perturbation(uniform_rng);
				init_pose.ry = yaw + perturbation(uniform_rng);
				init_pose.rz = perturbation(uniform_rng);
				init_pose.tz = protocol.tz_mm;

				TrainingSample sample;
				char id[16];
				std::snprintf(id, sizeof(id), "%05zu", index);
				sample.id = id;
				sample.theta_gt = gt;
				sample.theta_init = ParamVector(init_pose, Eigen::VectorXd::Zero(K));
				set.samples.push_back(std::move(sample));
				background_seeds.push_back(sub_seed(protocol.seed, prefix + "/background", index));

				if (mode == Mode::test) {
					auto fixed_pose = init_pose;
					const double d = protocol.init_perturbation_deg;
					fixed_pose.rx = pitch + (sign(fixed_rng) ? d : -d);
					fixed_pose.ry = yaw + (sign(fixed_rng) ? d : -d);
					fixed_pose.rz = sign(fixed_rng) ? d : -d;
					set.fixed_inits.emplace_back(fixed_pose, Eigen::VectorXd::Zero(K));
				}
			}
		}
	}

	RenderConfig render_config;
	render_config.cam = protocol.camera();
	render_config.texture_seed = protocol.texture_seed;
	parallel_for(set.samples.size(), jobs, [&](std::size_t i) {
		auto rc = render_config;
		rc.background_seed = background_seeds[i];
		set.samples[i].image = std::make_shared<const GrayImage>(render(model, set.samples[i].theta_gt, rc));
	});
	return set;
}

std::string protocol_to_text(const ProtocolConfig& p, Mode mode)
{
	std::ostringstream out;
	out << "protocol 1\n";
	out << "mode " << to_string(mode) << "\n";
	out << "range_deg " << format_real(p.range_deg) << "\n";
	out << "grid_step_deg " << format_real(p.grid_step(mode)) << "\n";
	out << "translation_sigma_mm " << format_real(p.translation_sigma_mm) << "\n";
	out << "tz_mm " << format_real(p.tz_mm) << "\n";
	out << "focal " << format_real(p.focal) << "\n";
	out << "width " << p.width << "\n";
	out << "height " << p.height << "\n";
	out << "backgrounds " << p.backgrounds_per_pose(mode) << "\n";
	out << "init_perturbation_deg " << format_real(p.init_perturbation_deg) << "\n";
	out << "shape_modes " << p.shape_modes << "\n";
	out << "seed " << p.seed << "\n";
	out << "texture_seed " << p.texture_seed << "\n";
	return out.str();
}

ProtocolConfig protocol_from_text(const std::string& text, Mode* mode)
{
	std::map<std::string, std::string> entries;
	std::istringstream in(text);
	std::string line;
	while (std::getline(in, line)) {
		const auto tokens = split_whitespace(line);
		if (tokens.empty())
			continue;
		if (tokens.size() != 2)
			throw std::invalid_argument("protocol: malformed line '" + line + "'");
		entries[tokens[0]] = tokens[1];
	}
	auto get = [&](const std::string& key) {
		const auto it = entries.find(key);
		if (it == entries.end())
			throw std::invalid_argument("protocol: missing key '" + key + "'");
		return it->second;
	};
	if (get("protocol") != "1")
		throw std::invalid_argument("protocol: unsupported version");
	const Mode m = mode_from_string(get("mode"));
	if (mode)
		*mode = m;
	ProtocolConfig p;
	p.range_deg = parse_real(get("range_deg"));
	p.grid_step_deg = parse_real(get("grid_step_deg"));
	p.translation_sigma_mm = parse_real(get("translation_sigma_mm"));
	p.tz_mm = parse_real(get("tz_mm"));
	p.focal = parse_real(get("focal"));
	p.width = static_cast<int>(parse_integer(get("width")));
	p.height = static_cast<int>(parse_integer(get("height")));
	p.backgrounds = static_cast<int>(parse_integer(get("backgrounds")));
	p.init_perturbation_deg = parse_real(get("init_perturbation_deg"));
	p.shape_modes = static_cast<int>(parse_integer(get("shape_modes")));
	p.seed = std::stoull(get("seed"));
	p.texture_seed = std::stoull(get("texture_seed"));
	p.validate(m);
	return p;
}

std::string params_csv(const std::vector<std::string>& ids, const std::vector<ParamVector>& params)
{
	if (ids.size() != params.size())
		throw std::invalid_argument("params_csv: id and parameter counts differ");
	const int K = params.empty() ? 0 : params.front().num_shape();
	std::ostringstream out;
	out << "id";
	for (const auto& name : param_layout(K))
		out << "," << name;
	out << "\n";
	for (std::size_t i = 0; i < ids.size(); ++i) {
		if (params[i].num_shape() != K)
			throw std::invalid_argument("params_csv: inconsistent parameter layouts");
		out << ids[i];
		for (int j = 0; j < params[i].size(); ++j)
			out << "," << format_real(params[i][j]);
		out << "\n";
	}
	return out.str();
}

std::vector<std::pair<std::string, ParamVector>> parse_params_csv(const std::string& text)
{
	std::istringstream in(text);
	std::string line;
	if (!std::getline(in, line))
		throw std::invalid_argument("parameter CSV is empty");
	const auto header = split(trim(line), ',');
	if (header.size() < 7 || header[0] != "id")
		throw std::invalid_argument("parameter CSV: header must be id followed by at least 6 parameter columns");
	const auto layout = param_layout(static_cast<int>(header.size()) - 7);
	for (std::size_t j = 0; j < layout.size(); ++j) {
		if (header[j + 1] != layout[j])
			throw std::invalid_argument("parameter CSV: unexpected column '" + header[j + 1] + "'");
	}
	std::vector<std::pair<std::string, ParamVector>> rows;
	int line_number = 1;
	while (std::getline(in, line)) {
		++line_number;
		if (trim(line).empty())
			continue;
		const auto fields = split(trim(line), ',');
		if (fields.size() != header.size())
			throw std::invalid_argument("parameter CSV: wrong number of fields on line " + std::to_string(line_number));
		Eigen::VectorXd values(static_cast<Eigen::Index>(fields.size()) - 1);
		for (std::size_t j = 1; j < fields.size(); ++j)
			values(static_cast<Eigen::Index>(j) - 1) = parse_real(fields[j]);
		rows.emplace_back(fields[0], ParamVector(values));
	}
	return rows;
}

void write_dataset(const GeneratedSet& set, const morphablemodel::ShapeModel& model,
                   const std::filesystem::path& directory)
{
	std::filesystem::create_directories(directory / "images");
	std::vector<std::string> ids;
	std::vector<ParamVector> labels, inits;
	for (const auto& s : set.samples) {
		write_pgm(*s.image, directory / "images" / (s.id + ".pgm"));
		ids.push_back(s.id);
		labels.push_back(s.theta_gt);
		inits.push_back(s.theta_init);
	}
	write_file_atomic(directory / "labels.csv", params_csv(ids, labels));
	write_file_atomic(directory / "inits.csv", params_csv(ids, inits));
	if (set.mode == Mode::test)
		write_file_atomic(directory / "inits_fixed.csv", params_csv(ids, set.fixed_inits));
	morphablemodel::save_model(model, directory / "model.mfm");
	write_file_atomic(directory / "protocol.txt", protocol_to_text(set.protocol, set.mode));
}

GeneratedSet read_dataset(const std::filesystem::path& directory)
{
	GeneratedSet set;
	set.protocol = protocol_from_text(read_text_file(directory / "protocol.txt"), &set.mode);
	const auto labels = parse_params_csv(read_text_file(directory / "labels.csv"));
	const auto inits = parse_params_csv(read_text_file(directory / "inits.csv"));
	if (labels.size() != inits.size())
		throw std::invalid_argument("dataset: labels.csv and inits.csv have different lengths");
	for (std::size_t i = 0; i < labels.size(); ++i) {
		if (labels[i].first != inits[i].first)
			throw std::invalid_argument("dataset: labels.csv and inits.csv list different ids");
		if (labels[i].second.size() != inits[i].second.size())
			throw std::invalid_argument("dataset: label and init layouts differ for " + labels[i].first);
		TrainingSample s;
		s.id = labels[i].first;
		s.theta_gt = labels[i].second;
		s.theta_init = inits[i].second;
		s.image = std::make_shared<const GrayImage>(read_pgm(directory / "images" / (s.id + ".pgm")));
		set.samples.push_back(std::move(s));
	}
	const auto fixed_path = directory / "inits_fixed.csv";
	if (std::filesystem::exists(fixed_path)) {
		const auto fixed = parse_params_csv(read_text_file(fixed_path));
		if (fixed.size() != labels.size())
			throw std::invalid_argument("dataset: inits_fixed.csv has a different length");
		for (std::size_t i = 0; i < fixed.size(); ++i) {
			if (fixed[i].first != labels[i].first)
				throw std::invalid_argument("dataset: inits_fixed.csv lists different ids");
			set.fixed_inits.push_back(fixed[i].second);
		}
	}
	return set;
}

} // namespace synthetic
} // namespace morphfit
