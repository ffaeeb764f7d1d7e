/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/synthetic/dataset.hpp
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

#ifndef MORPHFIT_SYNTHETIC_DATASET_HPP
#define MORPHFIT_SYNTHETIC_DATASET_HPP

#include "morphfit/core/training_sample.hpp"
#include "morphfit/morphablemodel/shape_model.hpp"
#include "morphfit/synthetic/render.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace morphfit {
namespace synthetic {

enum class Mode { train, test };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/**
 * The synthetic pose protocol. Zero grid_step_deg or backgrounds select the mode
 * default: 10 degrees and 5 backgrounds for training, 5 degrees and 1 for testing.
 */
struct ProtocolConfig
{
	double range_deg = 30.0;
	double grid_step_deg = 0.0;
	double translation_sigma_mm = 1.5;
	double tz_mm = -1200.0;
	double focal = 1500.0;
	int width = 640;
	int height = 480;
	int backgrounds = 0;
	double init_perturbation_deg = 11.0;
	int shape_modes = 0;
	std::uint64_t seed = 0;
	std::uint64_t texture_seed = 7;

	double grid_step(Mode mode) const;
	int backgrounds_per_pose(Mode mode) const;
	int grid_size(Mode mode) const;
	camera::CameraConfig camera() const;

	/// Throws std::invalid_argument if the step does not divide the range or a quantity is out of range.
	void validate(Mode mode) const;
};

/**
 * A generated set. samples carry the uniform +-11 degree initialisation; in test mode
 * fixed_inits holds, per sample, the initialisation with every angle exactly 11 degrees
 * (random sign) from the ground truth.
 */
struct GeneratedSet
{
	Mode mode = Mode::train;
	ProtocolConfig protocol;
	std::vector<TrainingSample> samples;
	std::vector<ParamVector> fixed_inits;

	/// The samples with theta_init replaced by fixed_inits.
	std::vector<TrainingSample> fixed_init_samples() const;
};

/**
 * Ground truth is a pitch x yaw grid over +-range with roll 0, Gaussian tx/ty and fixed tz;
 * with shape modes, one standard-normal identity per pose. Each pose is rendered over
 * backgrounds_per_pose() independent backgrounds. Initialisations perturb each angle
 * uniformly in +-init_perturbation_deg with translation at (0, 0, tz) and the mean shape.
 *
 * Deterministic in (model, protocol, mode); \p jobs only affects speed.
 */
GeneratedSet generate_set(const morphablemodel::ShapeModel& model, const ProtocolConfig& protocol, Mode mode,
                          int jobs = 1);

std::string protocol_to_text(const ProtocolConfig& protocol, Mode mode);
ProtocolConfig protocol_from_text(const std::string& text, Mode* mode = nullptr);

/**
 * Writes images/<id>.pgm, labels.csv, inits.csv (plus inits_fixed.csv in test mode),
 * protocol.txt and a copy of the model as model.mfm. Files are written atomically.
 */
void write_dataset(const GeneratedSet& set, const morphablemodel::ShapeModel& model,
                   const std::filesystem::path& directory);

GeneratedSet read_dataset(const std::filesystem::path& directory);

std::string params_csv(const std::vector<std::string>& ids, const std::vector<ParamVector>& params);
std::vector<std::pair<std::string, ParamVector>> parse_params_csv(const std::string& text);

} // namespace synthetic
} // namespace morphfit

#endif /* MORPHFIT_SYNTHETIC_DATASET_HPP */
