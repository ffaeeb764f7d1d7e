/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/evaluation/evaluation.hpp
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

#ifndef MORPHFIT_EVALUATION_EVALUATION_HPP
#define MORPHFIT_EVALUATION_EVALUATION_HPP

#include "morphfit/core/param_vector.hpp"
#include "morphfit/core/training_sample.hpp"
#include "morphfit/regression/cascade.hpp"
#include "morphfit/posit/posit.hpp"

#include "Eigen/Core"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace morphfit {
namespace evaluation {

/**
 * Mean of |pred - gt| over samples and the three angles, in degrees.
 * Raw differences, no wrap-around. Throws std::invalid_argument on empty or unequal input.
 */
double mae_angles(std::span<const ParamVector> predicted, std::span<const ParamVector> ground_truth);

/**
 * <a_e, a_g> / (|a_e| |a_g|). Throws std::invalid_argument for empty or unequal lengths,
 * or if either vector is zero (the cosine is undefined there).
 */
double shape_cosine(const Eigen::VectorXd& alpha_estimated, const Eigen::VectorXd& alpha_ground_truth);

struct StageMetrics
{
	int stage = 0;
	double mae_deg = 0.0;
	double shape_cosine = 0.0; ///< NaN when no sample has a defined cosine
	std::size_t n_samples = 0;
};

struct EvalReport
{
	std::string regime;
	std::vector<StageMetrics> stages; ///< stage 0 is the initialisation
	std::size_t failures = 0;
};

/**
 * Fits every sample and aggregates the angle MAE and mean shape cosine per stage.
 * Samples whose fit fails are counted in failures and excluded.
 */
EvalReport evaluate(std::span<const TrainingSample> samples, const regression::CascadeRegressor& regressor,
                    const morphablemodel::ShapeModel& model, const camera::CameraConfig& cam,
                    const std::string& regime, int jobs = 1);

struct PositReport
{
	double mae_deg = 0.0;
	std::size_t n_samples = 0;
	std::size_t failures = 0;
	std::size_t not_converged = 0;
	/// Per sample: estimated pose, or empty where POSIT rejected the input.
	std::vector<std::optional<camera::PoseParams>> estimates;
};

/**
 * POSIT baseline over a labelled set. The 2D points are the ground-truth landmarks
 * (instance for the sample's coefficients) projected with the ground-truth pose, plus
 * isotropic Gaussian noise of \p noise_px drawn from \p seed; the 3D points are the
 * mean-shape landmarks. Failed samples are counted and excluded from the MAE.
 */
PositReport evaluate_posit(std::span<const TrainingSample> samples, const morphablemodel::ShapeModel& model,
                           const camera::CameraConfig& cam, double noise_px, std::uint64_t seed);

/// Columns: stage, mae_deg, shape_cosine, n_samples, regime.
std::string report_to_csv(const EvalReport& report);
EvalReport report_from_csv(const std::string& text);

} // namespace evaluation
} // namespace morphfit

#endif /* MORPHFIT_EVALUATION_EVALUATION_HPP */
