/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/regression/cascade.hpp
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

#ifndef MORPHFIT_REGRESSION_CASCADE_HPP
#define MORPHFIT_REGRESSION_CASCADE_HPP

#include "morphfit/camera/camera.hpp"
#include "morphfit/core/image.hpp"
#include "morphfit/core/param_vector.hpp"
#include "morphfit/core/training_sample.hpp"
#include "morphfit/features/descriptor.hpp"
#include "morphfit/morphablemodel/shape_model.hpp"

#include "Eigen/Core"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace morphfit {
namespace regression {

/// One affine stage: delta = A * f + b, in normalised parameter units.
struct WeakRegressor
{
	Eigen::MatrixXd A; // p x F
	Eigen::VectorXd b; // p
};

/**
 * Per-dimension z-scoring of parameter updates. Degrees, millimetres and shape
 * coefficients differ by orders of magnitude; the statistics live in the regressor.
 */
struct ParamScale
{
	Eigen::VectorXd mean;
	Eigen::VectorXd stddev;

	/// Statistics over the rows of \p deltas (M x p). Dimensions without spread get stddev 1.
	static ParamScale from_deltas(const Eigen::MatrixXd& deltas);
	static ParamScale identity(int dim);

	Eigen::VectorXd normalize(const Eigen::VectorXd& delta) const;
	Eigen::VectorXd denormalize(const Eigen::VectorXd& normalized) const;
};

/// R = R_1 o ... o R_N plus the normalisation that maps stage outputs to parameter units.
struct CascadeRegressor
{
	std::vector<WeakRegressor> stages;
	ParamScale scale;
	int feature_dim = 0;
	/// Descriptor window the stages were trained with; fitting must use the same.
	int patch_size = features::default_patch_size;
	std::vector<std::string> layout;

	int param_dim() const noexcept { return static_cast<int>(layout.size()); };
	int num_stages() const noexcept { return static_cast<int>(stages.size()); };

	/// Throws std::invalid_argument if stage or scale dimensions disagree.
	void validate() const;
};

/**
 * Exact minimiser of sum_i ||A f_i + b - d_i||^2 + lambda ||A||_F^2 with b unregularised.
 *
 * \p features is M x F, \p deltas is M x p (already normalised). Features and targets
 * are centred, (Fc^T Fc + lambda I) A^T = Fc^T Dc is solved, and b is recovered from the
 * means. Throws std::invalid_argument on empty, mismatched or non-finite input.
 */
WeakRegressor train_stage(const Eigen::MatrixXd& features, const Eigen::MatrixXd& deltas, double lambda);

/// lambda = factor * trace(Fc^T Fc) / F for the centred feature matrix.
double relative_lambda(const Eigen::MatrixXd& features, double factor);

/// A * f + b mapped back to parameter units. Throws std::invalid_argument on dimension mismatch.
Eigen::VectorXd predict_update(const WeakRegressor& regressor, const Eigen::VectorXd& feature,
                               const ParamScale& scale);

inline constexpr double default_lambda_relative = 3.0;
inline constexpr int default_training_patch_size = 64;

struct TrainingConfig
{
	int stages = 3;
	std::optional<double> lambda; ///< absolute; overrides lambda_relative when set
	double lambda_relative = default_lambda_relative;
	int patch_size = default_training_patch_size;
	int jobs = 1;
};

struct TrainingResult
{
	CascadeRegressor regressor;
	/// Mean squared normalised residual: entry 0 before any stage, entry n after stage n.
	std::vector<double> residuals;
	std::vector<double> lambdas;
	/// Samples dropped because their features could not be assembled, with the stage index.
	std::vector<std::pair<std::string, int>> dropped;
};

/**
 * Trains the cascade: at each stage, features are assembled at the current estimates,
 * a ridge stage is fitted to the normalised remaining updates, and every estimate is
 * advanced by that stage's prediction.
 *
 * The normalisation statistics are taken from the initial updates and shared by all
 * stages, so the recorded residuals are comparable across stages (and non-increasing).
 * Throws std::invalid_argument for an invalid config or mismatched layouts and
 * std::runtime_error if every sample is dropped.
 */
TrainingResult train_cascade(std::span<const TrainingSample> samples, const TrainingConfig& config,
                             const morphablemodel::ShapeModel& model, const camera::CameraConfig& cam);

/// Feature assembly failed while applying stage \p stage (1-based).
class FitError : public std::runtime_error
{
public:
	FitError(int stage, const std::string& what);
	int stage() const noexcept { return stage_; };

private:
	int stage_;
};

struct FitResult
{
	ParamVector theta;
	/// trajectory[0] is the initial estimate, trajectory[n] the estimate after stage n.
	std::vector<ParamVector> trajectory;
};

/// Applies every stage in turn. Throws FitError if a stage cannot assemble its features.
FitResult fit(const GrayImage& image, const ParamVector& theta_init, const CascadeRegressor& regressor,
              const morphablemodel::ShapeModel& model, const camera::CameraConfig& cam);

// MFR1 text format. The optional `patch` header line defaults to 32 when absent.
std::string to_mfr(const CascadeRegressor& regressor);
CascadeRegressor from_mfr(const std::string& text);
void save_regressor(const CascadeRegressor& regressor, const std::filesystem::path& filename);
CascadeRegressor load_regressor(const std::filesystem::path& filename);

} // namespace regression
} // namespace morphfit

#endif /* MORPHFIT_REGRESSION_CASCADE_HPP */
