/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/cascade.cpp
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
#include "morphfit/regression/cascade.hpp"
#include "morphfit/core/parallel.hpp"
#include "morphfit/core/text.hpp"

#include "Eigen/Cholesky"
#include "Eigen/QR"

#include <cmath>
#include <sstream>

namespace morphfit {
namespace regression {

ParamScale ParamScale::from_deltas(const Eigen::MatrixXd& deltas)
{
	if (deltas.rows() == 0)
		throw std::invalid_argument("ParamScale: no samples");
	ParamScale scale;
	scale.mean = deltas.colwise().mean().transpose();
	scale.stddev.resize(deltas.cols());
	for (Eigen::Index j = 0; j < deltas.cols(); ++j) {
		const double variance = (deltas.col(j).array() - scale.mean(j)).square().mean();
		const double sd = std::sqrt(variance);
		scale.stddev(j) = sd > 1e-12 ? sd : 1.0;
	}
	return scale;
}

ParamScale ParamScale::identity(int dim)
{
	return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Eigen::VectorXd ParamScale::normalize(const Eigen::VectorXd& delta) const
{
	return (delta - mean).cwiseQuotient(stddev);
}

Eigen::VectorXd ParamScale::denormalize(const Eigen::VectorXd& normalized) const
{
	return normalized.cwiseProduct(stddev) + mean;
}

void CascadeRegressor::validate() const
{
	const auto p = static_cast<Eigen::Index>(param_dim());
	if (p < ParamVector::num_pose_params)
		throw std::invalid_argument("CascadeRegressor: layout needs at least the 6 pose parameters");
	if (feature_dim < 1)
		throw std::invalid_argument("CascadeRegressor: feature dimension must be positive");
	if (patch_size < 4 || patch_size % 4 != 0)
		throw std::invalid_argument("CascadeRegressor: patch size must be a positive multiple of 4");
	if (scale.mean.size() != p || scale.stddev.size() != p)
		throw std::invalid_argument("CascadeRegressor: scale dimension does not match the layout");
	if (!(scale.stddev.array() > 0.0).all())
		throw std::invalid_argument("CascadeRegressor: scale stddev must be strictly positive");
	for (const auto& stage : stages) {
		if (stage.A.rows() != p || stage.A.cols() != feature_dim || stage.b.size() != p)
			throw std::invalid_argument("CascadeRegressor: stage dimensions are inconsistent");
	}
}

WeakRegressor train_stage(const Eigen::MatrixXd& features, const Eigen::MatrixXd& deltas, double lambda)
{
	if (features.rows() < 1)
		throw std::invalid_argument("train_stage: needs at least one sample");
	if (features.rows() != deltas.rows())
		throw std::invalid_argument("train_stage: feature and delta row counts differ");
	if (features.cols() < 1 || deltas.cols() < 1)
		throw std::invalid_argument("train_stage: empty feature or parameter dimension");
	if (!features.allFinite() || !deltas.allFinite())
		throw std::invalid_argument("train_stage: non-finite input");
	if (!(lambda >= 0.0) || !std::isfinite(lambda))
		throw std::invalid_argument("train_stage: lambda must be finite and non-negative");

	const Eigen::RowVectorXd feature_mean = features.colwise().mean();
	const Eigen::RowVectorXd delta_mean = deltas.colwise().mean();
	const Eigen::MatrixXd centered_features = features.rowwise() - feature_mean;
	const Eigen::MatrixXd centered_deltas = deltas.rowwise() - delta_mean;

	const Eigen::Index M = features.rows();
	const Eigen::Index F = features.cols();
	// Primal form (Fc^T Fc + lambda I) A^T = Fc^T Dc when M >= F, otherwise the equivalent
	// dual form A^T = Fc^T (Fc Fc^T + lambda I)^-1 Dc, whichever system is smaller.
	const bool dual = M < F;
	Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dual ? M : F, dual ? M : F);
	if (dual)
		gram.selfadjointView<Eigen::Lower>().rankUpdate(centered_features);
	else
		gram.selfadjointView<Eigen::Lower>().rankUpdate(centered_features.transpose());
	gram.diagonal().array() += lambda;
	const Eigen::MatrixXd rhs = dual ? centered_deltas : Eigen::MatrixXd(centered_features.transpose() * centered_deltas);

	Eigen::MatrixXd solution;
	bool solved = false;
	if (lambda > 0.0) {
		const Eigen::LLT<Eigen::MatrixXd> llt(gram);
		if (llt.info() == Eigen::Success) {
			solution = llt.solve(rhs);
			solved = solution.allFinite();
		}
	}
	if (!solved) {
		// Unregularised or numerically singular: minimum-norm least-squares solution.
		const Eigen::MatrixXd full = gram.selfadjointView<Eigen::Lower>();
		solution = full.completeOrthogonalDecomposition().solve(rhs);
	}
	const Eigen::MatrixXd A_transposed = dual ? Eigen::MatrixXd(centered_features.transpose() * solution) : solution;

	WeakRegressor stage;
	stage.A = A_transposed.transpose();
	stage.b = delta_mean.transpose() - stage.A * feature_mean.transpose();
	return stage;
}

double relative_lambda(const Eigen::MatrixXd& features, double factor)
{
	if (features.rows() < 1 || features.cols() < 1)
		throw std::invalid_argument("relative_lambda: empty feature matrix");
	const Eigen::MatrixXd centered = features.rowwise() - features.colwise().mean();
	return factor * centered.squaredNorm() / static_cast<double>(features.cols());
}

Eigen::VectorXd predict_update(const WeakRegressor& regressor, const Eigen::VectorXd& feature,
                               const ParamScale& scale)
{
	if (regressor.A.cols() != feature.size())
		throw std::invalid_argument("predict_update: feature has " + std::to_string(feature.size()) +
		                            " entries, regressor expects " + std::to_string(regressor.A.cols()));
	if (regressor.b.size() != regressor.A.rows() || scale.mean.size() != regressor.A.rows() ||
	    scale.stddev.size() != regressor.A.rows())
		throw std::invalid_argument("predict_update: parameter dimensions do not match");
	return scale.denormalize(regressor.A * feature + regressor.b);
}

namespace {

double mean_squared_normalized(const std::vector<Eigen::VectorXd>& deltas, const std::vector<bool>& active,
                               const ParamScale& scale)
{
	double sum = 0.0;
	std::size_t count = 0;
	for (std::size_t i = 0; i < deltas.size(); ++i) {
		if (!active[i])
			continue;
		sum += deltas[i].cwiseQuotient(scale.stddev).squaredNorm();
		count += deltas[i].size();
	}
	return count ? sum / static_cast<double>(count) : 0.0;
}

} // namespace

TrainingResult train_cascade(std::span<const TrainingSample> samples, const TrainingConfig& config,
                             const morphablemodel::ShapeModel& model, const camera::CameraConfig& cam)
{
	if (config.stages < 1)
		throw std::invalid_argument("train_cascade: needs at least one stage");
	if (config.lambda && (!(*config.lambda >= 0.0) || !std::isfinite(*config.lambda)))
		throw std::invalid_argument("train_cascade: lambda must be finite and non-negative");
	if (!(config.lambda_relative >= 0.0))
		throw std::invalid_argument("train_cascade: relative lambda must be non-negative");
	if (samples.empty())
		throw std::invalid_argument("train_cascade: no training samples");
	const int p = samples.front().theta_gt.size();
	for (const auto& s : samples) {
		if (!s.image)
			throw std::invalid_argument("train_cascade: sample " + s.id + " has no image");
		if (s.theta_gt.size() != p || s.theta_init.size() != p)
			throw std::invalid_argument("train_cascade: sample " + s.id + " has a different parameter layout");
	}
	if (p - ParamVector::num_pose_params > model.num_modes())
		throw std::invalid_argument("train_cascade: more shape coefficients than the model has modes");

	const std::size_t M = samples.size();
	std::vector<ParamVector> current(M);
	std::vector<Eigen::VectorXd> remaining(M);
	std::vector<bool> active(M, true);
	Eigen::MatrixXd initial_deltas(M, p);
	for (std::size_t i = 0; i < M; ++i) {
		current[i] = samples[i].theta_init;
		remaining[i] = samples[i].theta_gt.values() - current[i].values();
		initial_deltas.row(i) = remaining[i].transpose();
	}

	TrainingResult result;
	auto& regressor = result.regressor;
	regressor.layout = param_layout(p - ParamVector::num_pose_params);
	regressor.feature_dim = model.num_landmarks() * features::descriptor_size;
	regressor.patch_size = config.patch_size;
	regressor.scale = ParamScale::from_deltas(initial_deltas);
	result.residuals.push_back(mean_squared_normalized(remaining, active, regressor.scale));

	std::vector<Eigen::VectorXd> stage_features(M);
	std::vector<bool> failed(M);
	for (int stage = 1; stage <= config.stages; ++stage) {
		std::fill(failed.begin(), failed.end(), false);
		parallel_for(M, config.jobs, [&](std::size_t i) {
			if (!active[i])
				return;
			try {
				stage_features[i] =
				    features::assemble_feature(*samples[i].image, current[i], model, cam, config.patch_size);
			} catch (const std::runtime_error&) {
				failed[i] = true;
			}
		});
		std::vector<std::size_t> rows;
		for (std::size_t i = 0; i < M; ++i) {
			if (!active[i])
				continue;
			if (failed[i]) {
				active[i] = false;
				result.dropped.emplace_back(samples[i].id, stage);
				continue;
			}
			rows.push_back(i);
		}
		if (rows.empty())
			throw std::runtime_error("train_cascade: feature assembly failed for every sample at stage " +
			                         std::to_string(stage));

		Eigen::MatrixXd F(static_cast<Eigen::Index>(rows.size()), regressor.feature_dim);
		Eigen::MatrixXd D(static_cast<Eigen::Index>(rows.size()), p);
		for (std::size_t r = 0; r < rows.size(); ++r) {
			F.row(r) = stage_features[rows[r]].transpose();
			D.row(r) = regressor.scale.normalize(remaining[rows[r]]).transpose();
		}
		const double lambda = config.lambda ? *config.lambda : relative_lambda(F, config.lambda_relative);
		result.lambdas.push_back(lambda);
		regressor.stages.push_back(train_stage(F, D, lambda));

		for (std::size_t r = 0; r < rows.size(); ++r) {
			const auto i = rows[r];
			const Eigen::VectorXd update = predict_update(regressor.stages.back(), stage_features[i], regressor.scale);
			current[i].values() += update;
			remaining[i] = samples[i].theta_gt.values() - current[i].values();
		}
		result.residuals.push_back(mean_squared_normalized(remaining, active, regressor.scale));
	}
	return result;
}

FitError::FitError(int stage, const std::string& what)
    : std::runtime_error("fit failed at stage " + std::to_string(stage) + ": " + what), stage_(stage)
{
}

FitResult fit(const GrayImage& image, const ParamVector& theta_init, const CascadeRegressor& regressor,
              const morphablemodel::ShapeModel& model, const camera::CameraConfig& cam)
{
	if (theta_init.size() != regressor.param_dim())
		throw std::invalid_argument("fit: initial estimate has " + std::to_string(theta_init.size()) +
		                            " parameters, regressor expects " + std::to_string(regressor.param_dim()));
	if (regressor.feature_dim != model.num_landmarks() * features::descriptor_size)
		throw std::invalid_argument("fit: regressor feature dimension does not match the model's landmarks");

	FitResult result;
	result.theta = theta_init;
	result.trajectory.push_back(theta_init);
	for (int n = 0; n < regressor.num_stages(); ++n) {
		Eigen::VectorXd feature;
		try {
			feature = features::assemble_feature(image, result.theta, model, cam, regressor.patch_size);
		} catch (const std::runtime_error& e) {
			throw FitError(n + 1, e.what());
		}
		result.theta.values() += predict_update(regressor.stages[n], feature, regressor.scale);
		result.trajectory.push_back(result.theta);
	}
	return result;
}

std::string to_mfr(const CascadeRegressor& regressor)
{
	regressor.validate();
	std::ostringstream out;
	auto write_row = [&](const auto& values) {
		for (Eigen::Index j = 0; j < values.size(); ++j)
			out << (j ? " " : "") << format_real(values(j));
		out << "\n";
	};
	out << "MFR 1\n";
	out << "stages " << regressor.num_stages() << "\n";
	out << "pdim " << regressor.param_dim() << "\n";
	out << "fdim " << regressor.feature_dim << "\n";
	out << "layout";
	for (const auto& name : regressor.layout)
		out << " " << name;
	out << "\n";
	out << "patch " << regressor.patch_size << "\n";
	out << "scale:\n";
	write_row(regressor.scale.mean);
	write_row(regressor.scale.stddev);
	for (int n = 0; n < regressor.num_stages(); ++n) {
		const auto& stage = regressor.stages[n];
		out << "stage " << n + 1 << "\n";
		out << "A:\n";
		for (Eigen::Index r = 0; r < stage.A.rows(); ++r)
			write_row(stage.A.row(r));
		out << "b:\n";
		write_row(stage.b);
	}
	return out.str();
}

CascadeRegressor from_mfr(const std::string& text)
{
	std::istringstream in(text);
	int line_number = 0;
	auto next = [&]() {
		std::string line;
		if (!std::getline(in, line))
			throw std::invalid_argument("MFR: unexpected end of file after line " + std::to_string(line_number));
		++line_number;
		return split_whitespace(line);
	};
	auto expect = [&](const std::string& keyword, std::size_t tokens) {
		auto t = next();
		if (t.size() != tokens || t[0] != keyword)
			throw std::invalid_argument("MFR: expected '" + keyword + "' on line " + std::to_string(line_number));
		return t;
	};
	auto read_row = [&](Eigen::Index count) {
		const auto t = next();
		if (static_cast<Eigen::Index>(t.size()) != count)
			throw std::invalid_argument("MFR: expected " + std::to_string(count) + " values on line " +
			                            std::to_string(line_number));
		Eigen::VectorXd v(count);
		for (Eigen::Index j = 0; j < count; ++j)
			v(j) = parse_real(t[j]);
		return v;
	};
	auto count = [](const std::string& token) {
		const auto v = parse_integer(token);
		if (v < 0 || v > 10'000'000)
			throw std::invalid_argument("MFR: count out of range");
		return static_cast<int>(v);
	};

	const auto magic = next();
	if (magic.size() != 2 || magic[0] != "MFR")
		throw std::invalid_argument("MFR: not a regressor file");
	if (magic[1] != "1")
		throw std::invalid_argument("MFR: unsupported version " + magic[1]);
	const int stages = count(expect("stages", 2)[1]);
	const int p = count(expect("pdim", 2)[1]);
	const int F = count(expect("fdim", 2)[1]);
	const auto layout = next();
	if (layout.empty() || layout[0] != "layout" || static_cast<int>(layout.size()) != p + 1)
		throw std::invalid_argument("MFR: layout must list pdim names");

	CascadeRegressor regressor;
	regressor.feature_dim = F;
	regressor.layout.assign(layout.begin() + 1, layout.end());
	auto scale_line = next();
	if (scale_line.size() == 2 && scale_line[0] == "patch") {
		regressor.patch_size = count(scale_line[1]);
		scale_line = next();
	}
	if (scale_line.size() != 1 || scale_line[0] != "scale:")
		throw std::invalid_argument("MFR: expected 'scale:' on line " + std::to_string(line_number));
	regressor.scale.mean = read_row(p);
	regressor.scale.stddev = read_row(p);
	for (int n = 0; n < stages; ++n) {
		const auto header = expect("stage", 2);
		if (count(header[1]) != n + 1)
			throw std::invalid_argument("MFR: stages out of order");
		expect("A:", 1);
		WeakRegressor stage;
		stage.A.resize(p, F);
		for (int r = 0; r < p; ++r)
			stage.A.row(r) = read_row(F).transpose();
		expect("b:", 1);
		stage.b = read_row(p);
		regressor.stages.push_back(std::move(stage));
	}
	regressor.validate();
	return regressor;
}

void save_regressor(const CascadeRegressor& regressor, const std::filesystem::path& filename)
{
	write_file_atomic(filename, to_mfr(regressor));
}

CascadeRegressor load_regressor(const std::filesystem::path& filename)
{
	return from_mfr(read_text_file(filename));
}

} // namespace regression
} // namespace morphfit
