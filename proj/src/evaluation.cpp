/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/evaluation.cpp
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
#include "morphfit/evaluation/evaluation.hpp"
#include "morphfit/core/parallel.hpp"
#include "morphfit/core/random.hpp"
#include "morphfit/core/text.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace morphfit {
namespace evaluation {

double mae_angles(std::span<const ParamVector> predicted, std::span<const ParamVector> ground_truth)
{
	if (predicted.empty())
		throw std::invalid_argument("mae_angles: no samples");
	if (predicted.size() != ground_truth.size())
		throw std::invalid_argument("mae_angles: prediction and ground-truth counts differ");
	double sum = 0.0;
	for (std::size_t i = 0; i < predicted.size(); ++i)
		sum += (predicted[i].angles() - ground_truth[i].angles()).cwiseAbs().sum();
	return sum / (3.0 * static_cast<double>(predicted.size()));
}

double shape_cosine(const Eigen::VectorXd& alpha_estimated, const Eigen::VectorXd& alpha_ground_truth)
{
	if (alpha_estimated.size() == 0 || alpha_estimated.size() != alpha_ground_truth.size())
		throw std::invalid_argument("shape_cosine: coefficient vectors must be non-empty and of equal length");
	const double norm_e = alpha_estimated.norm();
	const double norm_g = alpha_ground_truth.norm();
	if (norm_e == 0.0 || norm_g == 0.0)
		throw std::invalid_argument("shape_cosine: undefined for a zero coefficient vector");
	return alpha_estimated.dot(alpha_ground_truth) / (norm_e * norm_g);
}

EvalReport evaluate(std::span<const TrainingSample> samples, const regression::CascadeRegressor& regressor,
                    const morphablemodel::ShapeModel& model, const camera::CameraConfig& cam,
                    const std::string& regime, int jobs)
{
	regressor.validate();
	for (const auto& s : samples) {
		if (s.theta_gt.size() != regressor.param_dim() || s.theta_init.size() != regressor.param_dim())
			throw std::invalid_argument("evaluate: sample " + s.id + " does not match the regressor layout");
	}

	std::vector<std::optional<regression::FitResult>> fits(samples.size());
	parallel_for(samples.size(), jobs, [&](std::size_t i) {
		try {
			fits[i] = regression::fit(*samples[i].image, samples[i].theta_init, regressor, model, cam);
		} catch (const regression::FitError&) {
			fits[i].reset();
		}
	});

	EvalReport report;
	report.regime = regime;
	std::vector<std::size_t> ok;
	for (std::size_t i = 0; i < samples.size(); ++i) {
		if (fits[i])
			ok.push_back(i);
		else
			++report.failures;
	}

	for (int stage = 0; stage <= regressor.num_stages(); ++stage) {
		StageMetrics metrics;
		metrics.stage = stage;
		metrics.n_samples = ok.size();
		metrics.mae_deg = std::numeric_limits<double>::quiet_NaN();
		metrics.shape_cosine = std::numeric_limits<double>::quiet_NaN();
		if (!ok.empty()) {
			std::vector<ParamVector> predicted, truth;
			double cosine_sum = 0.0;
			std::size_t cosine_count = 0;
			for (const auto i : ok) {
				const auto& theta = fits[i]->trajectory[stage];
				predicted.push_back(theta);
				truth.push_back(samples[i].theta_gt);
				if (theta.num_shape() > 0 && theta.shape().norm() > 0.0 && samples[i].theta_gt.shape().norm() > 0.0) {
					cosine_sum += shape_cosine(theta.shape(), samples[i].theta_gt.shape());
					++cosine_count;
				}
			}
			metrics.mae_deg = mae_angles(predicted, truth);
			if (cosine_count > 0)
				metrics.shape_cosine = cosine_sum / static_cast<double>(cosine_count);
		}
		report.stages.push_back(metrics);
	}
	return report;
}

PositReport evaluate_posit(std::span<const TrainingSample> samples, const morphablemodel::ShapeModel& model,
                           const camera::CameraConfig& cam, double noise_px, std::uint64_t seed)
{
	if (samples.empty())
		throw std::invalid_argument("evaluate_posit: no samples");
	if (!(noise_px >= 0.0))
		throw std::invalid_argument("evaluate_posit: noise must be non-negative");
	cam.validate();

	const Eigen::Matrix4Xd mean_landmarks =
	    morphablemodel::select_landmarks(model, Eigen::VectorXd::Zero(model.num_modes()));
	std::vector<Eigen::Vector3d> points3d;
	for (Eigen::Index j = 0; j < mean_landmarks.cols(); ++j)
		points3d.push_back(mean_landmarks.col(j).head<3>());

	std::mt19937_64 rng(sub_seed(seed, "posit/noise"));
	std::normal_distribution<double> noise(0.0, 1.0);

	PositReport report;
	report.estimates.resize(samples.size());
	double sum = 0.0;
	for (std::size_t i = 0; i < samples.size(); ++i) {
		const auto& gt = samples[i].theta_gt;
		const auto projected = camera::project_points(
		    morphablemodel::select_landmarks(model, morphablemodel::pad_coefficients(model, gt.shape())), gt.pose(),
		    cam);
		posit::Correspondences c;
		c.points3d = points3d;
		c.focal = cam.focal;
		c.principal_point = Eigen::Vector2d(cam.cx, cam.cy);
		bool visible = true;
		for (const auto& p : projected) {
			if (!p) {
				visible = false;
				break;
			}
			c.points2d.push_back(*p);
		}
		// Noise is drawn for every sample so the stream does not depend on failures.
		for (std::size_t j = 0; j < projected.size(); ++j) {
			const double du = noise(rng);
			const double dv = noise(rng);
			if (j < c.points2d.size())
				c.points2d[j] += noise_px * Eigen::Vector2d(du, dv);
		}
		if (!visible) {
			++report.failures;
			continue;
		}
		try {
			const auto result = posit::posit(c);
			if (!result.converged)
				++report.not_converged;
			const auto pose = posit::to_pose(result);
			report.estimates[i] = pose;
			sum += std::abs(pose.rx - gt[0]) + std::abs(pose.ry - gt[1]) + std::abs(pose.rz - gt[2]);
			++report.n_samples;
		} catch (const std::exception&) {
			++report.failures;
		}
	}
	if (report.n_samples == 0)
		throw std::runtime_error("evaluate_posit: POSIT failed on every sample");
	report.mae_deg = sum / (3.0 * static_cast<double>(report.n_samples));
	return report;
}

std::string report_to_csv(const EvalReport& report)
{
	std::ostringstream out;
	out << "stage,mae_deg,shape_cosine,n_samples,regime\n";
	for (const auto& s : report.stages) {
		out << s.stage << "," << format_real(s.mae_deg) << ","
		    << (std::isnan(s.shape_cosine) ? std::string("nan") : format_real(s.shape_cosine)) << "," << s.n_samples
		    << "," << report.regime << "\n";
	}
	return out.str();
}

EvalReport report_from_csv(const std::string& text)
{
	std::istringstream in(text);
	std::string line;
	if (!std::getline(in, line) || trim(line) != "stage,mae_deg,shape_cosine,n_samples,regime")
		throw std::invalid_argument("report CSV: unexpected header");
	EvalReport report;
	bool first = true;
	while (std::getline(in, line)) {
		if (trim(line).empty())
			continue;
		const auto fields = split(trim(line), ',');
		if (fields.size() != 5)
			throw std::invalid_argument("report CSV: expected 5 fields per row");
		StageMetrics m;
		m.stage = static_cast<int>(parse_integer(fields[0]));
		m.mae_deg = fields[1] == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_real(fields[1]);
		m.shape_cosine = fields[2] == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_real(fields[2]);
		m.n_samples = static_cast<std::size_t>(parse_integer(fields[3]));
		if (first)
			report.regime = fields[4];
		else if (report.regime != fields[4])
			throw std::invalid_argument("report CSV: mixed regimes in one file");
		first = false;
		report.stages.push_back(m);
	}
	return report;
}

} // namespace evaluation
} // namespace morphfit
