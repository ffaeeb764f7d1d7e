/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: tests/test_evaluation.cpp
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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "morphfit/evaluation/evaluation.hpp"
#include "morphfit/synthetic/dataset.hpp"

#include <cmath>
#include <random>

using namespace morphfit;
using namespace morphfit::evaluation;

namespace {

ParamVector angles(double rx, double ry, double rz)
{
	return ParamVector(camera::PoseParams{rx, ry, rz, 0, 0, -1200}, Eigen::VectorXd());
}

} // namespace

TEST_CASE("mae_angles hand values")
{
	const std::vector<ParamVector> gt{angles(0, 0, 0)};
	CHECK(mae_angles(gt, gt) == 0.0);
	CHECK(mae_angles(std::vector<ParamVector>{angles(3, 0, 0)}, gt) == doctest::Approx(1.0));
	const std::vector<ParamVector> pred2{angles(3, 0, 0), angles(0, 3, 0)};
	const std::vector<ParamVector> gt2{angles(0, 0, 0), angles(0, 0, 0)};
	CHECK(mae_angles(pred2, gt2) == doctest::Approx(1.0));
	CHECK_THROWS_AS(mae_angles(std::vector<ParamVector>{}, std::vector<ParamVector>{}), std::invalid_argument);
	CHECK_THROWS_AS(mae_angles(pred2, gt), std::invalid_argument);
}

TEST_CASE("mae_angles is symmetric, non-negative and ignores translation and shape")
{
	std::mt19937_64 rng(2);
	std::uniform_real_distribution<double> u(-40, 40);
	std::vector<ParamVector> a, b;
	for (int i = 0; i < 20; ++i) {
		a.push_back(angles(u(rng), u(rng), u(rng)));
		b.push_back(angles(u(rng), u(rng), u(rng)));
	}
	CHECK(mae_angles(a, b) == mae_angles(b, a));
	CHECK(mae_angles(a, b) > 0.0);
	auto moved = a;
	for (auto& p : moved)
		p[3] += 5.0;
	CHECK(mae_angles(moved, a) == 0.0);
}

TEST_CASE("shape_cosine hand values and scale invariance")
{
	CHECK(shape_cosine(Eigen::Vector2d(1, 2), Eigen::Vector2d(1, 2)) == doctest::Approx(1.0));
	CHECK(shape_cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 0.0);
	CHECK(shape_cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)) == doctest::Approx(1.0 / std::sqrt(2.0)));
	const Eigen::Vector3d a(0.3, -1.2, 0.7), b(1.1, 0.4, -0.2);
	CHECK(shape_cosine(a, b) == shape_cosine(2.0 * a, b));
	CHECK(shape_cosine(a, b) == shape_cosine(a, 0.5 * b));
	CHECK_THROWS_AS(shape_cosine(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 0)), std::invalid_argument);
	CHECK_THROWS_AS(shape_cosine(Eigen::Vector2d(1, 0), Eigen::Vector3d(1, 0, 0)), std::invalid_argument);
}

TEST_CASE("evaluate and the report format")
{
	const auto model = morphablemodel::make_procedural_model(42, 300, 4);
	synthetic::ProtocolConfig pc;
	pc.range_deg = 5.0;
	pc.grid_step_deg = 5.0;
	pc.shape_modes = 2;
	pc.seed = 6;
	const auto set = synthetic::generate_set(model, pc, synthetic::Mode::test, 2);
	const auto cam = set.protocol.camera();

	SUBCASE("a zero-stage cascade reports the initialisation error")
	{
		regression::CascadeRegressor empty;
		empty.layout = param_layout(2);
		empty.feature_dim = model.num_landmarks() * features::descriptor_size;
		empty.scale = regression::ParamScale::identity(8);
		const auto report = evaluate(set.samples, empty, model, cam, "uniform");
		REQUIRE(report.stages.size() == 1);
		std::vector<ParamVector> init, gt;
		for (const auto& s : set.samples) {
			init.push_back(s.theta_init);
			gt.push_back(s.theta_gt);
		}
		CHECK(report.stages[0].mae_deg == mae_angles(init, gt));
		CHECK(report.stages[0].n_samples == set.samples.size());
		// The mean face has no direction, so the stage-0 cosine is undefined.
		CHECK(std::isnan(report.stages[0].shape_cosine));
	}

	SUBCASE("trained cascade: one row per stage, CSV round-trip, job-count independence")
	{
		regression::TrainingConfig config;
		config.stages = 2;
		const auto trained = regression::train_cascade(set.samples, config, model, cam);
		const auto report = evaluate(set.samples, trained.regressor, model, cam, "uniform", 1);
		REQUIRE(report.stages.size() == 3);
		CHECK(report.failures == 0);
		CHECK(report.stages[2].mae_deg < report.stages[0].mae_deg);
		CHECK_FALSE(std::isnan(report.stages[2].shape_cosine));

		const auto csv = report_to_csv(report);
		CHECK(csv.rfind("stage,mae_deg,shape_cosine,n_samples,regime\n", 0) == 0);
		const auto back = report_from_csv(csv);
		CHECK(report_to_csv(back) == csv);
		CHECK(back.stages[1].mae_deg == report.stages[1].mae_deg);
		CHECK(std::isnan(back.stages[0].shape_cosine));
		CHECK(report_to_csv(evaluate(set.samples, trained.regressor, model, cam, "uniform", 3)) == csv);
	}

	SUBCASE("per-sample failures are counted, not fatal")
	{
		regression::TrainingConfig config;
		config.stages = 1;
		const auto trained = regression::train_cascade(set.samples, config, model, cam);
		auto samples = set.samples;
		samples[0].theta_init[5] = 5000.0;
		const auto report = evaluate(samples, trained.regressor, model, cam, "uniform");
		CHECK(report.failures == 1);
		CHECK(report.stages[0].n_samples == samples.size() - 1);
	}
}

TEST_CASE("report CSV parser rejects malformed input")
{
	CHECK_THROWS(report_from_csv("stage,mae\n0,1\n"));
	CHECK_THROWS(report_from_csv("stage,mae_deg,shape_cosine,n_samples,regime\n0,abc,nan,3,uniform\n"));
}

TEST_CASE("POSIT over a set: exact landmarks are recovered, noise degrades")
{
	const auto model = morphablemodel::make_procedural_model(42, 500, 4);
	synthetic::ProtocolConfig pc;
	pc.range_deg = 30.0;
	pc.grid_step_deg = 15.0;
	pc.seed = 8;
	const auto set = synthetic::generate_set(model, pc, synthetic::Mode::test, 2);
	const auto cam = set.protocol.camera();
	const auto exact = evaluate_posit(set.samples, model, cam, 0.0, 1);
	CHECK(exact.n_samples == set.samples.size());
	CHECK(exact.failures == 0);
	CHECK(exact.mae_deg < 1e-3);
	const auto noisy = evaluate_posit(set.samples, model, cam, 5.0, 1);
	CHECK(noisy.mae_deg > exact.mae_deg);
	CHECK(evaluate_posit(set.samples, model, cam, 5.0, 1).mae_deg == noisy.mae_deg);
	CHECK(evaluate_posit(set.samples, model, cam, 5.0, 2).mae_deg != noisy.mae_deg);
}
