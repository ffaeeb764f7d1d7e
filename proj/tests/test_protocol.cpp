/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: tests/test_protocol.cpp
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

#include "morphfit/regression/cascade.hpp"
#include "morphfit/synthetic/dataset.hpp"

#include <cmath>
#include <thread>

using namespace morphfit;

// Full-size training protocol: 49 poses x 5 backgrounds on the 500-vertex model.
TEST_CASE("training protocol at full size")
{
	const auto model = morphablemodel::make_procedural_model(42, 500, 10);
	synthetic::ProtocolConfig pc;
	pc.seed = 1;
	const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
	const auto set = synthetic::generate_set(model, pc, synthetic::Mode::train, jobs);
	REQUIRE(set.samples.size() == 245);
	for (const auto& s : set.samples) {
		CHECK((s.theta_init.angles() - s.theta_gt.angles()).cwiseAbs().maxCoeff() <= 11.0);
		CHECK(s.theta_gt[2] == 0.0);
		CHECK(s.theta_gt[5] == -1200.0);
		CHECK(s.theta_init[3] == 0.0);
		CHECK(s.theta_init[4] == 0.0);
	}

	const auto cam = set.protocol.camera();
	regression::TrainingConfig config;
	config.jobs = jobs;
	const auto result = regression::train_cascade(set.samples, config, model, cam);
	REQUIRE(result.residuals.size() == 4);
	CHECK(result.dropped.empty());
	for (std::size_t n = 1; n < result.residuals.size(); ++n)
		CHECK(result.residuals[n] <= result.residuals[n - 1]);

	SUBCASE("one stage from the ground truth stays within the stage-1 training residual")
	{
		const auto& scale = result.regressor.scale;
		double sum = 0.0;
		for (const auto& s : set.samples) {
			const auto fitted = regression::fit(*s.image, s.theta_gt, result.regressor, model, cam);
			sum += (fitted.trajectory[1].values() - s.theta_gt.values()).cwiseQuotient(scale.stddev).squaredNorm();
		}
		const double mse = sum / (6.0 * static_cast<double>(set.samples.size()));
		MESSAGE("stage-1 error from the ground truth " << mse << ", training residual " << result.residuals[1]);
		CHECK(mse <= result.residuals[1]);
	}
}

TEST_CASE("test protocol at full size")
{
	const auto model = morphablemodel::make_procedural_model(42, 500, 10);
	synthetic::ProtocolConfig pc;
	pc.seed = 2;
	const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
	const auto set = synthetic::generate_set(model, pc, synthetic::Mode::test, jobs);
	REQUIRE(set.samples.size() == 169);
	REQUIRE(set.fixed_inits.size() == 169);
	for (std::size_t i = 0; i < set.samples.size(); ++i) {
		const auto& s = set.samples[i];
		CHECK((s.theta_init.angles() - s.theta_gt.angles()).cwiseAbs().maxCoeff() <= 11.0);
		const Eigen::Vector3d off = set.fixed_inits[i].angles() - s.theta_gt.angles();
		for (int k = 0; k < 3; ++k)
			CHECK(std::abs(std::abs(off(k)) - 11.0) <= 1e-12);
	}
}
