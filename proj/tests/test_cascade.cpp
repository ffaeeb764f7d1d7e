/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: tests/test_cascade.cpp
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

#include "oracles.hpp"
#include "test_support.hpp"

#include "morphfit/regression/cascade.hpp"
#include "morphfit/synthetic/dataset.hpp"


#include <cmath>
#include <random>

using namespace morphfit;
using namespace morphfit::regression;

namespace {

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols)
{
	std::normal_distribution<double> n(0.0, 1.0);
	Eigen::MatrixXd m(rows, cols);
	for (Eigen::Index i = 0; i < m.size(); ++i)
		m.data()[i] = n(rng);
	return m;
}

synthetic::GeneratedSet small_set(const morphablemodel::ShapeModel& model, synthetic::Mode mode, int shape_modes = 0)
{
	synthetic::ProtocolConfig pc;
	pc.range_deg = 10.0;
	pc.grid_step_deg = 10.0;
	pc.backgrounds = 2;
	pc.shape_modes = shape_modes;
	pc.seed = 5;
	return synthetic::generate_set(model, pc, mode, 4);
}

} // namespace

TEST_CASE("train_stage recovers an exactly linear map with lambda 0")
{
	std::mt19937_64 rng(1);
	const Eigen::MatrixXd X = gaussian(rng, 40, 6);
	const Eigen::MatrixXd A = gaussian(rng, 3, 6);
	const Eigen::VectorXd b = gaussian(rng, 3, 1);
	const Eigen::MatrixXd Y = (X * A.transpose()).rowwise() + b.transpose();
	const auto stage = train_stage(X, Y, 0.0);
	CHECK((stage.A - A).cwiseAbs().maxCoeff() < 1e-9);
	CHECK((stage.b - b).cwiseAbs().maxCoeff() < 1e-9);
	const Eigen::MatrixXd residual = (X * stage.A.transpose()).rowwise() + stage.b.transpose() - Y;
	CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("train_stage with huge lambda: A vanishes and b is the target mean")
{
	std::mt19937_64 rng(2);
	const Eigen::MatrixXd X = gaussian(rng, 30, 5);
	const Eigen::MatrixXd Y = gaussian(rng, 30, 2);
	const auto stage = train_stage(X, Y, 1e12 * relative_lambda(X, 1.0));
	CHECK(stage.A.cwiseAbs().maxCoeff() < 1e-10);
	CHECK((stage.b - Y.colwise().mean().transpose()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("train_stage matches an iterative least-squares oracle")
{
	std::mt19937_64 rng(3);
	const Eigen::MatrixXd X = gaussian(rng, 20, 7);
	const Eigen::MatrixXd Y = gaussian(rng, 20, 3);
	const auto stage = train_stage(X, Y, 0.5);
	const auto oracle = test::ridge_by_gradient_descent(X, Y, 0.5);
	CHECK((stage.A - oracle.A).cwiseAbs().maxCoeff() <= 1e-6);
	CHECK((stage.b - oracle.b).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("train_stage with fewer samples than features matches the oracle")
{
	std::mt19937_64 rng(8);
	const Eigen::MatrixXd X = gaussian(rng, 12, 30);
	const Eigen::MatrixXd Y = gaussian(rng, 12, 2);
	const auto stage = train_stage(X, Y, 0.7);
	const auto oracle = test::ridge_by_gradient_descent(X, Y, 0.7);
	CHECK((stage.A - oracle.A).cwiseAbs().maxCoeff() <= 1e-6);
	CHECK((stage.b - oracle.b).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("train_stage handles more features than samples")
{
	std::mt19937_64 rng(4);
	const Eigen::MatrixXd X = gaussian(rng, 5, 50);
	const Eigen::MatrixXd Y = gaussian(rng, 5, 2);
	for (double lambda : {0.0, 1e-3, 10.0}) {
		const auto stage = train_stage(X, Y, lambda);
		CHECK(stage.A.allFinite());
		const Eigen::MatrixXd residual = (X * stage.A.transpose()).rowwise() + stage.b.transpose() - Y;
		const Eigen::MatrixXd centered = Y.rowwise() - Y.colwise().mean();
		CHECK(residual.squaredNorm() <= centered.squaredNorm() + 1e-12);
	}
}

TEST_CASE("train_stage rejects bad input")
{
	const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 2);
	CHECK_THROWS_AS(train_stage(X, Eigen::MatrixXd::Ones(2, 1), 0.1), std::invalid_argument);
	CHECK_THROWS_AS(train_stage(X, Eigen::MatrixXd::Ones(3, 1), -1.0), std::invalid_argument);
	Eigen::MatrixXd bad = X;
	bad(1, 1) = NAN;
	CHECK_THROWS_AS(train_stage(bad, Eigen::MatrixXd::Ones(3, 1), 0.1), std::invalid_argument);
	CHECK_THROWS_AS(train_stage(Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 1), 0.1), std::invalid_argument);
}

TEST_CASE("predict_update")
{
	std::mt19937_64 rng(5);
	ParamScale scale{gaussian(rng, 6, 1), gaussian(rng, 6, 1).cwiseAbs()};
	WeakRegressor zero{Eigen::MatrixXd::Zero(6, 10), Eigen::VectorXd::Zero(6)};
	CHECK(predict_update(zero, gaussian(rng, 10, 1), ParamScale::identity(6)).isZero(0.0));

	WeakRegressor r{gaussian(rng, 6, 10), gaussian(rng, 6, 1)};
	CHECK(predict_update(r, Eigen::VectorXd::Zero(10), scale) == scale.denormalize(r.b));

	const Eigen::VectorXd f = gaussian(rng, 10, 1);
	const auto got = predict_update(r, f, scale);
	for (int i = 0; i < 6; ++i) {
		double acc = r.b(i);
		for (int j = 0; j < 10; ++j)
			acc += r.A(i, j) * f(j);
		CHECK(std::abs(got(i) - (acc * scale.stddev(i) + scale.mean(i))) <= 1e-12);
	}
	CHECK_THROWS_AS(predict_update(r, Eigen::VectorXd::Zero(9), scale), std::invalid_argument);
}

TEST_CASE("ParamScale normalisation round-trips and guards zero spread")
{
	std::mt19937_64 rng(6);
	Eigen::MatrixXd deltas = gaussian(rng, 50, 4) * 10.0;
	deltas.col(2).setConstant(3.0);
	const auto scale = ParamScale::from_deltas(deltas);
	CHECK(scale.stddev(2) == 1.0);
	CHECK((scale.stddev.array() > 0.0).all());
	const Eigen::VectorXd v = gaussian(rng, 4, 1);
	CHECK((scale.denormalize(scale.normalize(v)) - v).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("cascade training on a small rendered set")
{
	const auto model = morphablemodel::make_procedural_model(42, 300, 4);
	const auto set = small_set(model, synthetic::Mode::train);
	const auto cam = set.protocol.camera();
	REQUIRE(set.samples.size() == 18);

	SUBCASE("one stage equals train_stage on the initial features")
	{
		TrainingConfig config;
		config.stages = 1;
		const auto result = train_cascade(set.samples, config, model, cam);
		Eigen::MatrixXd F(18, model.num_landmarks() * 128), D(18, 6);
		for (int i = 0; i < 18; ++i) {
			const auto& s = set.samples[i];
			F.row(i) = features::assemble_feature(*s.image, s.theta_init, model, cam, config.patch_size).transpose();
			D.row(i) = result.regressor.scale.normalize(s.theta_gt.values() - s.theta_init.values()).transpose();
		}
		const auto stage = train_stage(F, D, relative_lambda(F, config.lambda_relative));
		CHECK(result.regressor.num_stages() == 1);
		CHECK((result.regressor.stages[0].A - stage.A).cwiseAbs().maxCoeff() == 0.0);
		CHECK((result.regressor.stages[0].b - stage.b).cwiseAbs().maxCoeff() == 0.0);
	}

	SUBCASE("training residual never increases, whatever lambda")
	{
		for (double rel : {1e-3, 3.0, 100.0}) {
			TrainingConfig config;
			config.stages = 4;
			config.lambda_relative = rel;
			const auto result = train_cascade(set.samples, config, model, cam);
			REQUIRE(result.residuals.size() == 5);
			for (std::size_t n = 1; n < result.residuals.size(); ++n)
				CHECK(result.residuals[n] <= result.residuals[n - 1]);
		}
		// With fewer samples than features and no regularisation the first stage interpolates.
		TrainingConfig config;
		config.lambda = 0.0;
		const auto exact = train_cascade(set.samples, config, model, cam);
		CHECK(exact.residuals[1] <= 1e-20);
	}

	SUBCASE("deterministic and independent of the job count")
	{
		TrainingConfig config;
		config.jobs = 1;
		const auto a = train_cascade(set.samples, config, model, cam);
		config.jobs = 4;
		const auto b = train_cascade(set.samples, config, model, cam);
		CHECK(to_mfr(a.regressor) == to_mfr(b.regressor));
	}


	SUBCASE("fit trajectory and identity cascades")
	{
		TrainingConfig config;
		const auto result = train_cascade(set.samples, config, model, cam);
		const auto& s = set.samples[3];
		const auto fitted = fit(*s.image, s.theta_init, result.regressor, model, cam);
		REQUIRE(fitted.trajectory.size() == 4);
		CHECK(fitted.trajectory.front() == s.theta_init);
		CHECK(fitted.trajectory.back() == fitted.theta);

		auto identity = result.regressor;
		for (auto& stage : identity.stages) {
			stage.A.setZero();
			stage.b = -identity.scale.mean.cwiseQuotient(identity.scale.stddev);
		}
		CHECK(fit(*s.image, s.theta_init, identity, model, cam).theta == s.theta_init);

		auto empty = result.regressor;
		empty.stages.clear();
		CHECK(fit(*s.image, s.theta_init, empty, model, cam).theta == s.theta_init);
	}

	SUBCASE("fit reports the failing stage")
	{
		TrainingConfig config;
		config.stages = 2;
		const auto result = train_cascade(set.samples, config, model, cam);
		auto theta = set.samples[0].theta_init;
		theta[5] = 5000.0;
		try {
			fit(*set.samples[0].image, theta, result.regressor, model, cam);
			FAIL("expected FitError");
		} catch (const FitError& e) {
			CHECK(e.stage() == 1);
		}
		CHECK_THROWS_AS(fit(*set.samples[0].image, ParamVector(Eigen::VectorXd::Zero(7)), result.regressor, model, cam),
		                std::invalid_argument);
	}

	SUBCASE("samples that cannot be featurised are dropped")
	{
		auto samples = set.samples;
		samples[2].theta_init[5] = 5000.0;
		const auto result = train_cascade(samples, TrainingConfig{}, model, cam);
		REQUIRE(result.dropped.size() == 1);
		CHECK(result.dropped[0].first == samples[2].id);
		CHECK(result.dropped[0].second == 1);
		for (auto& s : samples)
			s.theta_init[5] = 5000.0;
		CHECK_THROWS_AS(train_cascade(samples, TrainingConfig{}, model, cam), std::runtime_error);
	}
}

TEST_CASE("joint shape and pose layout")
{
	const auto model = morphablemodel::make_procedural_model(42, 300, 4);
	const auto set = small_set(model, synthetic::Mode::train, 2);
	TrainingConfig config;
	config.stages = 2;
	const auto result = train_cascade(set.samples, config, model, set.protocol.camera());
	CHECK(result.regressor.param_dim() == 8);
	CHECK(result.regressor.layout == param_layout(2));
	for (std::size_t n = 1; n < result.residuals.size(); ++n)
		CHECK(result.residuals[n] <= result.residuals[n - 1]);
}

TEST_CASE("MFR round-trip is bit-exact")
{
	std::mt19937_64 rng(7);
	CascadeRegressor r;
	r.layout = param_layout(1);
	r.feature_dim = 5;
	r.patch_size = 48;
	r.scale = ParamScale{gaussian(rng, 7, 1), gaussian(rng, 7, 1).cwiseAbs()};
	for (int n = 0; n < 3; ++n)
		r.stages.push_back(WeakRegressor{gaussian(rng, 7, 5) / 3.0, gaussian(rng, 7, 1) * 1e-7});
	const auto text = to_mfr(r);
	const auto back = from_mfr(text);
	CHECK(to_mfr(back) == text);
	CHECK(back.patch_size == 48);
	CHECK(back.layout == r.layout);
	CHECK(back.scale.mean == r.scale.mean);
	CHECK(back.scale.stddev == r.scale.stddev);
	for (int n = 0; n < 3; ++n) {
		CHECK(back.stages[n].A == r.stages[n].A);
		CHECK(back.stages[n].b == r.stages[n].b);
	}
	CHECK(text.find("stages 3\n") != std::string::npos);

	const auto dir = test::scratch_dir("mfr");
	save_regressor(r, dir / "r.mfr");
	CHECK(to_mfr(load_regressor(dir / "r.mfr")) == text);

	SUBCASE("a file without the patch line uses the default window")
	{
		auto legacy = text;
		legacy.erase(legacy.find("patch 48\n"), 9);
		CHECK(from_mfr(legacy).patch_size == features::default_patch_size);
	}
	SUBCASE("unknown versions and inconsistent files are rejected")
	{
		auto v2 = text;
		v2.replace(0, 5, "MFR 2");
		CHECK_THROWS_AS(from_mfr(v2), std::invalid_argument);
		CHECK_THROWS_AS(from_mfr(text.substr(0, text.size() / 2)), std::invalid_argument);
		auto wrong = text;
		wrong.replace(wrong.find("fdim 5"), 6, "fdim 4");
		CHECK_THROWS_AS(from_mfr(wrong), std::invalid_argument);
	}
}
