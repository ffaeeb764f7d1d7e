/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: tests/test_cli.cpp
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

#include "test_support.hpp"

#include "morphfit/core/image.hpp"
#include "morphfit/core/text.hpp"
#include "morphfit/evaluation/evaluation.hpp"
#include "morphfit/regression/cascade.hpp"
#include "morphfit/synthetic/dataset.hpp"

#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace morphfit;
namespace fs = std::filesystem;

namespace {

struct Run
{
	int exit_code;
	std::string output;
};

Run run(const std::string& args, const std::string& env = "")
{
	const std::string cmd = env + " \"" MORPHFIT_CLI "\" " + args + " 2>&1";
	FILE* pipe = popen(cmd.c_str(), "r");
	REQUIRE(pipe != nullptr);
	std::string out;
	char buffer[4096];
	while (const auto n = fread(buffer, 1, sizeof buffer, pipe))
		out.append(buffer, n);
	const int status = pclose(pipe);
	return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

} // namespace

TEST_CASE("usage errors exit with 2")
{
	CHECK(run("").exit_code == 2);
	CHECK(run("frobnicate").exit_code == 2);
	const auto missing = run("synth --out /tmp/nowhere");
	CHECK(missing.exit_code == 2);
	CHECK(missing.output.find("--model") != std::string::npos);
	CHECK(run("synth --model m.mfm --out x --mode validation").exit_code == 2);
	CHECK(run("train --data d --out r.mfr --lambda 1 --lambda-rel 2").exit_code == 2);
	CHECK(run("--help").exit_code == 0);
}

TEST_CASE("runtime failures exit with 1")
{
	const auto dir = test::scratch_dir("cli_fail");
	CHECK(run("train --data " + q(dir / "absent") + " --out " + q(dir / "r.mfr")).exit_code == 1);
}

TEST_CASE("posit from a correspondence CSV")
{
	const auto dir = test::scratch_dir("cli_posit");
	const auto model = morphablemodel::make_procedural_model(42, 500, 2);
	const auto lm = morphablemodel::select_landmarks(model, Eigen::VectorXd::Zero(2));
	const camera::PoseParams pose{10, -20, 0, 0, 0, -1200};
	const auto projected = camera::project_points(lm, pose, camera::CameraConfig{});
	std::ostringstream csv;
	csv << "u,v,X,Y,Z\n";
	for (Eigen::Index j = 0; j < lm.cols(); ++j)
		csv << format_real(projected[j]->x()) << "," << format_real(projected[j]->y()) << "," << format_real(lm(0, j))
		    << "," << format_real(lm(1, j)) << "," << format_real(lm(2, j)) << "\n";
	write_file_atomic(dir / "c.csv", csv.str());
	const auto ok = run("posit --csv " + q(dir / "c.csv") + " --out " + q(dir / "pose.csv"));
	REQUIRE(ok.exit_code == 0);
	const auto rows = split(std::string(trim(read_text_file(dir / "pose.csv"))), '\n');
	REQUIRE(rows.size() == 2);
	const auto fields = split(rows[1], ',');
	CHECK(parse_real(fields[0]) == doctest::Approx(10.0).epsilon(1e-5));
	CHECK(parse_real(fields[1]) == doctest::Approx(-20.0).epsilon(1e-5));
	CHECK(fs::exists(dir / "pose.csv.manifest.json"));

	write_file_atomic(dir / "bad.csv", "u,v,X,Y,Z\n1,2,3,4\n");
	CHECK(run("posit --csv " + q(dir / "bad.csv")).exit_code == 2);
	write_file_atomic(dir / "bad2.csv", "1,2,3,4,5\n1,2,3,x,5\n");
	CHECK(run("posit --csv " + q(dir / "bad2.csv")).exit_code == 2);
}

TEST_CASE("pipeline: model, synth, train, fit, eval, posit")
{
	const auto dir = test::scratch_dir("cli_pipeline");
	const auto model_path = dir / "m.mfm";
	REQUIRE(run("model --out " + q(model_path) + " --vertices 300 --modes 4").exit_code == 0);
	const auto model = morphablemodel::load_model(model_path);
	CHECK(model == morphablemodel::make_procedural_model(42, 300, 4));

	// Small grids keep the test quick: 3 x 3 poses.
	REQUIRE(run("synth --model " + q(model_path) + " --out " + q(dir / "train") +
	            " --grid-step 15 --backgrounds 2 --seed 1 --jobs 2")
	            .exit_code == 0);
	CHECK(synthetic::read_dataset(dir / "train").samples.size() == 50);
	const auto test_run = run("synth --model " + q(model_path) + " --out " + q(dir / "test") +
	                          " --mode test --grid-step 15", "MORPHFIT_SEED=2");
	REQUIRE(test_run.exit_code == 0);
	const auto test_set = synthetic::read_dataset(dir / "test");
	CHECK(test_set.samples.size() == 25);
	CHECK(test_set.protocol.seed == 2);
	CHECK(fs::exists(dir / "test" / "inits_fixed.csv"));
	const auto synth_manifest = nlohmann::json::parse(read_text_file(dir / "test.manifest.json"));
	CHECK(synth_manifest["seeds"]["source"] == "env");

	SUBCASE("flag and environment seeds agree")
	{
		REQUIRE(run("synth --model " + q(model_path) + " --out " + q(dir / "test_flag") +
		            " --mode test --grid-step 15 --seed 2")
		            .exit_code == 0);
		CHECK(read_text_file(dir / "test_flag" / "labels.csv") == read_text_file(dir / "test" / "labels.csv"));
		CHECK(read_text_file(dir / "test_flag" / "images" / "00007.pgm") ==
		      read_text_file(dir / "test" / "images" / "00007.pgm"));
	}

	SUBCASE("single-stage training writes a one-stage regressor and a residual table")
	{
		const auto out = run("train --data " + q(dir / "train") + " --out " + q(dir / "r1.mfr") + " --stages 1");
		REQUIRE(out.exit_code == 0);
		CHECK(read_text_file(dir / "r1.mfr").find("\nstages 1\n") != std::string::npos);
		CHECK(out.output.find("residual") != std::string::npos);
	}

	const auto trained = run("train --data " + q(dir / "train") + " --out " + q(dir / "r.mfr") + " --jobs 2");
	REQUIRE(trained.exit_code == 0);
	{
		std::istringstream table(trained.output);
		std::string line;
		std::getline(table, line);
		double previous = 1e300;
		int rows = 0;
		while (std::getline(table, line)) {
			const auto t = split_whitespace(line);
			if (t.size() < 2)
				continue;
			const double residual = parse_real(t[1]);
			CHECK(residual <= previous);
			previous = residual;
			++rows;
		}
		CHECK(rows == 4);
	}
	const auto regressor = regression::load_regressor(dir / "r.mfr");

	SUBCASE("fit is a thin wrapper over the library call")
	{
		const auto& s = test_set.samples[7];
		std::ostringstream init;
		for (int j = 0; j < s.theta_init.size(); ++j)
			init << (j ? "," : "") << format_real(s.theta_init[j]);
		const auto image = dir / "test" / "images" / (s.id + ".pgm");
		const auto fitted = run("fit --image " + q(image) + " --model " + q(model_path) + " --regressor " +
		                        q(dir / "r.mfr") + " --init " + init.str() + " --out " + q(dir / "fit.csv"));
		REQUIRE(fitted.exit_code == 0);
		CHECK(fitted.output.find("fit runtime") != std::string::npos);
		const auto expected = regression::fit(read_pgm(image), s.theta_init, regressor, model,
		                                      camera::CameraConfig::centered(1500.0, 640, 480));
		const auto rows = split(std::string(trim(read_text_file(dir / "fit.csv"))), '\n');
		REQUIRE(rows.size() == 5); // header and stages 0..3
		const auto last = split(rows.back(), ',');
		REQUIRE(last.size() == 7);
		for (int j = 0; j < 6; ++j)
			CHECK(parse_real(last[j + 1]) == expected.theta[j]);
		const auto manifest = nlohmann::json::parse(read_text_file(dir / "fit.csv.manifest.json"));
		CHECK(manifest["fit_runtime_ms"].get<double>() > 0.0);
		CHECK(manifest["command"] == "fit");

		CHECK(run("fit --image " + q(image) + " --model " + q(model_path) + " --regressor " + q(dir / "r.mfr") +
		          " --init 1,2,3")
		          .exit_code == 2);
		CHECK(run("fit --image " + q(image) + " --model " + q(model_path) + " --regressor " + q(dir / "r.mfr") +
		          " --init 1,2,3,4,5,abc")
		          .exit_code == 2);
	}

	SUBCASE("fit from a landmark CSV and from a noisy initialisation")
	{
		const auto& s = test_set.samples[12];
		const auto image = dir / "test" / "images" / (s.id + ".pgm");
		const auto projected = camera::project_points(
		    morphablemodel::select_landmarks(model, Eigen::VectorXd::Zero(4)), s.theta_gt.pose(),
		    camera::CameraConfig{});
		std::ostringstream csv;
		for (const auto& p : projected)
			csv << format_real(p->x()) << "," << format_real(p->y()) << "\n";
		write_file_atomic(dir / "lm.csv", csv.str());
		CHECK(run("fit --image " + q(image) + " --model " + q(model_path) + " --regressor " + q(dir / "r.mfr") +
		          " --init " + q(dir / "lm.csv"))
		          .exit_code == 0);
		write_file_atomic(dir / "lm_short.csv", "1,2\n3,4\n5,6\n7,8\n");
		CHECK(run("fit --image " + q(image) + " --model " + q(model_path) + " --regressor " + q(dir / "r.mfr") +
		          " --init " + q(dir / "lm_short.csv"))
		          .exit_code == 2);
		const auto a = run("fit --image " + q(image) + " --model " + q(model_path) + " --regressor " +
		                   q(dir / "r.mfr") + " --init-noise 11 --seed 5 --out " + q(dir / "n1.csv"));
		const auto b = run("fit --image " + q(image) + " --model " + q(model_path) + " --regressor " +
		                   q(dir / "r.mfr") + " --init-noise 11 --seed 5 --out " + q(dir / "n2.csv"));
		REQUIRE(a.exit_code == 0);
		REQUIRE(b.exit_code == 0);
		CHECK(read_text_file(dir / "n1.csv") == read_text_file(dir / "n2.csv"));
	}

	SUBCASE("eval writes both regimes and matches the library")
	{
		const auto out = run("eval --data " + q(dir / "test") + " --regressor " + q(dir / "r.mfr") + " --out " +
		                     q(dir / "reports") + " --regime both");
		REQUIRE(out.exit_code == 0);
		const auto cam = test_set.protocol.camera();
		const auto uniform = evaluation::evaluate(test_set.samples, regressor, model, cam, "uniform");
		const auto fixed = evaluation::evaluate(test_set.fixed_init_samples(), regressor, model, cam, "fixed11");
		CHECK(read_text_file(dir / "reports" / "report_uniform.csv") == evaluation::report_to_csv(uniform));
		CHECK(read_text_file(dir / "reports" / "report_fixed11.csv") == evaluation::report_to_csv(fixed));
		CHECK(run("eval --data " + q(dir / "test") + " --regressor " + q(dir / "r.mfr") + " --out " +
		          q(dir / "reports2") + " --regime sideways")
		          .exit_code == 2);
		CHECK(run("eval --data " + q(dir / "train") + " --regressor " + q(dir / "r.mfr") + " --out " +
		          q(dir / "reports3") + " --regime fixed")
		          .exit_code == 1);
	}

	SUBCASE("posit over a dataset")
	{
		const auto exact = run("posit --data " + q(dir / "test") + " --out " + q(dir / "posit.csv"));
		REQUIRE(exact.exit_code == 0);
		CHECK(exact.output.find("MAE") != std::string::npos);
		const auto manifest = nlohmann::json::parse(read_text_file(dir / "posit.csv.manifest.json"));
		CHECK(manifest["results"]["mae_deg"].get<double>() < 1e-3);
		const auto noisy = run("posit --data " + q(dir / "test") + " --noise-px 5 --out " + q(dir / "posit5.csv"));
		REQUIRE(noisy.exit_code == 0);
		const auto noisy_manifest = nlohmann::json::parse(read_text_file(dir / "posit5.csv.manifest.json"));
		CHECK(noisy_manifest["results"]["mae_deg"].get<double>() > manifest["results"]["mae_deg"].get<double>());
	}
}
