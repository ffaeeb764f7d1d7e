/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: tools/morphfit.cpp
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
#include "morphfit/camera/camera.hpp"
#include "morphfit/core/image.hpp"
#include "morphfit/core/param_vector.hpp"
#include "morphfit/core/random.hpp"
#include "morphfit/core/text.hpp"
#include "morphfit/evaluation/evaluation.hpp"
#include "morphfit/morphablemodel/shape_model.hpp"
#include "morphfit/posit/posit.hpp"
#include "morphfit/regression/cascade.hpp"
#include "morphfit/synthetic/dataset.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include "Eigen/Core"

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef MORPHFIT_VERSION
#define MORPHFIT_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace morphfit;

namespace {

/// Bad flags or malformed user input; exit code 2.
class UsageError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
	return std::chrono::duration<double>(Clock::now() - start).count();
}

struct SeedChoice
{
	std::uint64_t value = 0;
	std::string source; // "flag", "env" or "default"
};

SeedChoice resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback)
{
	if (flag)
		return {*flag, "flag"};
	if (const char* env = std::getenv("MORPHFIT_SEED"); env && *env) {
		try {
			const auto v = parse_integer(env);
			if (v < 0)
				throw std::invalid_argument("negative");
			return {static_cast<std::uint64_t>(v), "env"};
		} catch (const std::exception&) {
			throw UsageError(std::string("MORPHFIT_SEED is not a non-negative integer: ") + env);
		}
	}
	return {fallback, "default"};
}

fs::path sibling_manifest(const fs::path& output)
{
	auto p = output;
	if (!p.has_filename())
		p = p.parent_path();
	return p.parent_path() / (p.filename().string() + ".manifest.json");
}

void write_manifest(const fs::path& path, json manifest)
{
	manifest["tool_version"] = MORPHFIT_VERSION;
	write_file_atomic(path, manifest.dump(2) + "\n");
}

json pose_json(const camera::PoseParams& p)
{
	return json{{"rx", p.rx}, {"ry", p.ry}, {"rz", p.rz}, {"tx", p.tx}, {"ty", p.ty}, {"tz", p.tz}};
}

json protocol_json(const synthetic::ProtocolConfig& pc, synthetic::Mode mode)
{
	return json{{"mode", synthetic::to_string(mode)},
	            {"range_deg", pc.range_deg},
	            {"grid_step_deg", pc.grid_step(mode)},
	            {"backgrounds", pc.backgrounds_per_pose(mode)},
	            {"translation_sigma_mm", pc.translation_sigma_mm},
	            {"tz_mm", pc.tz_mm},
	            {"focal", pc.focal},
	            {"width", pc.width},
	            {"height", pc.height},
	            {"init_perturbation_deg", pc.init_perturbation_deg},
	            {"shape_modes", pc.shape_modes},
	            {"seed", pc.seed},
	            {"texture_seed", pc.texture_seed}};
}

std::vector<double> parse_number_list(const std::string& text)
{
	std::vector<double> values;
	for (const auto& token : split(text, ',')) {
		const auto t = trim(token);
		try {
			values.push_back(parse_real(t));
		} catch (const std::exception&) {
			throw UsageError("not a number: '" + std::string(t) + "'");
		}
	}
	return values;
}

morphablemodel::ShapeModel dataset_model(const fs::path& data, const std::string& model_flag)
{
	return morphablemodel::load_model(model_flag.empty() ? data / "model.mfm" : fs::path(model_flag));
}

/// Writes a dataset into a staging directory and moves it into place.
void write_dataset_staged(const synthetic::GeneratedSet& set, const morphablemodel::ShapeModel& model,
                          const fs::path& out)
{
	fs::path target = out;
	if (!target.has_filename())
		target = target.parent_path();
	const auto staging = target.parent_path() / (target.filename().string() + ".partial");
	fs::remove_all(staging);
	synthetic::write_dataset(set, model, staging);
	if (fs::exists(target)) {
		if (!fs::is_directory(target) || (!fs::is_empty(target) && !fs::exists(target / "protocol.txt")))
			throw std::runtime_error("refusing to replace " + target.string() + ": not a dataset directory");
		fs::remove_all(target);
	}
	fs::rename(staging, target);
}

// ---------------------------------------------------------------------------------------------

struct ModelArgs
{
	std::string out;
	std::optional<std::uint64_t> seed;
	int vertices = 500;
	int modes = 10;
};

int cmd_model(const ModelArgs& a, const json& invocation)
{
	const auto start = Clock::now();
	const auto seed = resolve_seed(a.seed, 42);
	const auto model = morphablemodel::make_procedural_model(seed.value, a.vertices, a.modes);
	morphablemodel::save_model(model, a.out);
	std::cout << "model: " << model.vertex_count() << " vertices, " << model.num_modes() << " modes, "
	          << model.num_landmarks() << " landmarks -> " << a.out << "\n";
	write_manifest(sibling_manifest(a.out),
	               json{{"command", "model"},
	                    {"invocation", invocation},
	                    {"config", {{"vertices", a.vertices}, {"modes", a.modes}}},
	                    {"seeds", {{"seed", seed.value}, {"source", seed.source}}},
	                    {"inputs", json::object()},
	                    {"outputs", {{"model", a.out}}},
	                    {"timings", {{"total_s", seconds_since(start)}}}});
	return 0;
}

struct SynthArgs
{
	std::string model;
	std::string out;
	std::string mode = "train";
	double grid_step = 0.0;
	int backgrounds = 0;
	int shape_modes = 0;
	std::optional<std::uint64_t> seed;
	int jobs = 1;
};

int cmd_synth(const SynthArgs& a, const json& invocation)
{
	const auto start = Clock::now();
	synthetic::Mode mode;
	try {
		mode = synthetic::mode_from_string(a.mode);
	} catch (const std::invalid_argument& e) {
		throw UsageError(e.what());
	}
	const auto seed = resolve_seed(a.seed, 0);
	synthetic::ProtocolConfig pc;
	pc.grid_step_deg = a.grid_step;
	pc.backgrounds = a.backgrounds;
	pc.shape_modes = a.shape_modes;
	pc.seed = seed.value;
	try {
		pc.validate(mode);
	} catch (const std::invalid_argument& e) {
		throw UsageError(e.what());
	}
	const auto model = morphablemodel::load_model(a.model);
	const auto loaded = Clock::now();
	const auto set = synthetic::generate_set(model, pc, mode, a.jobs);
	const auto generated = Clock::now();
	write_dataset_staged(set, model, a.out);
	std::cout << "synth: " << set.samples.size() << " " << synthetic::to_string(mode) << " images -> " << a.out
	          << "\n";
	write_manifest(sibling_manifest(a.out),
	               json{{"command", "synth"},
	                    {"invocation", invocation},
	                    {"config", {{"protocol", protocol_json(pc, mode)}, {"jobs", a.jobs}}},
	                    {"seeds", {{"seed", seed.value}, {"source", seed.source}}},
	                    {"inputs", {{"model", a.model}}},
	                    {"outputs", {{"dataset", a.out}, {"images", set.samples.size()}}},
	                    {"timings",
	                     {{"load_s", std::chrono::duration<double>(loaded - start).count()},
	                      {"generate_s", std::chrono::duration<double>(generated - loaded).count()},
	                      {"total_s", seconds_since(start)}}}});
	return 0;
}

struct TrainArgs
{
	std::string data;
	std::string model;
	std::string out;
	int stages = 3;
	std::optional<double> lambda;
	double lambda_relative = regression::default_lambda_relative;
	int patch = regression::default_training_patch_size;
	int jobs = 1;
};

int cmd_train(const TrainArgs& a, const json& invocation)
{
	const auto start = Clock::now();
	const auto set = synthetic::read_dataset(a.data);
	const auto model = dataset_model(a.data, a.model);
	const auto loaded = Clock::now();

	regression::TrainingConfig config;
	config.stages = a.stages;
	config.lambda = a.lambda;
	config.lambda_relative = a.lambda_relative;
	config.patch_size = a.patch;
	config.jobs = a.jobs;
	const auto result = regression::train_cascade(set.samples, config, model, set.protocol.camera());
	const auto trained = Clock::now();
	regression::save_regressor(result.regressor, a.out);

	std::cout << "stage  residual               lambda\n";
	for (std::size_t n = 0; n < result.residuals.size(); ++n) {
		std::cout << std::setw(5) << n << "  " << std::setw(21) << std::left << format_real(result.residuals[n])
		          << std::right;
		if (n > 0)
			std::cout << "  " << format_real(result.lambdas[n - 1]);
		std::cout << "\n";
	}
	for (const auto& [id, stage] : result.dropped)
		std::cerr << "dropped sample " << id << " at stage " << stage << "\n";

	json residuals = json::array();
	for (double r : result.residuals)
		residuals.push_back(r);
	json lambdas = json::array();
	for (double l : result.lambdas)
		lambdas.push_back(l);
	write_manifest(sibling_manifest(a.out),
	               json{{"command", "train"},
	                    {"invocation", invocation},
	                    {"config",
	                     {{"stages", a.stages},
	                      {"lambda", a.lambda ? json(*a.lambda) : json(nullptr)},
	                      {"lambda_relative", a.lambda_relative},
	                      {"patch_size", a.patch},
	                      {"jobs", a.jobs}}},
	                    {"seeds", {{"dataset_seed", set.protocol.seed}}},
	                    {"inputs", {{"data", a.data}, {"model", a.model.empty() ? (fs::path(a.data) / "model.mfm").string() : a.model}}},
	                    {"outputs", {{"regressor", a.out}}},
	                    {"results", {{"residuals", residuals}, {"lambdas", lambdas}, {"dropped", result.dropped.size()}}},
	                    {"timings",
	                     {{"load_s", std::chrono::duration<double>(loaded - start).count()},
	                      {"train_s", std::chrono::duration<double>(trained - loaded).count()},
	                      {"total_s", seconds_since(start)}}}});
	return 0;
}

struct FitArgs
{
	std::string image;
	std::string model;
	std::string regressor;
	std::string init;
	std::optional<double> init_noise;
	std::optional<std::uint64_t> seed;
	double focal = 1500.0;
	std::string out;
};

/// Landmark CSV: one `u,v` row per model landmark, in landmark order.
std::vector<Eigen::Vector2d> read_landmark_csv(const fs::path& path)
{
	std::vector<Eigen::Vector2d> points;
	std::istringstream in(read_text_file(path));
	std::string line;
	while (std::getline(in, line)) {
		const auto t = trim(line);
		if (t.empty() || t.front() == '#')
			continue;
		const auto values = parse_number_list(std::string(t));
		if (values.size() != 2)
			throw UsageError("landmark CSV rows must be 'u,v': " + std::string(t));
		points.emplace_back(values[0], values[1]);
	}
	return points;
}

std::string trajectory_csv(const std::vector<ParamVector>& trajectory, const std::vector<std::string>& layout)
{
	std::ostringstream out;
	out << "stage";
	for (const auto& name : layout)
		out << "," << name;
	out << "\n";
	for (std::size_t n = 0; n < trajectory.size(); ++n) {
		out << n;
		for (int j = 0; j < trajectory[n].size(); ++j)
			out << "," << format_real(trajectory[n][j]);
		out << "\n";
	}
	return out.str();
}

int cmd_fit(const FitArgs& a, const json& invocation)
{
	const auto start = Clock::now();
	const auto image = read_pgm(a.image);
	const auto model = morphablemodel::load_model(a.model);
	const auto regressor = regression::load_regressor(a.regressor);
	const auto cam = camera::CameraConfig::centered(a.focal, image.width(), image.height());
	const auto loaded = Clock::now();

	const int p = regressor.param_dim();
	ParamVector init(Eigen::VectorXd::Zero(p));
	init[5] = -1200.0;
	std::string init_source = "default";
	if (!a.init.empty()) {
		if (fs::is_regular_file(a.init)) {
			const auto points2d = read_landmark_csv(a.init);
			if (static_cast<int>(points2d.size()) != model.num_landmarks())
				throw UsageError("landmark CSV has " + std::to_string(points2d.size()) + " rows, model has " +
				                 std::to_string(model.num_landmarks()) + " landmarks");
			const auto mean = morphablemodel::select_landmarks(model, Eigen::VectorXd::Zero(model.num_modes()));
			std::vector<Eigen::Vector3d> points3d;
			for (Eigen::Index j = 0; j < mean.cols(); ++j)
				points3d.push_back(mean.col(j).head<3>());
			init = ParamVector(camera::pose_from_landmarks_rough(points2d, points3d, cam),
			                   Eigen::VectorXd::Zero(p - ParamVector::num_pose_params));
			init_source = "landmarks";
		} else {
			const auto values = parse_number_list(a.init);
			if (static_cast<int>(values.size()) != p)
				throw UsageError("--init has " + std::to_string(values.size()) + " values, the regressor expects " +
				                 std::to_string(p));
			init = ParamVector(Eigen::Map<const Eigen::VectorXd>(values.data(), p));
			init_source = "inline";
		}
	}
	std::optional<SeedChoice> seed;
	if (a.init_noise) {
		if (!(*a.init_noise >= 0.0))
			throw UsageError("--init-noise must be non-negative");
		seed = resolve_seed(a.seed, 0);
		std::mt19937_64 rng(sub_seed(seed->value, "fit/init_noise"));
		std::uniform_real_distribution<double> u(-*a.init_noise, *a.init_noise);
		for (int k = 0; k < 3; ++k)
			init[k] += u(rng);
	}

	const auto fit_start = Clock::now();
	const auto result = regression::fit(image, init, regressor, model, cam);
	const double fit_s = seconds_since(fit_start);

	const auto csv = trajectory_csv(result.trajectory, regressor.layout);
	if (!a.out.empty())
		write_file_atomic(a.out, csv);
	else
		std::cout << csv;
	std::cout << "final:";
	for (int j = 0; j < p; ++j)
		std::cout << " " << regressor.layout[j] << "=" << format_real(result.theta[j]);
	std::cout << "\nfit runtime: " << std::fixed << std::setprecision(1) << fit_s * 1000.0 << " ms\n";
	std::cout.unsetf(std::ios::floatfield);

	json theta = json::array();
	for (int j = 0; j < p; ++j)
		theta.push_back(result.theta[j]);
	json initial = json::array();
	for (int j = 0; j < p; ++j)
		initial.push_back(init[j]);
	if (!a.out.empty())
		write_manifest(sibling_manifest(a.out),
		               json{{"command", "fit"},
		                    {"invocation", invocation},
		                    {"config",
		                     {{"focal", a.focal},
		                      {"init_source", init_source},
		                      {"init", initial},
		                      {"init_noise_deg", a.init_noise ? json(*a.init_noise) : json(nullptr)},
		                      {"stages", regressor.num_stages()},
		                      {"landmarks", model.num_landmarks()},
		                      {"patch_size", regressor.patch_size}}},
		                    {"seeds", seed ? json{{"seed", seed->value}, {"source", seed->source}} : json::object()},
		                    {"inputs", {{"image", a.image}, {"model", a.model}, {"regressor", a.regressor}}},
		                    {"outputs", {{"trajectory", a.out}}},
		                    {"results", {{"theta", theta}}},
		                    {"timings",
		                     {{"load_s", std::chrono::duration<double>(loaded - start).count()},
		                      {"fit_s", fit_s},
		                      {"total_s", seconds_since(start)}}},
		                    {"fit_runtime_ms", fit_s * 1000.0}});
	return 0;
}

struct EvalArgs
{
	std::string data;
	std::string model;
	std::string regressor;
	std::string out;
	std::string regime = "both";
	int jobs = 1;
};

void print_report(const evaluation::EvalReport& r)
{
	std::cout << "regime " << r.regime << " (" << r.failures << " failures)\n";
	std::cout << "stage  mae_deg     shape_cosine  n\n";
	for (const auto& s : r.stages) {
		std::cout << std::setw(5) << s.stage << "  " << std::fixed << std::setprecision(4) << std::setw(10)
		          << s.mae_deg << "  " << std::setw(12) << s.shape_cosine << "  " << s.n_samples << "\n";
		std::cout.unsetf(std::ios::floatfield);
	}
}

int cmd_eval(const EvalArgs& a, const json& invocation)
{
	const auto start = Clock::now();
	if (a.regime != "uniform" && a.regime != "fixed" && a.regime != "both")
		throw UsageError("--regime must be uniform, fixed or both");
	const auto set = synthetic::read_dataset(a.data);
	const auto model = dataset_model(a.data, a.model);
	const auto regressor = regression::load_regressor(a.regressor);
	const auto cam = set.protocol.camera();
	fs::create_directories(a.out);

	json outputs = json::object();
	json results = json::object();
	auto run = [&](const std::vector<TrainingSample>& samples, const std::string& regime, const std::string& file) {
		const auto report = evaluation::evaluate(samples, regressor, model, cam, regime, a.jobs);
		const auto path = fs::path(a.out) / file;
		write_file_atomic(path, evaluation::report_to_csv(report));
		print_report(report);
		outputs[regime] = path.string();
		results[regime] = {{"final_mae_deg", report.stages.back().mae_deg}, {"failures", report.failures}};
	};
	if (a.regime != "fixed")
		run(set.samples, "uniform", "report_uniform.csv");
	if (a.regime != "uniform") {
		if (set.fixed_inits.empty())
			throw std::runtime_error("dataset has no fixed initialisations (inits_fixed.csv); generate it in test mode");
		run(set.fixed_init_samples(), "fixed11", "report_fixed11.csv");
	}
	write_manifest(sibling_manifest(a.out),
	               json{{"command", "eval"},
	                    {"invocation", invocation},
	                    {"config", {{"regime", a.regime}, {"jobs", a.jobs}}},
	                    {"seeds", {{"dataset_seed", set.protocol.seed}}},
	                    {"inputs", {{"data", a.data}, {"regressor", a.regressor}, {"model", a.model.empty() ? (fs::path(a.data) / "model.mfm").string() : a.model}}},
	                    {"outputs", outputs},
	                    {"results", results},
	                    {"timings", {{"total_s", seconds_since(start)}}}});
	return 0;
}

struct PositArgs
{
	std::string csv;
	std::string data;
	std::string model;
	std::string out;
	double noise_px = 0.0;
	std::optional<std::uint64_t> seed;
	double focal = 1500.0;
	double cx = 320.0;
	double cy = 240.0;
	int max_iterations = 100;
	double tolerance = 1e-5;
};

posit::Correspondences read_correspondence_csv(const fs::path& path)
{
	posit::Correspondences c;
	std::istringstream in(read_text_file(path));
	std::string line;
	bool first = true;
	int row = 0;
	while (std::getline(in, line)) {
		++row;
		const auto t = trim(line);
		if (t.empty() || t.front() == '#')
			continue;
		const auto fields = split(t, ',');
		if (fields.size() != 5)
			throw UsageError("correspondence CSV line " + std::to_string(row) + ": expected u,v,X,Y,Z");
		std::vector<double> v;
		try {
			for (const auto& f : fields)
				v.push_back(parse_real(trim(f)));
		} catch (const std::exception&) {
			if (first) { // header row
				first = false;
				continue;
			}
			throw UsageError("correspondence CSV line " + std::to_string(row) + ": not a number");
		}
		first = false;
		c.points2d.emplace_back(v[0], v[1]);
		c.points3d.emplace_back(v[2], v[3], v[4]);
	}
	if (c.points2d.size() < 4)
		throw UsageError("correspondence CSV needs at least 4 rows");
	return c;
}

int cmd_posit(const PositArgs& a, const json& invocation)
{
	const auto start = Clock::now();
	if (a.csv.empty() == a.data.empty())
		throw UsageError("posit needs exactly one of --csv or --data");
	if (!(a.noise_px >= 0.0))
		throw UsageError("--noise-px must be non-negative");

	json manifest{{"command", "posit"}, {"invocation", invocation}};
	if (!a.csv.empty()) {
		auto c = read_correspondence_csv(a.csv);
		c.focal = a.focal;
		c.principal_point = Eigen::Vector2d(a.cx, a.cy);
		const auto result = posit::posit(c, a.max_iterations, a.tolerance);
		const auto pose = posit::to_pose(result);
		std::ostringstream report;
		report << "rx,ry,rz,tx,ty,tz,iterations,converged\n"
		       << format_real(pose.rx) << "," << format_real(pose.ry) << "," << format_real(pose.rz) << ","
		       << format_real(pose.tx) << "," << format_real(pose.ty) << "," << format_real(pose.tz) << ","
		       << result.iterations << "," << (result.converged ? 1 : 0) << "\n";
		if (!a.out.empty())
			write_file_atomic(a.out, report.str());
		std::cout << report.str();
		manifest["config"] = {{"focal", a.focal}, {"cx", a.cx}, {"cy", a.cy}, {"max_iterations", a.max_iterations},
		                      {"tolerance", a.tolerance}};
		manifest["seeds"] = json::object();
		manifest["inputs"] = {{"csv", a.csv}};
		manifest["results"] = {{"pose", pose_json(pose)}, {"iterations", result.iterations},
		                       {"converged", result.converged}};
	} else {
		const auto seed = resolve_seed(a.seed, 0);
		const auto set = synthetic::read_dataset(a.data);
		const auto model = dataset_model(a.data, a.model);
		const auto report =
		    evaluation::evaluate_posit(set.samples, model, set.protocol.camera(), a.noise_px, seed.value);
		std::cout << "posit: " << report.n_samples << " samples, noise " << a.noise_px << " px, MAE "
		          << format_real(report.mae_deg) << " deg, " << report.failures << " failures, "
		          << report.not_converged << " not converged\n";
		if (!a.out.empty()) {
			std::ostringstream csv;
			csv << "id,rx_gt,ry_gt,rz_gt,rx,ry,rz,tx,ty,tz\n";
			for (std::size_t i = 0; i < set.samples.size(); ++i) {
				const auto& s = set.samples[i];
				csv << s.id << "," << format_real(s.theta_gt[0]) << "," << format_real(s.theta_gt[1]) << ","
				    << format_real(s.theta_gt[2]);
				if (const auto& e = report.estimates[i])
					csv << "," << format_real(e->rx) << "," << format_real(e->ry) << "," << format_real(e->rz) << ","
					    << format_real(e->tx) << "," << format_real(e->ty) << "," << format_real(e->tz);
				else
					csv << ",nan,nan,nan,nan,nan,nan";
				csv << "\n";
			}
			write_file_atomic(a.out, csv.str());
		}
		manifest["config"] = {{"noise_px", a.noise_px}};
		manifest["seeds"] = {{"seed", seed.value}, {"source", seed.source}, {"dataset_seed", set.protocol.seed}};
		manifest["inputs"] = {{"data", a.data}};
		manifest["results"] = {{"mae_deg", report.mae_deg},
		                       {"n_samples", report.n_samples},
		                       {"failures", report.failures},
		                       {"not_converged", report.not_converged}};
	}
	manifest["outputs"] = a.out.empty() ? json::object() : json{{"report", a.out}};
	manifest["timings"] = {{"total_s", seconds_since(start)}};
	if (!a.out.empty())
		write_manifest(sibling_manifest(a.out), manifest);
	return 0;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"morphfit: cascaded-regression pose and shape fitting for 3D morphable shape models"};
	app.require_subcommand(1);
	app.set_version_flag("--version", MORPHFIT_VERSION);

	json invocation = json::array();
	for (int i = 0; i < argc; ++i)
		invocation.push_back(argv[i]);

	ModelArgs model_args;
	auto* model_cmd = app.add_subcommand("model", "Generate the procedural shape model (MFM1)");
	model_cmd->add_option("--out", model_args.out, "Output model file")->required();
	model_cmd->add_option("--seed", model_args.seed, "Model seed (default: MORPHFIT_SEED, else 42)");
	model_cmd->add_option("--vertices", model_args.vertices, "Vertex count")->check(CLI::Range(20, 1000000));
	model_cmd->add_option("--modes", model_args.modes, "Number of deformation modes")->check(CLI::Range(0, 100));

	SynthArgs synth_args;
	auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic training or test set");
	synth_cmd->add_option("--model", synth_args.model, "Model file (MFM1)")->required();
	synth_cmd->add_option("--out", synth_args.out, "Output dataset directory")->required();
	synth_cmd->add_option("--mode", synth_args.mode, "train or test")->check(CLI::IsMember({"train", "test"}));
	synth_cmd->add_option("--grid-step", synth_args.grid_step, "Pose grid step in degrees (default: 10 train, 5 test)")
	    ->check(CLI::NonNegativeNumber);
	synth_cmd->add_option("--backgrounds", synth_args.backgrounds, "Backgrounds per pose (default: 5 train, 1 test)")
	    ->check(CLI::NonNegativeNumber);
	synth_cmd->add_option("--shape-modes", synth_args.shape_modes, "Number of varied shape coefficients")
	    ->check(CLI::NonNegativeNumber);
	synth_cmd->add_option("--seed", synth_args.seed, "Dataset seed (default: MORPHFIT_SEED, else 0)");
	synth_cmd->add_option("--jobs", synth_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

	TrainArgs train_args;
	auto* train_cmd = app.add_subcommand("train", "Train the regressor cascade (MFR1)");
	train_cmd->add_option("--data", train_args.data, "Training dataset directory")->required();
	train_cmd->add_option("--model", train_args.model, "Model file (default: <data>/model.mfm)");
	train_cmd->add_option("--out", train_args.out, "Output regressor file")->required();
	train_cmd->add_option("--stages", train_args.stages, "Number of cascade stages")->check(CLI::Range(1, 100));
	auto* lambda_opt =
	    train_cmd->add_option("--lambda", train_args.lambda, "Absolute ridge weight")->check(CLI::NonNegativeNumber);
	train_cmd
	    ->add_option("--lambda-rel", train_args.lambda_relative,
	                 "Ridge weight relative to trace(Fc^T Fc)/F per stage")
	    ->check(CLI::NonNegativeNumber)
	    ->excludes(lambda_opt);
	train_cmd->add_option("--patch", train_args.patch, "Descriptor window in pixels (multiple of 4)")
	    ->check(CLI::PositiveNumber);
	train_cmd->add_option("--jobs", train_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

	FitArgs fit_args;
	auto* fit_cmd = app.add_subcommand("fit", "Fit one image");
	fit_cmd->add_option("--image", fit_args.image, "Input image (binary PGM)")->required();
	fit_cmd->add_option("--model", fit_args.model, "Model file (MFM1)")->required();
	fit_cmd->add_option("--regressor", fit_args.regressor, "Regressor file (MFR1)")->required();
	fit_cmd->add_option("--init", fit_args.init,
	                    "Initial theta as comma-separated values, or a u,v landmark CSV for a rough pose");
	fit_cmd->add_option("--init-noise", fit_args.init_noise,
	                    "Perturb the initial angles uniformly by up to this many degrees");
	fit_cmd->add_option("--seed", fit_args.seed, "Seed for --init-noise (default: MORPHFIT_SEED, else 0)");
	fit_cmd->add_option("--focal", fit_args.focal, "Focal length in pixels")->check(CLI::PositiveNumber);
	fit_cmd->add_option("--out", fit_args.out, "Trajectory CSV (default: stdout)");

	EvalArgs eval_args;
	auto* eval_cmd = app.add_subcommand("eval", "Evaluate a regressor on a test set");
	eval_cmd->add_option("--data", eval_args.data, "Test dataset directory")->required();
	eval_cmd->add_option("--model", eval_args.model, "Model file (default: <data>/model.mfm)");
	eval_cmd->add_option("--regressor", eval_args.regressor, "Regressor file (MFR1)")->required();
	eval_cmd->add_option("--out", eval_args.out, "Output directory for report CSVs")->required();
	eval_cmd->add_option("--regime", eval_args.regime, "uniform, fixed or both");
	eval_cmd->add_option("--jobs", eval_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

	PositArgs posit_args;
	auto* posit_cmd = app.add_subcommand("posit", "POSIT baseline from 2D-3D correspondences");
	posit_cmd->add_option("--csv", posit_args.csv, "Correspondences, one u,v,X,Y,Z row each");
	posit_cmd->add_option("--data", posit_args.data, "Dataset directory (ground-truth landmarks)");
	posit_cmd->add_option("--model", posit_args.model, "Model file (default: <data>/model.mfm)");
	posit_cmd->add_option("--noise-px", posit_args.noise_px, "Gaussian noise on the 2D points (dataset mode)");
	posit_cmd->add_option("--seed", posit_args.seed, "Noise seed (default: MORPHFIT_SEED, else 0)");
	posit_cmd->add_option("--focal", posit_args.focal, "Focal length in pixels (CSV mode)")
	    ->check(CLI::PositiveNumber);
	posit_cmd->add_option("--cx", posit_args.cx, "Principal point x (CSV mode)");
	posit_cmd->add_option("--cy", posit_args.cy, "Principal point y (CSV mode)");
	posit_cmd->add_option("--max-iters", posit_args.max_iterations, "Iteration limit")->check(CLI::PositiveNumber);
	posit_cmd->add_option("--tol", posit_args.tolerance, "Convergence tolerance in pixels-normalised units")
	    ->check(CLI::PositiveNumber);
	posit_cmd->add_option("--out", posit_args.out, "Output CSV");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		const int code = app.exit(e);
		return code == 0 ? 0 : 2;
	}

	try {
		if (*model_cmd)
			return cmd_model(model_args, invocation);
		if (*synth_cmd)
			return cmd_synth(synth_args, invocation);
		if (*train_cmd)
			return cmd_train(train_args, invocation);
		if (*fit_cmd)
			return cmd_fit(fit_args, invocation);
		if (*eval_cmd)
			return cmd_eval(eval_args, invocation);
		if (*posit_cmd)
			return cmd_posit(posit_args, invocation);
	} catch (const UsageError& e) {
		std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
		return 2;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << "\n";
		return 1;
	}
	return 2;
}
