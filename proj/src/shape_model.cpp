/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/shape_model.cpp
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
#include "morphfit/morphablemodel/shape_model.hpp"
#include "morphfit/core/text.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace morphfit {
namespace morphablemodel {

ShapeModel::ShapeModel(Eigen::VectorXd mean, Eigen::MatrixXd basis, Eigen::VectorXd sigmas,
                       std::vector<int> landmark_ids, std::vector<Triangle> triangles)
    : mean_(std::move(mean)), basis_(std::move(basis)), sigmas_(std::move(sigmas)),
      landmark_ids_(std::move(landmark_ids)), triangles_(std::move(triangles))
{
	if (mean_.size() == 0 || mean_.size() % 3 != 0)
		throw std::invalid_argument("ShapeModel: mean must hold 3 * V values with V >= 1");
	if (!mean_.allFinite() || !basis_.allFinite() || !sigmas_.allFinite())
		throw std::invalid_argument("ShapeModel: non-finite values");
	if (basis_.rows() != mean_.size())
		throw std::invalid_argument("ShapeModel: basis must have 3 * V rows");
	if (sigmas_.size() != basis_.cols())
		throw std::invalid_argument("ShapeModel: need one sigma per basis column");

	const Eigen::MatrixXd gram = basis_.transpose() * basis_;
	for (Eigen::Index i = 0; i < gram.rows(); ++i) {
		if (std::abs(std::sqrt(gram(i, i)) - 1.0) > 1e-9)
			throw std::invalid_argument("ShapeModel: basis column " + std::to_string(i) + " is not unit norm");
		for (Eigen::Index j = 0; j < i; ++j) {
			if (std::abs(gram(i, j)) > 1e-9)
				throw std::invalid_argument("ShapeModel: basis columns are not orthogonal");
		}
	}
	for (Eigen::Index i = 0; i < sigmas_.size(); ++i) {
		if (!(sigmas_(i) > 0.0))
			throw std::invalid_argument("ShapeModel: sigmas must be strictly positive");
		if (i > 0 && sigmas_(i) > sigmas_(i - 1))
			throw std::invalid_argument("ShapeModel: sigmas must be non-increasing");
	}

	const int V = vertex_count();
	std::set<int> seen;
	for (const int id : landmark_ids_) {
		if (id < 0 || id >= V)
			throw std::invalid_argument("ShapeModel: landmark id out of range");
		if (!seen.insert(id).second)
			throw std::invalid_argument("ShapeModel: duplicate landmark id " + std::to_string(id));
	}
	for (const auto& tri : triangles_) {
		for (const int v : tri) {
			if (v < 0 || v >= V)
				throw std::invalid_argument("ShapeModel: triangle index out of range");
		}
	}
}

Eigen::VectorXd instance_shape(const ShapeModel& model, const ShapeCoeffs& alpha)
{
	if (alpha.size() != model.num_modes())
		throw std::invalid_argument("instance_shape: expected " + std::to_string(model.num_modes()) +
		                            " coefficients, got " + std::to_string(alpha.size()));
	return model.mean() + model.basis() * model.sigmas().cwiseProduct(alpha);
}

Eigen::Matrix4Xd select_landmarks(const ShapeModel& model, const ShapeCoeffs& alpha)
{
	if (alpha.size() != model.num_modes())
		throw std::invalid_argument("select_landmarks: expected " + std::to_string(model.num_modes()) +
		                            " coefficients, got " + std::to_string(alpha.size()));
	const Eigen::VectorXd weights = model.sigmas().cwiseProduct(alpha);
	Eigen::Matrix4Xd points(4, model.num_landmarks());
	for (int i = 0; i < model.num_landmarks(); ++i) {
		const Eigen::Index row = 3 * static_cast<Eigen::Index>(model.landmark_ids()[i]);
		points.col(i).head<3>() = model.mean().segment<3>(row) + model.basis().middleRows<3>(row) * weights;
		points(3, i) = 1.0;
	}
	return points;
}

ShapeCoeffs pad_coefficients(const ShapeModel& model, const Eigen::VectorXd& alpha)
{
	if (alpha.size() > model.num_modes())
		throw std::invalid_argument("more shape coefficients than the model has modes");
	ShapeCoeffs padded = ShapeCoeffs::Zero(model.num_modes());
	padded.head(alpha.size()) = alpha;
	return padded;
}

std::string to_mfm(const ShapeModel& model)
{
	std::ostringstream out;
	const int V = model.vertex_count();
	const int K = model.num_modes();
	out << "MFM 1\n";
	out << "vertices " << V << "\n";
	out << "modes " << K << "\n";
	out << "landmarks " << model.num_landmarks();
	for (const int id : model.landmark_ids())
		out << " " << id;
	out << "\n";
	out << "triangles " << model.triangles().size() << "\n";
	out << "mean:\n";
	for (int v = 0; v < V; ++v)
		out << format_real(model.mean()(3 * v)) << " " << format_real(model.mean()(3 * v + 1)) << " "
		    << format_real(model.mean()(3 * v + 2)) << "\n";
	out << "sigmas:\n";
	for (int k = 0; k < K; ++k)
		out << (k ? " " : "") << format_real(model.sigmas()(k));
	out << "\n";
	out << "basis:\n";
	for (Eigen::Index r = 0; r < model.basis().rows(); ++r) {
		for (int k = 0; k < K; ++k)
			out << (k ? " " : "") << format_real(model.basis()(r, k));
		out << "\n";
	}
	out << "tris:\n";
	for (const auto& t : model.triangles())
		out << t[0] << " " << t[1] << " " << t[2] << "\n";
	return out.str();
}

namespace {

class LineReader
{
public:
	explicit LineReader(const std::string& text) : in_(text) {};

	std::vector<std::string> next()
	{
		std::string line;
		if (!std::getline(in_, line))
			throw std::invalid_argument("MFM: unexpected end of file after line " + std::to_string(line_number_));
		++line_number_;
		return split_whitespace(line);
	};

	std::vector<std::string> expect(const std::string& keyword, std::size_t min_tokens)
	{
		auto tokens = next();
		if (tokens.empty() || tokens[0] != keyword || tokens.size() < min_tokens)
			throw std::invalid_argument("MFM: expected '" + keyword + "' on line " + std::to_string(line_number_));
		return tokens;
	};

	std::vector<double> reals(std::size_t count)
	{
		const auto tokens = next();
		if (tokens.size() != count)
			throw std::invalid_argument("MFM: expected " + std::to_string(count) + " values on line " +
			                            std::to_string(line_number_));
		std::vector<double> values;
		values.reserve(count);
		for (const auto& t : tokens)
			values.push_back(parse_real(t));
		return values;
	};

private:
	std::istringstream in_;
	int line_number_ = 0;
};

int parse_count(const std::string& token)
{
	const auto v = parse_integer(token);
	if (v < 0 || v > 100'000'000)
		throw std::invalid_argument("MFM: count out of range");
	return static_cast<int>(v);
}

} // namespace

ShapeModel from_mfm(const std::string& text)
{
	LineReader reader(text);
	const auto magic = reader.next();
	if (magic.size() != 2 || magic[0] != "MFM")
		throw std::invalid_argument("MFM: not a model file");
	if (magic[1] != "1")
		throw std::invalid_argument("MFM: unsupported version " + magic[1]);

	const int V = parse_count(reader.expect("vertices", 2)[1]);
	const int K = parse_count(reader.expect("modes", 2)[1]);
	const auto landmark_tokens = reader.expect("landmarks", 2);
	const int n = parse_count(landmark_tokens[1]);
	if (landmark_tokens.size() != static_cast<std::size_t>(n) + 2)
		throw std::invalid_argument("MFM: landmark count does not match the listed ids");
	std::vector<int> landmarks;
	for (int i = 0; i < n; ++i)
		landmarks.push_back(static_cast<int>(parse_integer(landmark_tokens[i + 2])));
	const int T = parse_count(reader.expect("triangles", 2)[1]);

	reader.expect("mean:", 1);
	Eigen::VectorXd mean(3 * static_cast<Eigen::Index>(V));
	for (int v = 0; v < V; ++v) {
		const auto xyz = reader.reals(3);
		mean.segment<3>(3 * v) << xyz[0], xyz[1], xyz[2];
	}
	reader.expect("sigmas:", 1);
	Eigen::VectorXd sigmas(K);
	if (K > 0) {
		const auto s = reader.reals(K);
		for (int k = 0; k < K; ++k)
			sigmas(k) = s[k];
	} else {
		reader.next();
	}
	reader.expect("basis:", 1);
	Eigen::MatrixXd basis(3 * static_cast<Eigen::Index>(V), K);
	for (Eigen::Index r = 0; r < basis.rows(); ++r) {
		if (K == 0) {
			reader.next();
			continue;
		}
		const auto row = reader.reals(K);
		for (int k = 0; k < K; ++k)
			basis(r, k) = row[k];
	}
	reader.expect("tris:", 1);
	std::vector<Triangle> triangles;
	triangles.reserve(T);
	for (int t = 0; t < T; ++t) {
		const auto tokens = reader.next();
		if (tokens.size() != 3)
			throw std::invalid_argument("MFM: triangle lines need 3 indices");
		triangles.push_back({static_cast<int>(parse_integer(tokens[0])), static_cast<int>(parse_integer(tokens[1])),
		                     static_cast<int>(parse_integer(tokens[2]))});
	}
	return ShapeModel(std::move(mean), std::move(basis), std::move(sigmas), std::move(landmarks),
	                  std::move(triangles));
}

void save_model(const ShapeModel& model, const std::filesystem::path& filename)
{
	write_file_atomic(filename, to_mfm(model));
}

ShapeModel load_model(const std::filesystem::path& filename)
{
	return from_mfm(read_text_file(filename));
}

} // namespace morphablemodel
} // namespace morphfit
