/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/image.cpp
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
#include "morphfit/core/image.hpp"
#include "morphfit/core/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace morphfit {

namespace {

double clamp01(double v)
{
	if (std::isnan(v))
		return 0.0;
	return std::clamp(v, 0.0, 1.0);
}

} // namespace

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height),
      pixels_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), clamp01(fill))
{
	if (width < 1 || height < 1)
		throw std::invalid_argument("GrayImage: width and height must be at least 1");
}

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels))
{
	if (width < 1 || height < 1)
		throw std::invalid_argument("GrayImage: width and height must be at least 1");
	if (pixels_.size() != static_cast<std::size_t>(width) * height)
		throw std::invalid_argument("GrayImage: pixel count does not match width * height");
	for (auto& p : pixels_)
		p = clamp01(p);
}

void GrayImage::set(int x, int y, double value)
{
	pixels_[static_cast<std::size_t>(y) * width_ + x] = clamp01(value);
}

GrayImage quantize_8bit(const GrayImage& image)
{
	std::vector<double> q(image.pixels().begin(), image.pixels().end());
	for (auto& p : q)
		p = std::round(p * 255.0) / 255.0;
	return GrayImage(image.width(), image.height(), std::move(q));
}

std::string encode_pgm(const GrayImage& image)
{
	std::string out = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
	out.reserve(out.size() + image.pixels().size());
	for (double p : image.pixels())
		out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(p * 255.0))));
	return out;
}

GrayImage decode_pgm(const std::string& bytes)
{
	std::size_t pos = 0;
	// Reads the next whitespace-delimited header token, skipping # comments.
	auto next_token = [&]() {
		while (pos < bytes.size()) {
			if (bytes[pos] == '#') {
				while (pos < bytes.size() && bytes[pos] != '\n')
					++pos;
			} else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
				++pos;
			} else {
				break;
			}
		}
		const auto start = pos;
		while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#')
			++pos;
		if (start == pos)
			throw std::runtime_error("PGM: truncated header");
		return bytes.substr(start, pos - start);
	};

	if (next_token() != "P5")
		throw std::runtime_error("PGM: only binary P5 files are supported");
	long long width = 0, height = 0, maxval = 0;
	try {
		width = parse_integer(next_token());
		height = parse_integer(next_token());
		maxval = parse_integer(next_token());
	} catch (const std::invalid_argument&) {
		throw std::runtime_error("PGM: malformed header");
	}
	if (width < 1 || height < 1 || width > 1 << 16 || height > 1 << 16)
		throw std::runtime_error("PGM: invalid dimensions");
	if (maxval < 1 || maxval > 255)
		throw std::runtime_error("PGM: only 8-bit files (maxval <= 255) are supported");
	// Exactly one whitespace character separates the header from the raster.
	if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
		throw std::runtime_error("PGM: truncated header");
	++pos;
	const auto count = static_cast<std::size_t>(width * height);
	if (bytes.size() - pos < count)
		throw std::runtime_error("PGM: truncated raster");

	std::vector<double> pixels(count);
	for (std::size_t i = 0; i < count; ++i) {
		const auto v = static_cast<unsigned char>(bytes[pos + i]);
		if (v > maxval)
			throw std::runtime_error("PGM: sample exceeds maxval");
		pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
	}
	return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

GrayImage read_pgm(const std::filesystem::path& filename)
{
	return decode_pgm(read_text_file(filename));
}

void write_pgm(const GrayImage& image, const std::filesystem::path& filename)
{
	write_file_atomic(filename, encode_pgm(image));
}

} // namespace morphfit
