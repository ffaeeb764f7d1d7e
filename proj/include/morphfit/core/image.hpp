/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/core/image.hpp
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

#ifndef MORPHFIT_CORE_IMAGE_HPP
#define MORPHFIT_CORE_IMAGE_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace morphfit {

/**
 * A single-channel image with intensities in [0, 1], stored row-major.
 *
 * Pixel (x, y) is the sample at column x and row y, with y growing downwards.
 * Any value written is clamped to [0, 1].
 */
class GrayImage
{
public:
	GrayImage() = default;
	GrayImage(int width, int height, double fill = 0.0);
	GrayImage(int width, int height, std::vector<double> pixels);

	int width() const noexcept { return width_; };
	int height() const noexcept { return height_; };
	bool empty() const noexcept { return pixels_.empty(); };

	double operator()(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; };
	void set(int x, int y, double value);

	/// Zero-padded access: reads outside the raster return 0.
	double at_padded(int x, int y) const noexcept
	{
		if (x < 0 || y < 0 || x >= width_ || y >= height_)
			return 0.0;
		return (*this)(x, y);
	};

	std::span<const double> pixels() const noexcept { return pixels_; };

	friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
	int width_ = 0;
	int height_ = 0;
	std::vector<double> pixels_;
};

/// Rounds every pixel to the nearest multiple of 1/255, the precision of an 8-bit PGM.
GrayImage quantize_8bit(const GrayImage& image);

/**
 * Reads a binary (P5) PGM with maxval <= 255. Values are mapped linearly to [0, 1].
 * Throws std::runtime_error on malformed files.
 */
GrayImage read_pgm(const std::filesystem::path& filename);

/// Writes a binary (P5) PGM with maxval 255.
void write_pgm(const GrayImage& image, const std::filesystem::path& filename);

std::string encode_pgm(const GrayImage& image);
GrayImage decode_pgm(const std::string& bytes);

} // namespace morphfit

#endif /* MORPHFIT_CORE_IMAGE_HPP */
