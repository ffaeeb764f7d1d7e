/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: tests/test_core.cpp
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
#include "morphfit/core/parallel.hpp"
#include "morphfit/core/param_vector.hpp"
#include "morphfit/core/random.hpp"
#include "morphfit/core/text.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

using namespace morphfit;

TEST_CASE("GrayImage clamps values and rejects empty sizes")
{
	GrayImage img(3, 2, 1.5);
	CHECK(img(2, 1) == 1.0);
	img.set(0, 0, -2.0);
	CHECK(img(0, 0) == 0.0);
	CHECK(img.at_padded(-1, 0) == 0.0);
	CHECK(img.at_padded(3, 0) == 0.0);
	CHECK_THROWS_AS(GrayImage(0, 4), std::invalid_argument);
	CHECK_THROWS_AS(GrayImage(2, 2, std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST_CASE("PGM round-trip is lossless at 8 bits")
{
	std::vector<double> px;
	for (int i = 0; i < 7 * 5; ++i)
		px.push_back((i * 37 % 256) / 255.0);
	const GrayImage img(7, 5, px);
	const auto decoded = decode_pgm(encode_pgm(img));
	CHECK(decoded == img);

	const auto dir = test::scratch_dir("pgm");
	write_pgm(img, dir / "a.pgm");
	CHECK(read_pgm(dir / "a.pgm") == img);
}

TEST_CASE("quantize_8bit is idempotent and maps to multiples of 1/255")
{
	const GrayImage img(4, 1, std::vector<double>{0.1, 0.5, 0.77, 1.0});
	const auto q = quantize_8bit(img);
	CHECK(quantize_8bit(q) == q);
	for (double v : q.pixels())
		CHECK(std::abs(v * 255.0 - std::round(v * 255.0)) < 1e-12);
}

TEST_CASE("PGM parser handles comments and rejects other formats")
{
	const std::string text = std::string("P5\n# comment\n2 1\n255\n") + char(0) + char(255);
	const auto img = decode_pgm(text);
	CHECK(img.width() == 2);
	CHECK(img(1, 0) == 1.0);
	CHECK_THROWS(decode_pgm("P2\n2 1\n255\n0 0\n"));
	CHECK_THROWS(decode_pgm("P5\n2 1\n65535\n"));
	CHECK_THROWS(decode_pgm(std::string("P5\n2 2\n255\n") + char(1)));
}

TEST_CASE("format_real round-trips doubles exactly")
{
	for (double v : {0.1, -1.0 / 3.0, 1e-300, 12345.678901234567, 0.0})
		CHECK(parse_real(format_real(v)) == v);
	CHECK_THROWS(parse_real("1.0x"));
	CHECK_THROWS(parse_real(""));
	CHECK_THROWS(parse_integer("3.5"));
	CHECK(parse_integer("-12") == -12);
	CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
	CHECK(split_whitespace("  a \t b ") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("sub-seeds depend on seed, name and index")
{
	CHECK(sub_seed(1, "a") == sub_seed(1, "a"));
	CHECK(sub_seed(1, "a") != sub_seed(2, "a"));
	CHECK(sub_seed(1, "a") != sub_seed(1, "b"));
	CHECK(sub_seed(1, "a", 0) != sub_seed(1, "a", 1));
}

TEST_CASE("parallel_for visits every index once for any job count")
{
	for (int jobs : {1, 3, 16}) {
		std::vector<std::atomic<int>> hits(101);
		parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i]++; });
		for (auto& h : hits)
			CHECK(h.load() == 1);
	}
}

TEST_CASE("parallel_for rethrows the failure of the lowest index")
{
	for (int jobs : {1, 4}) {
		try {
			parallel_for(50, jobs, [](std::size_t i) {
				if (i == 7 || i == 40)
					throw std::runtime_error(std::to_string(i));
			});
			FAIL("expected an exception");
		} catch (const std::runtime_error& e) {
			CHECK(std::string(e.what()) == "7");
		}
	}
}

TEST_CASE("ParamVector layout")
{
	CHECK(param_layout(2) == std::vector<std::string>{"rx", "ry", "rz", "tx", "ty", "tz", "a0", "a1"});
	camera::PoseParams pose{1, 2, 3, 4, 5, -6};
	const ParamVector theta(pose, Eigen::Vector2d(0.5, -0.5));
	CHECK(theta.size() == 8);
	CHECK(theta.num_shape() == 2);
	CHECK(theta.pose() == pose);
	CHECK(theta[6] == 0.5);
	CHECK_THROWS_AS(ParamVector(Eigen::VectorXd::Zero(5)), std::invalid_argument);
}
