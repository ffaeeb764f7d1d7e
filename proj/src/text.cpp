/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: src/text.cpp
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
#include "morphfit/core/text.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace morphfit {

std::string format_real(double value)
{
	char buffer[40];
	std::snprintf(buffer, sizeof(buffer), "%.17g", value);
	return buffer;
}

double parse_real(std::string_view token)
{
	const std::string s(trim(token));
	if (s.empty())
		throw std::invalid_argument("expected a number, got an empty field");
	char* end = nullptr;
	errno = 0;
	const double v = std::strtod(s.c_str(), &end);
	if (end != s.c_str() + s.size() || errno == ERANGE)
		throw std::invalid_argument("not a valid number: '" + s + "'");
	return v;
}

long long parse_integer(std::string_view token)
{
	const std::string s(trim(token));
	if (s.empty())
		throw std::invalid_argument("expected an integer, got an empty field");
	char* end = nullptr;
	errno = 0;
	const long long v = std::strtoll(s.c_str(), &end, 10);
	if (end != s.c_str() + s.size() || errno == ERANGE)
		throw std::invalid_argument("not a valid integer: '" + s + "'");
	return v;
}

std::vector<std::string> split(std::string_view line, char delimiter)
{
	std::vector<std::string> fields;
	std::size_t start = 0;
	while (true) {
		const auto pos = line.find(delimiter, start);
		if (pos == std::string_view::npos) {
			fields.emplace_back(line.substr(start));
			break;
		}
		fields.emplace_back(line.substr(start, pos - start));
		start = pos + 1;
	}
	return fields;
}

std::vector<std::string> split_whitespace(std::string_view line)
{
	std::vector<std::string> tokens;
	std::istringstream in{std::string(line)};
	std::string token;
	while (in >> token)
		tokens.push_back(token);
	return tokens;
}

std::string_view trim(std::string_view s)
{
	const auto first = s.find_first_not_of(" \t\r\n");
	if (first == std::string_view::npos)
		return {};
	const auto last = s.find_last_not_of(" \t\r\n");
	return s.substr(first, last - first + 1);
}

std::string read_text_file(const std::filesystem::path& filename)
{
	std::ifstream file(filename, std::ios::binary);
	if (!file)
		throw std::runtime_error("Could not open file: " + filename.string());
	std::ostringstream contents;
	contents << file.rdbuf();
	return contents.str();
}

void write_file_atomic(const std::filesystem::path& filename, const std::string& content)
{
	auto tmp = filename;
	tmp += ".tmp";
	{
		std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
		if (!file)
			throw std::runtime_error("Could not open file for writing: " + tmp.string());
		file.write(content.data(), static_cast<std::streamsize>(content.size()));
		if (!file)
			throw std::runtime_error("Failed writing: " + tmp.string());
	}
	std::error_code ec;
	std::filesystem::rename(tmp, filename, ec);
	if (ec)
		throw std::runtime_error("Could not rename " + tmp.string() + " to " + filename.string() + ": " + ec.message());
}

} // namespace morphfit
