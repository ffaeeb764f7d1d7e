/*
 * morphfit - Cascaded-regression pose and shape fitting for 3D morphable shape models.
 *
 * File: include/morphfit/core/text.hpp
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

#ifndef MORPHFIT_CORE_TEXT_HPP
#define MORPHFIT_CORE_TEXT_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace morphfit {

/// Formats a double with 17 significant digits, enough to round-trip any value exactly.
std::string format_real(double value);

/// Strict parse of a whole token as a double. Throws std::invalid_argument.
double parse_real(std::string_view token);
long long parse_integer(std::string_view token);

std::vector<std::string> split(std::string_view line, char delimiter);
std::vector<std::string> split_whitespace(std::string_view line);
std::string_view trim(std::string_view s);

std::string read_text_file(const std::filesystem::path& filename);

/**
 * Writes \p content to a temporary sibling of \p filename and renames it into place,
 * so readers never see a partially written file.
 */
void write_file_atomic(const std::filesystem::path& filename, const std::string& content);

} // namespace morphfit

#endif /* MORPHFIT_CORE_TEXT_HPP */
