// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>
#include <vector>

namespace attrag {

/// Returns a data file bundled at build time from data/, addressed by its
/// path relative to that directory (e.g. "prompts/usefulness.txt").
/// Throws std::out_of_range for unknown names.
std::string_view resource(std::string_view name);

std::vector<std::string_view> resource_names();

}  // namespace attrag
