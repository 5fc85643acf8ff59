// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include "attrag/chunking.hpp"
#include "attrag/ingest.hpp"

// Lossless JSON forms of the stored entities. The field names double as the
// wire format of the chunk browser endpoint.
namespace attrag {

nlohmann::json to_json(const Document& doc);
Document document_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Chunk& chunk);
Chunk chunk_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ChunkConfig& config);
/// Missing fields keep the values of `base`. Throws kInvalidChunkParams.
ChunkConfig chunk_config_from_json(const nlohmann::json& j, const ChunkConfig& base = {});

}  // namespace attrag
