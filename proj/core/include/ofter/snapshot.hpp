#pragma once

#include <string>

#include "ofter/embed.hpp"
#include "ofter/pipeline.hpp"

namespace ofter::snapshot {

inline constexpr int kSchemaVersion = 1;

// Flat JSON object whose keys mirror OfterConfig fields.
std::string config_to_json(const pipeline::OfterConfig& config);
// Keys present in `text` override `base`; unknown keys are rejected.
pipeline::OfterConfig config_from_json(const std::string& text, pipeline::OfterConfig base = {});

std::string embedding_to_json(const embed::EmbeddingState& state);
embed::EmbeddingState embedding_from_json(const std::string& text);

std::string state_to_json(const pipeline::PipelineState& state);
pipeline::PipelineState state_from_json(const std::string& text);

void save(const pipeline::PipelineState& state, const std::string& path);
pipeline::PipelineState load(const std::string& path);

}  // namespace ofter::snapshot
