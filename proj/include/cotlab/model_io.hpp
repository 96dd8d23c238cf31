#pragma once

#include <span>
#include <string>
#include <vector>

#include "cotlab/model.hpp"

namespace cotlab {

// Model files are single JSON documents. Probability tables are objects
// keyed by row identifier with arrays of decimals as values; transition rows
// are nested per context under history keys ("t0:a" for Markov pairs,
// "t0:a|t1:b" for full histories). Serialization orders keys canonically so
// identical models produce identical bytes.
std::string model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(const std::string& text);

void save_model(const ModelSpec& spec, const std::string& path);
ModelSpec load_model(const std::string& path);

// Chains serialize as {messages, context, intentions, complete} with ids.
std::string chains_to_json(const ModelSpec& spec,
                           std::span<const LabeledChain> chains);
std::vector<LabeledChain> chains_from_json(const ModelSpec& spec,
                                           const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace cotlab
