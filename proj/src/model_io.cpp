#include "cotlab/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cotlab/errors.hpp"

namespace cotlab {

namespace {

using Json = nlohmann::ordered_json;

Json vector_to_json(const std::vector<double>& v) { return Json(v); }

std::vector<double> vector_from_json(const Json& j, const std::string& where,
                                     std::size_t expected) {
  if (!j.is_array() || j.size() != expected) {
    throw Error("model JSON: " + where + " must be an array of length " +
                std::to_string(expected));
  }
  std::vector<double> v;
  v.reserve(expected);
  for (const auto& x : j) {
    if (!x.is_number()) throw Error("model JSON: " + where + " has a non-number");
    v.push_back(x.get<double>());
  }
  return v;
}

std::vector<std::string> ids_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw Error("model JSON: " + where + " must be a non-empty array");
  }
  std::vector<std::string> ids;
  for (const auto& x : j) {
    if (!x.is_string()) throw Error("model JSON: " + where + " has a non-string");
    ids.push_back(x.get<std::string>());
  }
  return ids;
}

const Json& require(const Json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw Error("model JSON: missing field '" + std::string(field) + "'");
  return *it;
}

}  // namespace

std::string model_to_json(const ModelSpec& spec) {
  Json j;
  j["contexts"] = spec.contexts;
  j["intentions"] = spec.intentions;
  j["messages"] = spec.messages;
  j["terminal_intention"] = spec.intentions[spec.terminal_intention];
  j["stop_symbol"] = spec.messages[spec.stop_symbol];
  j["context_prior"] = vector_to_json(spec.context_prior);

  Json init = Json::object();
  for (int c = 0; c < spec.n_contexts(); ++c) {
    init[spec.contexts[c]] = vector_to_json(spec.init_intention[c]);
  }
  j["init_intention"] = std::move(init);

  Json emission = Json::object();
  for (int t = 0; t < spec.n_intentions(); ++t) {
    emission[spec.intentions[t]] = vector_to_json(spec.emission[t]);
  }
  j["emission"] = std::move(emission);

  Json kernel = Json::object();
  kernel["family"] = std::string(to_string(spec.transitions.family));
  Json rows = Json::object();
  for (int c = 0; c < spec.n_contexts(); ++c) {
    std::vector<std::string> keys;
    keys.reserve(spec.transitions.rows[c].size());
    for (const auto& [key, row] : spec.transitions.rows[c]) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    Json context_rows = Json::object();
    for (const auto& key : keys) {
      context_rows[key] = vector_to_json(spec.transitions.rows[c].at(key));
    }
    rows[spec.contexts[c]] = std::move(context_rows);
  }
  kernel["rows"] = std::move(rows);
  if (spec.transitions.family == KernelFamily::kFull) {
    Json fallback = Json::object();
    for (int c = 0; c < spec.n_contexts(); ++c) {
      fallback[spec.contexts[c]] = vector_to_json(spec.transitions.fallback[c]);
    }
    kernel["fallback"] = std::move(fallback);
  }
  j["transition_kernel"] = std::move(kernel);

  j["max_len"] = spec.max_len;
  j["end_floor"] = spec.end_floor;
  return j.dump(2) + "\n";
}

ModelSpec model_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("model JSON: parse error: ") + e.what());
  }

  ModelSpec spec;
  spec.contexts = ids_from_json(require(j, "contexts"), "contexts");
  spec.intentions = ids_from_json(require(j, "intentions"), "intentions");
  spec.messages = ids_from_json(require(j, "messages"), "messages");

  const std::string terminal = require(j, "terminal_intention").get<std::string>();
  spec.terminal_intention = spec.intention_index(terminal);
  if (spec.terminal_intention < 0) {
    throw Error("model JSON: terminal_intention '" + terminal + "' not in intentions");
  }
  const std::string stop = require(j, "stop_symbol").get<std::string>();
  spec.stop_symbol = spec.message_index(stop);
  if (spec.stop_symbol < 0) {
    throw Error("model JSON: stop_symbol '" + stop + "' not in messages");
  }

  spec.context_prior = vector_from_json(require(j, "context_prior"),
                                        "context_prior", spec.contexts.size());

  const Json& init = require(j, "init_intention");
  spec.init_intention.resize(spec.n_contexts());
  for (int c = 0; c < spec.n_contexts(); ++c) {
    auto it = init.find(spec.contexts[c]);
    if (it == init.end()) {
      throw Error("model JSON: init_intention missing row '" + spec.contexts[c] + "'");
    }
    spec.init_intention[c] = vector_from_json(
        *it, "init_intention['" + spec.contexts[c] + "']", spec.intentions.size());
  }

  const Json& emission = require(j, "emission");
  spec.emission.resize(spec.n_intentions());
  for (int t = 0; t < spec.n_intentions(); ++t) {
    auto it = emission.find(spec.intentions[t]);
    if (it == emission.end()) {
      throw Error("model JSON: emission missing row '" + spec.intentions[t] + "'");
    }
    spec.emission[t] = vector_from_json(
        *it, "emission['" + spec.intentions[t] + "']", spec.messages.size());
  }

  const Json& kernel = require(j, "transition_kernel");
  spec.transitions.family =
      kernel_family_from_string(require(kernel, "family").get<std::string>());
  const Json& rows = require(kernel, "rows");
  spec.transitions.rows.resize(spec.n_contexts());
  for (int c = 0; c < spec.n_contexts(); ++c) {
    auto it = rows.find(spec.contexts[c]);
    if (it == rows.end()) {
      throw Error("model JSON: transition rows missing context '" +
                  spec.contexts[c] + "'");
    }
    if (!it->is_object()) {
      throw Error("model JSON: transition rows for '" + spec.contexts[c] +
                  "' must be an object");
    }
    for (const auto& [key, row] : it->items()) {
      spec.transitions.rows[c][key] = vector_from_json(
          row, "transition row ('" + spec.contexts[c] + "', '" + key + "')",
          spec.intentions.size());
    }
  }
  if (spec.transitions.family == KernelFamily::kFull) {
    const Json& fallback = require(kernel, "fallback");
    spec.transitions.fallback.resize(spec.n_contexts());
    for (int c = 0; c < spec.n_contexts(); ++c) {
      auto it = fallback.find(spec.contexts[c]);
      if (it == fallback.end()) {
        throw Error("model JSON: fallback row missing context '" +
                    spec.contexts[c] + "'");
      }
      spec.transitions.fallback[c] = vector_from_json(
          *it, "fallback['" + spec.contexts[c] + "']", spec.intentions.size());
    }
  }

  spec.max_len = require(j, "max_len").get<int>();
  spec.end_floor = require(j, "end_floor").get<double>();
  return spec;
}

void save_model(const ModelSpec& spec, const std::string& path) {
  write_file(path, model_to_json(spec));
}

ModelSpec load_model(const std::string& path) {
  return model_from_json(read_file(path));
}

std::string chains_to_json(const ModelSpec& spec,
                           std::span<const LabeledChain> chains) {
  Json array = Json::array();
  for (const LabeledChain& chain : chains) {
    Json j;
    Json messages = Json::array();
    for (int m : chain.messages) messages.push_back(spec.messages[m]);
    j["messages"] = std::move(messages);
    j["context"] = spec.contexts[chain.context];
    Json intentions = Json::array();
    for (int t : chain.intentions) intentions.push_back(spec.intentions[t]);
    j["intentions"] = std::move(intentions);
    j["complete"] = chain.complete;
    array.push_back(std::move(j));
  }
  return array.dump(2) + "\n";
}

std::vector<LabeledChain> chains_from_json(const ModelSpec& spec,
                                           const std::string& text) {
  Json array;
  try {
    array = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("chain JSON: parse error: ") + e.what());
  }
  if (!array.is_array()) throw Error("chain JSON: expected an array");

  std::vector<LabeledChain> chains;
  for (const auto& j : array) {
    LabeledChain chain;
    for (const auto& m : require(j, "messages")) {
      int index = spec.message_index(m.get<std::string>());
      if (index < 0) throw Error("chain JSON: unknown message '" + m.get<std::string>() + "'");
      chain.messages.push_back(index);
    }
    chain.context = spec.context_index(require(j, "context").get<std::string>());
    if (chain.context < 0) throw Error("chain JSON: unknown context");
    for (const auto& t : require(j, "intentions")) {
      int index = spec.intention_index(t.get<std::string>());
      if (index < 0) throw Error("chain JSON: unknown intention '" + t.get<std::string>() + "'");
      chain.intentions.push_back(index);
    }
    chain.complete = require(j, "complete").get<bool>();
    chains.push_back(std::move(chain));
  }
  return chains;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for reading: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace cotlab
