//
// Copyright 2026 The Envre Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "envre/document.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "envre/error.h"
#include "json.hpp"

namespace envre {
namespace {

using nlohmann::json;

std::string Where(const std::string& title, std::ptrdiff_t doc_index) {
  return "document '" + title + "' (#" + std::to_string(doc_index) + ")";
}

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kValidation, message);
}

const json& Field(const json& object, const char* key,
                  const std::string& context) {
  auto it = object.find(key);
  if (it == object.end()) Invalid(context + ": missing field '" + key + "'");
  return *it;
}

int AsInt(const json& value, const std::string& context) {
  if (!value.is_number_integer()) Invalid(context + ": expected an integer");
  return value.get<int>();
}

std::string AsString(const json& value, const std::string& context) {
  if (!value.is_string()) Invalid(context + ": expected a string");
  return value.get<std::string>();
}

// (sentence, start) of a mention's first token, used for document order.
std::pair<int, int> Position(const Mention& m) {
  return {m.sentence_index, m.span.start};
}

Document DocumentFromJson(const json& node, std::ptrdiff_t doc_index,
                          const ParseOptions& options) {
  if (!node.is_object()) {
    Invalid("document #" + std::to_string(doc_index) + " is not an object");
  }
  Document doc;
  const std::string fallback = "document #" + std::to_string(doc_index);
  doc.title = AsString(Field(node, "title", fallback), fallback + " title");
  const std::string where = Where(doc.title, doc_index);

  const json& sents = Field(node, "sents", where);
  if (!sents.is_array()) Invalid(where + ": 'sents' must be an array");
  for (std::size_t s = 0; s < sents.size(); ++s) {
    if (!sents[s].is_array()) {
      Invalid(where + ": sentence " + std::to_string(s) + " is not an array");
    }
    std::vector<std::string>& tokens = doc.sentences.emplace_back();
    for (const json& tok : sents[s]) {
      tokens.push_back(AsString(tok, where + " sentence " + std::to_string(s)));
    }
  }

  const json& vertex_set = Field(node, "vertexSet", where);
  if (!vertex_set.is_array()) Invalid(where + ": 'vertexSet' must be an array");
  for (std::size_t e = 0; e < vertex_set.size(); ++e) {
    const std::string ectx = where + " entity " + std::to_string(e);
    if (!vertex_set[e].is_array()) Invalid(ectx + ": expected a mention array");
    Entity& entity = doc.entities.emplace_back();
    for (std::size_t m = 0; m < vertex_set[e].size(); ++m) {
      const json& mj = vertex_set[e][m];
      const std::string mctx = ectx + " mention " + std::to_string(m);
      if (!mj.is_object()) Invalid(mctx + ": expected an object");
      Mention mention;
      mention.name = AsString(Field(mj, "name", mctx), mctx + " name");
      mention.sentence_index = AsInt(Field(mj, "sent_id", mctx), mctx);
      const json& pos = Field(mj, "pos", mctx);
      if (!pos.is_array() || pos.size() != 2) {
        Invalid(mctx + ": 'pos' must be [start, end]");
      }
      mention.span = {AsInt(pos[0], mctx), AsInt(pos[1], mctx)};
      mention.type = AsString(Field(mj, "type", mctx), mctx + " type");
      entity.mentions.push_back(std::move(mention));
    }
    if (!entity.mentions.empty()) entity.type = entity.mentions.front().type;
  }

  if (auto it = node.find("labels"); it != node.end()) {
    if (!it->is_array()) Invalid(where + ": 'labels' must be an array");
    for (std::size_t l = 0; l < it->size(); ++l) {
      const json& lj = (*it)[l];
      const std::string lctx = where + " label " + std::to_string(l);
      if (!lj.is_object()) Invalid(lctx + ": expected an object");
      RelationLabel label;
      label.head = AsInt(Field(lj, "h", lctx), lctx);
      label.tail = AsInt(Field(lj, "t", lctx), lctx);
      label.relation = AsString(Field(lj, "r", lctx), lctx);
      if (auto ev = lj.find("evidence"); ev != lj.end()) {
        if (!ev->is_array()) Invalid(lctx + ": 'evidence' must be an array");
        for (const json& s : *ev) label.evidence.push_back(AsInt(s, lctx));
      }
      doc.labels.push_back(std::move(label));
    }
  }

  // Span-derived names are authoritative; fix disagreements before the full
  // validation pass checks the name invariant.
  for (std::size_t e = 0; e < doc.entities.size(); ++e) {
    for (std::size_t m = 0; m < doc.entities[e].mentions.size(); ++m) {
      Mention& mention = doc.entities[e].mentions[m];
      const int s = mention.sentence_index;
      if (s < 0 || s >= static_cast<int>(doc.sentences.size())) continue;
      const auto& tokens = doc.sentences[s];
      if (mention.span.start < 0 || mention.span.start >= mention.span.end ||
          mention.span.end > static_cast<int>(tokens.size())) {
        continue;
      }
      std::string derived = SpanText(doc, mention);
      if (derived != mention.name) {
        if (options.corrections != nullptr) {
          options.corrections->push_back({doc.title, static_cast<int>(e),
                                          static_cast<int>(m), mention.name,
                                          derived});
        }
        mention.name = std::move(derived);
      }
    }
  }

  ValidateDocument(doc, options.relations);
  return doc;
}

json MentionToJson(const Entity& entity, const Mention& m) {
  return json{{"name", m.name},
              {"sent_id", m.sentence_index},
              {"pos", json::array({m.span.start, m.span.end})},
              {"type", m.type.empty() ? entity.type : m.type}};
}

json DocumentToJson(const Document& doc) {
  json vertex_set = json::array();
  for (const Entity& entity : doc.entities) {
    json mentions = json::array();
    for (const Mention& m : entity.mentions) {
      mentions.push_back(MentionToJson(entity, m));
    }
    vertex_set.push_back(std::move(mentions));
  }
  json labels = json::array();
  for (const RelationLabel& l : doc.labels) {
    labels.push_back(json{{"h", l.head},
                          {"t", l.tail},
                          {"r", l.relation},
                          {"evidence", l.evidence}});
  }
  return json{{"title", doc.title},
              {"sents", doc.sentences},
              {"vertexSet", std::move(vertex_set)},
              {"labels", std::move(labels)}};
}

}  // namespace

int Entity::alias_count() const {
  std::set<std::string> names;
  for (const Mention& m : mentions) names.insert(m.name);
  return static_cast<int>(names.size());
}

std::string JoinTokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string SpanText(const Document& doc, const Mention& mention) {
  const auto& tokens = doc.sentences.at(mention.sentence_index);
  return JoinTokens(std::span<const std::string>(tokens).subspan(
      mention.span.start, mention.span.length()));
}

std::vector<std::string> DistinctNames(const Entity& entity) {
  std::map<std::string, std::pair<int, int>> first;
  for (const Mention& m : entity.mentions) {
    auto [it, inserted] = first.emplace(m.name, Position(m));
    if (!inserted) it->second = std::min(it->second, Position(m));
  }
  std::vector<std::pair<std::pair<int, int>, std::string>> ordered;
  for (const auto& [name, pos] : first) ordered.emplace_back(pos, name);
  std::sort(ordered.begin(), ordered.end());
  std::vector<std::string> out;
  for (auto& [pos, name] : ordered) out.push_back(std::move(name));
  return out;
}

std::string MostFrequentName(const Entity& entity) {
  std::map<std::string, int> counts;
  for (const Mention& m : entity.mentions) ++counts[m.name];
  std::string best;
  int best_count = 0;
  for (const std::string& name : DistinctNames(entity)) {
    if (counts[name] > best_count) {
      best = name;
      best_count = counts[name];
    }
  }
  return best;
}

void ValidateDocument(const Document& doc, const RelationInventory* relations) {
  const std::string where = "document '" + doc.title + "'";
  const int num_sentences = static_cast<int>(doc.sentences.size());
  const int num_entities = static_cast<int>(doc.entities.size());
  // (sentence, start, end) -> owning entity
  std::map<std::tuple<int, int, int>, int> owner;
  for (int e = 0; e < num_entities; ++e) {
    const Entity& entity = doc.entities[e];
    const std::string ectx = where + " entity " + std::to_string(e);
    if (entity.mentions.empty()) Invalid(ectx + ": entity has no mentions");
    for (int m = 0; m < static_cast<int>(entity.mentions.size()); ++m) {
      const Mention& mention = entity.mentions[m];
      const std::string mctx = ectx + " mention " + std::to_string(m);
      if (mention.sentence_index < 0 || mention.sentence_index >= num_sentences) {
        Invalid(mctx + ": sentence index " +
                std::to_string(mention.sentence_index) + " out of range [0, " +
                std::to_string(num_sentences) + ")");
      }
      const int len =
          static_cast<int>(doc.sentences[mention.sentence_index].size());
      if (mention.span.start < 0 || mention.span.start >= mention.span.end ||
          mention.span.end > len) {
        Invalid(mctx + ": span [" + std::to_string(mention.span.start) + ", " +
                std::to_string(mention.span.end) +
                ") invalid for sentence of length " + std::to_string(len));
      }
      if (mention.name.empty()) Invalid(mctx + ": empty mention name");
      if (SpanText(doc, mention) != mention.name) {
        Invalid(mctx + ": name '" + mention.name +
                "' does not match span tokens '" + SpanText(doc, mention) +
                "'");
      }
      auto key = std::make_tuple(mention.sentence_index, mention.span.start,
                                 mention.span.end);
      auto [it, inserted] = owner.emplace(key, e);
      if (!inserted && it->second != e) {
        Invalid(mctx + ": span shared with entity " +
                std::to_string(it->second));
      }
    }
  }
  for (std::size_t l = 0; l < doc.labels.size(); ++l) {
    const RelationLabel& label = doc.labels[l];
    const std::string lctx = where + " label " + std::to_string(l);
    if (label.head < 0 || label.head >= num_entities || label.tail < 0 ||
        label.tail >= num_entities) {
      Invalid(lctx + ": entity index out of range");
    }
    if (label.head == label.tail) Invalid(lctx + ": head equals tail");
    if (relations != nullptr && !relations->Contains(label.relation)) {
      Invalid(lctx + ": unknown relation '" + label.relation + "'");
    }
    for (int s : label.evidence) {
      if (s < 0 || s >= num_sentences) {
        Invalid(lctx + ": evidence sentence " + std::to_string(s) +
                " out of range");
      }
    }
  }
}

std::vector<Document> ParseCorpus(std::string_view bytes,
                                  const ParseOptions& options) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                "malformed JSON at byte " + std::to_string(e.byte) + ": " +
                    e.what());
  }
  if (!root.is_array()) {
    throw Error(ErrorCode::kValidation, "corpus must be a JSON array");
  }
  std::vector<Document> docs;
  docs.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    docs.push_back(
        DocumentFromJson(root[i], static_cast<std::ptrdiff_t>(i), options));
  }
  return docs;
}

std::vector<Document> LoadCorpus(const std::filesystem::path& path,
                                 const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kValidation, "cannot read corpus " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseCorpus(buffer.str(), options);
}

std::string SerializeCorpus(std::span<const Document> docs) {
  json root = json::array();
  for (const Document& doc : docs) root.push_back(DocumentToJson(doc));
  return root.dump();
}

void WriteCorpus(const std::filesystem::path& path,
                 std::span<const Document> docs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kInternal, "cannot write " + path.string());
  }
  out << SerializeCorpus(docs);
}

CorpusStats ComputeCorpusStats(std::span<const Document> docs) {
  CorpusStats stats;
  stats.documents = docs.size();
  for (const Document& doc : docs) {
    stats.entities += doc.entities.size();
    stats.triples += doc.labels.size();
  }
  if (docs.empty()) {
    stats.undefined = true;
    return stats;
  }
  stats.mean_entities =
      static_cast<double>(stats.entities) / static_cast<double>(docs.size());
  stats.mean_triples =
      static_cast<double>(stats.triples) / static_cast<double>(docs.size());
  return stats;
}

}  // namespace envre
