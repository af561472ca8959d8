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

#include "envre/relation_inventory.h"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "envre/error.h"
#include "envre/text_util.h"
#include "json.hpp"
#include "rel_info_data.h"

namespace envre {

RelationInventory::RelationInventory(std::vector<Relation> relations)
    : relations_(std::move(relations)) {
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    const Relation& r = relations_[i];
    if (r.id.empty() || r.label.empty()) {
      throw Error(ErrorCode::kValidation,
                  "relation inventory entry " + std::to_string(i) +
                      " has an empty identifier or label");
    }
    if (!by_id_.emplace(r.id, i).second) {
      throw Error(ErrorCode::kValidation,
                  "duplicate relation identifier " + r.id);
    }
    if (!by_folded_label_.emplace(FoldCase(r.label), i).second) {
      throw Error(ErrorCode::kValidation, "duplicate relation label " + r.label);
    }
  }
}

RelationInventory RelationInventory::FromJson(std::string_view json_text) {
  nlohmann::ordered_json parsed;
  std::string duplicate;
  std::set<std::string> keys;
  auto watch = [&](int depth, nlohmann::ordered_json::parse_event_t event,
                   nlohmann::ordered_json& value) {
    if (event == nlohmann::ordered_json::parse_event_t::key && depth == 1 &&
        !keys.insert(value.get<std::string>()).second && duplicate.empty()) {
      duplicate = value.get<std::string>();
    }
    return true;
  };
  try {
    parsed = nlohmann::ordered_json::parse(json_text, watch);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, "relation inventory at byte " +
                                       std::to_string(e.byte) + ": " +
                                       e.what());
  }
  if (!parsed.is_object()) {
    throw Error(ErrorCode::kValidation,
                "relation inventory must be a JSON object");
  }
  if (!duplicate.empty()) {
    throw Error(ErrorCode::kValidation, "duplicate relation identifier " + duplicate);
  }
  std::vector<Relation> relations;
  for (const auto& [id, label] : parsed.items()) {
    if (!label.is_string()) {
      throw Error(ErrorCode::kValidation,
                  "relation " + id + " label is not a string");
    }
    relations.push_back({id, label.get<std::string>()});
  }
  if (relations.empty()) {
    throw Error(ErrorCode::kValidation, "relation inventory is empty");
  }
  return RelationInventory(std::move(relations));
}

RelationInventory RelationInventory::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kValidation,
                "cannot read relation inventory " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return FromJson(buffer.str());
}

const RelationInventory& RelationInventory::Default() {
  static const RelationInventory* inventory =
      new RelationInventory(FromJson(internal::kDefaultRelationInventoryJson));
  return *inventory;
}

bool RelationInventory::Contains(std::string_view id) const {
  return by_id_.find(id) != by_id_.end();
}

const std::string& RelationInventory::Label(std::string_view id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) {
    throw Error(ErrorCode::kValidation,
                "unknown relation " + std::string(id));
  }
  return relations_[it->second].label;
}

std::optional<std::string> RelationInventory::FindId(
    std::string_view label_or_id) const {
  const std::string folded = FoldCase(Trim(label_or_id));
  if (auto it = by_folded_label_.find(folded); it != by_folded_label_.end()) {
    return relations_[it->second].id;
  }
  for (const Relation& r : relations_) {
    if (FoldCase(r.id) == folded) return r.id;
  }
  return std::nullopt;
}

}  // namespace envre
