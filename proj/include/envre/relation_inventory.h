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

#ifndef ENVRE_RELATION_INVENTORY_H_
#define ENVRE_RELATION_INVENTORY_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace envre {

// Ordered mapping from relation identifiers (e.g. "P17") to human-readable
// labels (e.g. "country"). Order follows the source file.
class RelationInventory {
 public:
  struct Relation {
    std::string id;
    std::string label;
  };

  RelationInventory() = default;
  explicit RelationInventory(std::vector<Relation> relations);

  // Parses a JSON object {"P17": "country", ...}, preserving key order.
  static RelationInventory FromJson(std::string_view json_text);
  static RelationInventory Load(const std::filesystem::path& path);
  // The 96-type DocRED inventory bundled with the library.
  static const RelationInventory& Default();

  std::size_t size() const { return relations_.size(); }
  const std::vector<Relation>& relations() const { return relations_; }

  bool Contains(std::string_view id) const;
  // Label for `id`; throws Error(kValidation) when unknown.
  const std::string& Label(std::string_view id) const;
  // Case-insensitive lookup of a label or identifier.
  std::optional<std::string> FindId(std::string_view label_or_id) const;

 private:
  std::vector<Relation> relations_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, std::size_t, std::less<>> by_folded_label_;
};

}  // namespace envre

#endif  // ENVRE_RELATION_INVENTORY_H_
