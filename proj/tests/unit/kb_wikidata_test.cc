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

#include <gtest/gtest.h>

#include "envre/error.h"
#include "envre/kb_wikidata.h"

namespace envre {
namespace {

TEST(WikidataParseTest, EntityResponseKeepsStatementOrder) {
  const std::string body = R"({"entities":{"Q56760":{
    "labels":{"en":{"language":"en","value":"Sony Music"}},
    "aliases":{"en":[{"value":"Sony"},{"value":"Sony Music Entertainment"},{"value":"sony"}]},
    "claims":{"P31":[
      {"mainsnak":{"datavalue":{"value":{"id":"Q18127"}}}},
      {"mainsnak":{"snaktype":"somevalue"}},
      {"mainsnak":{"datavalue":{"value":{"id":"Q4830453"}}}}]}}}})";
  const auto item = ParseEntityResponse(body, "Q56760");
  ASSERT_TRUE(item.has_value());
  EXPECT_EQ(item->label, "Sony Music");
  EXPECT_EQ(item->aliases, (std::vector<std::string>{"Sony", "Sony Music Entertainment"}));
  EXPECT_EQ(item->instance_of, (std::vector<std::string>{"Q18127", "Q4830453"}));
}

TEST(WikidataParseTest, MissingEntityIsNullopt) {
  EXPECT_FALSE(ParseEntityResponse(R"({"entities":{"Q0":{"id":"Q0","missing":""}}})", "Q0"));
  EXPECT_FALSE(ParseEntityResponse(R"({"entities":{}})", "Q1"));
  EXPECT_FALSE(ParseEntityResponse(R"({"entities":{"Q1":{"labels":{"de":{"value":"x"}}}}})", "Q1"));
}

TEST(WikidataParseTest, MalformedBodyIsTransient) {
  try {
    ParseEntityResponse("<html>busy</html>", "Q1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransient);
  }
}

TEST(WikidataParseTest, MembersResponseSplitsAliases) {
  const std::string body = R"({"results":{"bindings":[
    {"item":{"value":"http://www.wikidata.org/entity/Q1417941"},
     "label":{"value":"Matador Records"},
     "aliases":{"value":"Matador\u001fMatador Recordings"}},
    {"item":{"value":"http://www.wikidata.org/entity/Q99"},"label":{"value":"Lonely"}},
    {"item":{"value":"http://www.wikidata.org/entity/P31"},"label":{"value":"bad"}},
    {"label":{"value":"no item"}}]}})";
  const auto members = ParseMembersResponse(body);
  ASSERT_EQ(members.size(), 2u);
  EXPECT_EQ(members[0].id, "Q1417941");
  EXPECT_EQ(members[0].aliases, (std::vector<std::string>{"Matador", "Matador Recordings"}));
  EXPECT_EQ(members[1].name_count(), 1);
}

TEST(WikidataParseTest, CountResponse) {
  EXPECT_EQ(ParseCountResponse(R"({"results":{"bindings":[{"count":{"value":"4117"}}]}})"), 4117);
  EXPECT_FALSE(ParseCountResponse(R"({"results":{"bindings":[]}})"));
}

TEST(WikidataQueryTest, QueriesNameTheirTargets) {
  const std::string members = MembersQuery("Q18127", 10000);
  EXPECT_NE(members.find("wdt:P31 wd:Q18127"), std::string::npos);
  EXPECT_NE(members.find("LIMIT 10000"), std::string::npos);
  const std::string popularity = PopularityQuery("Q56760");
  EXPECT_NE(popularity.find("wd:Q56760 ?p ?o"), std::string::npos);
  EXPECT_NE(popularity.find("?s ?p wd:Q56760"), std::string::npos);
}

}  // namespace
}  // namespace envre
