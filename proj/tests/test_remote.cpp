// Copyright 2026 The medkg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <thread>

// Eigen must precede httplib: <resolv.h> defines a _res macro.
#include "medkg/error.hpp"
#include "medkg/remote.hpp"

#include <httplib.h>
#include <json.hpp>

using namespace medkg;
using nlohmann::json;

namespace {

// Local stand-in for the chat, embedding and E-utilities endpoints.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/api/v1/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
      last_auth = req.get_header_value("Authorization");
      const json body = json::parse(req.body);
      last_prompt = body["messages"][0]["content"].get<std::string>();
      if (last_prompt == "limit") {
        res.status = 429;
        res.set_content(R"({"error": {"message": "rate limited, retry later"}})",
                        "application/json");
        return;
      }
      if (last_prompt == "garbage") {
        res.set_content(R"({"choices": []})", "application/json");
        return;
      }
      json out;
      out["choices"] = json::array({{{"message", {{"role", "assistant"},
                                                  {"content", "echo: " + last_prompt}}}}});
      res.set_content(out.dump(), "application/json");
    });
    server_.Post("/api/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body);
      const auto n = static_cast<double>(body["input"].get<std::string>().size());
      json out;
      out["data"] = json::array({{{"embedding", {n, 0.0, 0.0}}}});
      res.set_content(out.dump(), "application/json");
    });
    server_.Get("/eutils/esearch.fcgi", [this](const httplib::Request& req, httplib::Response& res) {
      last_term = req.get_param_value("term");
      last_mindate = req.get_param_value("mindate");
      if (last_term == "nothing") {
        res.set_content(R"({"esearchresult": {"idlist": []}})", "application/json");
        return;
      }
      res.set_content(R"({"esearchresult": {"idlist": ["101", "102", "103"]}})",
                      "application/json");
    });
    server_.Get("/eutils/esummary.fcgi", [this](const httplib::Request& req, httplib::Response& res) {
      last_ids = req.get_param_value("id");
      res.set_content(R"({"result": {
        "uids": ["101", "102", "103"],
        "101": {"title": "Statins after stroke", "pubdate": "2021 Mar"},
        "102": {"title": "", "pubdate": "2022"},
        "103": {"title": "Aspirin dosing", "pubdate": "2023 Jan 4"}}})",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& prefix) const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }

  std::string last_auth, last_prompt, last_term, last_mindate, last_ids;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST(Remote, ParseBaseUrl) {
  const BaseUrl a = parse_base_url("http://localhost:8080/api/");
  EXPECT_EQ(a.origin, "http://localhost:8080");
  EXPECT_EQ(a.prefix, "/api");
  const BaseUrl b = parse_base_url("https://example.org");
  EXPECT_EQ(b.origin, "https://example.org");
  EXPECT_EQ(b.prefix, "");
  EXPECT_THROW(parse_base_url("localhost:8080"), Error);
}

TEST(Remote, ChatCompletion) {
  FakeServer server;
  HttpLlmClient llm(server.url("/api"), "test-model", "k123");
  EXPECT_EQ(llm.complete("hello"), "echo: hello");
  EXPECT_EQ(server.last_auth, "Bearer k123");
  try {
    llm.complete("limit");
    FAIL() << "expected RemoteError";
  } catch (const RemoteError& e) {
    EXPECT_NE(std::string(e.what()).find("rate limited, retry later"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("429"), std::string::npos);
  }
  EXPECT_THROW(llm.complete("garbage"), RemoteError);
}

TEST(Remote, UnreachableEndpointIsRemoteError) {
  std::string url;
  {
    FakeServer server;
    url = server.url("/api");
  }
  HttpLlmClient llm(url, "m", "");
  EXPECT_THROW(llm.complete("hi"), RemoteError);
}

TEST(Remote, EmbeddingsAreNormalized) {
  FakeServer server;
  HttpEmbeddingProvider provider(server.url("/api"), "embed", "", 3);
  EXPECT_EQ(provider.raw_embedding("abcd"), (std::vector<double>{4.0, 0.0, 0.0}));
  const EmbeddingVector unit = embed(CleanedText{"abcd", "d"}, provider);
  EXPECT_EQ(unit.values, (std::vector<double>{1.0, 0.0, 0.0}));
  EXPECT_EQ(provider.name(), "http:embed");
}

TEST(Remote, PubMedSearch) {
  FakeServer server;
  PubMedClient client(server.url("/eutils"));
  const auto recs = client.search("stroke", 2020, 2024);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].id, "pmid:101");
  EXPECT_EQ(recs[0].year, 2021);
  EXPECT_EQ(recs[1].title, "Aspirin dosing");
  EXPECT_TRUE(recs[1].abstract.empty());
  EXPECT_EQ(server.last_term, "stroke");
  EXPECT_EQ(server.last_mindate, "2020");
  EXPECT_EQ(server.last_ids, "101,102,103");
  EXPECT_TRUE(client.search("nothing", 2020, 2024).empty());
}
