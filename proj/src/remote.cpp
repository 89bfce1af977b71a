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

#include "medkg/remote.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "medkg/error.hpp"
#include "medkg/text.hpp"

namespace medkg {

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

httplib::Client make_client(const BaseUrl& base) {
  httplib::Client cli(base.origin);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(120);
  return cli;
}

json post_json(const BaseUrl& base, const std::string& path, const json& body,
               const std::string& api_key) {
  auto cli = make_client(base);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
  auto res = cli.Post(base.prefix + path, headers, body.dump(), "application/json");
  if (!res) {
    throw RemoteError("request to " + base.origin + base.prefix + path +
                      " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    std::string msg = res->body;
    try {
      const json err = json::parse(res->body);
      if (err.contains("error") && err["error"].contains("message")) {
        msg = err["error"]["message"].get<std::string>();
      }
    } catch (const json::exception&) {
    }
    throw RemoteError("HTTP " + std::to_string(res->status) + ": " + msg);
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw RemoteError(std::string("response is not JSON: ") + e.what());
  }
}

json get_json(const BaseUrl& base, const std::string& path,
              const httplib::Params& params) {
  auto cli = make_client(base);
  auto res = cli.Get(base.prefix + path, params, httplib::Headers{});
  if (!res) {
    throw RemoteError("request to " + base.origin + base.prefix + path +
                      " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw RemoteError("HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw RemoteError(std::string("response is not JSON: ") + e.what());
  }
}

}  // namespace

BaseUrl parse_base_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error("URL has no scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  BaseUrl b;
  b.origin = url.substr(0, slash);
  if (slash != std::string::npos) {
    b.prefix = url.substr(slash);
    while (!b.prefix.empty() && b.prefix.back() == '/') b.prefix.pop_back();
  }
  return b;
}

HttpLlmClient::HttpLlmClient(std::string base_url, std::string model,
                             std::string api_key)
    : base_(parse_base_url(base_url)),
      model_(std::move(model)),
      api_key_(std::move(api_key)) {}

std::string HttpLlmClient::complete(const std::string& prompt) {
  json body;
  body["model"] = model_;
  body["temperature"] = 0;
  body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
  const json res = post_json(base_, "/v1/chat/completions", body, api_key_);
  try {
    return res.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw RemoteError(std::string("unexpected completion response: ") + e.what());
  }
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url,
                                             std::string model,
                                             std::string api_key,
                                             std::size_t dim)
    : base_(parse_base_url(base_url)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      dim_(dim) {}

std::vector<double> HttpEmbeddingProvider::raw_embedding(std::string_view text) {
  json body;
  body["model"] = model_;
  body["input"] = std::string(text);
  const json res = post_json(base_, "/v1/embeddings", body, api_key_);
  try {
    return res.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw RemoteError(std::string("unexpected embedding response: ") + e.what());
  }
}

PubMedClient::PubMedClient(std::string base_url, std::string api_key,
                           std::size_t max_results)
    : base_(parse_base_url(base_url)),
      api_key_(std::move(api_key)),
      max_results_(max_results) {}

std::vector<LiteratureRecord> PubMedClient::search(const std::string& query,
                                                   int year_from, int year_to) {
  httplib::Params params{{"db", "pubmed"},
                         {"term", query},
                         {"retmode", "json"},
                         {"datetype", "pdat"},
                         {"mindate", std::to_string(year_from)},
                         {"maxdate", std::to_string(year_to)},
                         {"retmax", std::to_string(max_results_)}};
  if (!api_key_.empty()) params.emplace("api_key", api_key_);
  const json found = get_json(base_, "/esearch.fcgi", params);
  std::vector<std::string> ids;
  try {
    ids = found.at("esearchresult").at("idlist").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw RemoteError(std::string("unexpected esearch response: ") + e.what());
  }
  if (ids.empty()) return {};

  httplib::Params sp{{"db", "pubmed"}, {"retmode", "json"}, {"id", join(ids, ",")}};
  if (!api_key_.empty()) sp.emplace("api_key", api_key_);
  const json summary = get_json(base_, "/esummary.fcgi", sp);
  std::vector<LiteratureRecord> out;
  try {
    const json& result = summary.at("result");
    for (const auto& id : ids) {
      if (!result.contains(id)) continue;
      const json& r = result.at(id);
      LiteratureRecord rec;
      rec.id = "pmid:" + id;
      rec.title = r.value("title", std::string());
      if (rec.title.empty()) continue;
      const std::string date = r.value("pubdate", std::string());
      rec.year = date.size() >= 4 ? static_cast<int>(parse_int(date.substr(0, 4)))
                                  : year_from;
      out.push_back(std::move(rec));
    }
  } catch (const std::exception& e) {
    throw RemoteError(std::string("unexpected esummary response: ") + e.what());
  }
  return out;
}

Services make_http_services(std::size_t embedding_dim) {
  Services s;
  s.llm = [](const RemoteEndpoints& r) -> std::unique_ptr<LlmClient> {
    const std::string url = env_or(kLlmUrlEnv, r.llm_url);
    if (url.empty()) throw Error("no LLM endpoint configured (remote.llm_url)");
    return std::make_unique<HttpLlmClient>(url, r.llm_model, env_or(kApiKeyEnv, ""));
  };
  s.embedding = [embedding_dim](const RemoteEndpoints& r)
      -> std::unique_ptr<EmbeddingProvider> {
    if (r.embedding_url.empty()) {
      throw Error("no embedding endpoint configured (remote.embedding_url)");
    }
    return std::make_unique<HttpEmbeddingProvider>(
        r.embedding_url, r.embedding_model, env_or(kApiKeyEnv, ""), embedding_dim);
  };
  s.literature = [](const RemoteEndpoints& r) -> std::unique_ptr<LiteratureClient> {
    if (r.literature_url.empty()) return std::make_unique<PubMedClient>();
    return std::make_unique<PubMedClient>(r.literature_url, env_or(kNcbiKeyEnv, ""));
  };
  return s;
}

}  // namespace medkg
