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

#pragma once

#include <string>
#include <vector>

#include "medkg/corpus.hpp"
#include "medkg/llm.hpp"
#include "medkg/pipeline.hpp"
#include "medkg/preprocess.hpp"

namespace medkg {

// Environment variables read by the HTTP clients.
inline constexpr const char* kApiKeyEnv = "MEDKG_API_KEY";
inline constexpr const char* kLlmUrlEnv = "MEDKG_LLM_URL";
inline constexpr const char* kNcbiKeyEnv = "NCBI_API_KEY";

// Splits "http(s)://host[:port][/prefix]" into the origin and path prefix.
struct BaseUrl {
  std::string origin;
  std::string prefix;
};
BaseUrl parse_base_url(const std::string& url);

// OpenAI-compatible chat completions: POST <base>/v1/chat/completions.
class HttpLlmClient : public LlmClient {
 public:
  HttpLlmClient(std::string base_url, std::string model, std::string api_key);
  std::string complete(const std::string& prompt) override;

 private:
  BaseUrl base_;
  std::string model_;
  std::string api_key_;
};

// OpenAI-compatible embeddings: POST <base>/v1/embeddings.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string base_url, std::string model,
                        std::string api_key, std::size_t dim);
  std::string name() const override { return "http:" + model_; }
  std::size_t dim() const override { return dim_; }
  std::vector<double> raw_embedding(std::string_view text) override;

 private:
  BaseUrl base_;
  std::string model_;
  std::string api_key_;
  std::size_t dim_;
};

// NCBI E-utilities search (esearch + esummary, JSON). Returns titles only;
// abstracts are left empty.
class PubMedClient : public LiteratureClient {
 public:
  explicit PubMedClient(
      std::string base_url = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils",
      std::string api_key = {}, std::size_t max_results = 200);
  std::string source_name() const override { return "pubmed"; }
  std::vector<LiteratureRecord> search(const std::string& query, int year_from,
                                       int year_to) override;

 private:
  BaseUrl base_;
  std::string api_key_;
  std::size_t max_results_;
};

// Services backed by the clients above. MEDKG_LLM_URL overrides the
// configured LLM endpoint; keys come from the environment.
Services make_http_services(std::size_t embedding_dim);

}  // namespace medkg
