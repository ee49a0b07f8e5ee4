// Copyright 2026 The txfix Authors.
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


// HTTP API for detection, top-k correction, the review queue and model
// activation.
//
//   POST /detect                          {"transaction":{...},"enqueue":true}
//   POST /correct                         {"transaction":{...},"class_id":0,"k":5}
//   GET  /queue?offset=0&limit=50         PENDING items in creation order
//   GET  /queue/{id}
//   POST /queue/{id}/decision             {"action":"ACCEPT|OVERRIDE|DISMISS",
//                                          "class_id":0,"value":"CREDIT",
//                                          "note":"..."}; X-Operator header
//   GET  /models
//   POST /models/{purpose}/{version}/activate
//
// Errors are {"error":"<module.Code>","message":"..."} with the status
// codes listed per endpoint in the handlers.

#ifndef TXFIX_SERVICE_HPP_
#define TXFIX_SERVICE_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"

namespace txfix {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path registry_path = "models";
  std::filesystem::path store_path = "store";
  std::optional<std::filesystem::path> taxonomy_path;
  std::optional<std::filesystem::path> policy_path;
  double flag_threshold = 0.5;
  bool log_requests = true;

  // Keys as above (bind_address is "host:port"); missing keys keep their
  // defaults. Throws service.BadConfig.
  static ServiceConfig from_json(const nlohmann::json& j);
  static ServiceConfig load(const std::filesystem::path& path);
  // TXFIX_BIND_ADDRESS, TXFIX_REGISTRY_PATH, TXFIX_STORE_PATH.
  void apply_environment();
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Transport-independent dispatch; the HTTP server calls this.
  HttpResponse handle(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query, const std::string& body,
                      const std::map<std::string, std::string>& headers);

  // Re-reads ACTIVE pointers from the registry and swaps model snapshots.
  void reload_models();

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port. Throws service.BindFailed.
  int start();
  // Serves on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace txfix

#endif  // TXFIX_SERVICE_HPP_
