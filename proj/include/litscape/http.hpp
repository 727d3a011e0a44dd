#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace litscape::http {

struct Response {
    int status = 0;
    std::string body;
};

using Params = std::vector<std::pair<std::string, std::string>>;
using Headers = std::vector<std::pair<std::string, std::string>>;

// Transport failures (connect, timeout) throw Error{Network}. HTTP status codes
// are returned as-is; callers decide what counts as transient.
Response get(const std::string& url, const Params& params,
             std::chrono::milliseconds timeout = std::chrono::seconds(30));

Response post_json(const std::string& url, const std::string& body, const Headers& headers,
                   std::chrono::milliseconds timeout = std::chrono::seconds(120));

inline bool is_transient(int status) { return status == 429 || status >= 500; }

}  // namespace litscape::http
