/// @file http.hpp
/// @brief Minimal JSON-over-HTTP client used by the provider implementations.

#pragma once

#include <chrono>
#include <map>
#include <string>

namespace crossling::http {

struct Response {
    int status = 0;  ///< 0 when the connection itself failed
    std::string body;
    std::string error;  ///< transport error description, if any
};

/// POST @p body to base_url + path. base_url may carry a path prefix,
/// e.g. "https://api.example.com/v1".
Response post_json(const std::string& base_url, const std::string& path, const std::string& body,
                   const std::map<std::string, std::string>& headers,
                   std::chrono::seconds timeout = std::chrono::seconds(120));

/// Reads an environment variable; empty string when unset.
std::string env_or_empty(const std::string& name);

}  // namespace crossling::http
