#pragma once

#include <string>

#include <json.hpp>

#include "swarm/service.hpp"

namespace httplib {
class Server;
}

namespace swarm {

/// Client-facing form of a page: {query, page, results: [{rank, url, title,
/// snippet, click_token}]}. The recommended flag is deliberately left out.
nlohmann::ordered_json serp_to_json(const SerpPage& page);

inline constexpr const char* session_cookie = "sid";

/// Registers /search, /click, /healthz and /stats on `server`.
void install_routes(httplib::Server& server, SearchService& service);

}  // namespace swarm
