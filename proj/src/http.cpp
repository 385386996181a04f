#include "swarm/http.hpp"

#include <httplib.h>

#include "swarm/digest.hpp"
#include "swarm/error.hpp"

namespace swarm {

nlohmann::ordered_json serp_to_json(const SerpPage& page) {
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& r : page.results) {
        results.push_back({{"rank", r.rank},
                           {"url", r.url.url()},
                           {"title", r.title},
                           {"snippet", r.snippet},
                           {"click_token", r.click_token}});
    }
    nlohmann::ordered_json out;
    out["query"] = page.query;
    out["page"] = page.page_number;
    out["results"] = std::move(results);
    return out;
}

namespace {

std::string cookie_value(const httplib::Request& req, const std::string& name) {
    const auto header = req.get_header_value("Cookie");
    std::size_t pos = 0;
    while (pos < header.size()) {
        auto end = header.find(';', pos);
        if (end == std::string::npos) end = header.size();
        auto part = header.substr(pos, end - pos);
        part.erase(0, part.find_first_not_of(' '));
        if (part.rfind(name + "=", 0) == 0) return part.substr(name.size() + 1);
        pos = end + 1;
    }
    return {};
}

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
    res.status = status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(body.dump(), "application/json");
}

}  // namespace

void install_routes(httplib::Server& server, SearchService& service) {
    server.Get("/search", [&service](const httplib::Request& req, httplib::Response& res) {
        auto sid = cookie_value(req, session_cookie);
        if (sid.empty()) {
            sid = random_hex(16);
            res.set_header("Set-Cookie", std::string(session_cookie) + "=" + sid + "; Path=/; HttpOnly");
        }
        int page = 1;
        if (req.has_param("p")) {
            try {
                page = std::stoi(req.get_param_value("p"));
            } catch (const std::exception&) {
                send_json(res, 400, {{"error", "page must be an integer"}});
                return;
            }
        }
        try {
            auto serp = service.handle_search(req.get_param_value("q"), page, sid, service.now());
            send_json(res, 200, serp_to_json(serp));
        } catch (const Error& e) {
            const bool bad_request = e.code() == Errc::invalid_query || e.code() == Errc::invalid_argument;
            send_json(res, bad_request ? 400 : 500, {{"error", e.what()}});
        }
    });

    server.Get("/click", [&service](const httplib::Request& req, httplib::Response& res) {
        auto target = service.handle_click(req.get_param_value("t"), cookie_value(req, session_cookie),
                                           service.now());
        if (!target) {
            send_json(res, 404, {{"error", "unknown or used click token"}});
            return;
        }
        res.set_redirect(*target, 302);
    });

    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok\n", "text/plain");
    });

    server.Get("/stats", [&service](const httplib::Request&, httplib::Response& res) {
        const auto s = service.stats();
        send_json(res, 200,
                  {{"queries", s.queries}, {"clicks", s.clicks}, {"trails", s.trails},
                   {"store_bytes", s.store_bytes}});
    });
}

}  // namespace swarm
