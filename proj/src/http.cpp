#include "litscape/http.hpp"

#include "litscape/common.hpp"

#include <httplib.h>

namespace litscape::http {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(ErrorKind::Config, "URL without scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Client make_client(const std::string& origin, std::chrono::milliseconds timeout) {
    httplib::Client cli(origin);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                               0);
    auto us = std::chrono::duration_cast<std::chrono::microseconds>(timeout).count();
    cli.set_read_timeout(us / 1000000, us % 1000000);
    cli.set_write_timeout(us / 1000000, us % 1000000);
    cli.set_follow_location(true);
    return cli;
}

}  // namespace

Response get(const std::string& url, const Params& params, std::chrono::milliseconds timeout) {
    auto [origin, path] = split_url(url);
    auto cli = make_client(origin, timeout);
    httplib::Params hp(params.begin(), params.end());
    auto res = cli.Get(path, hp, httplib::Headers{});
    if (!res)
        throw Error(ErrorKind::Network,
                    "GET " + url + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

Response post_json(const std::string& url, const std::string& body, const Headers& headers,
                   std::chrono::milliseconds timeout) {
    auto [origin, path] = split_url(url);
    auto cli = make_client(origin, timeout);
    httplib::Headers hh(headers.begin(), headers.end());
    auto res = cli.Post(path, hh, body, "application/json");
    if (!res)
        throw Error(ErrorKind::Network,
                    "POST " + url + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

}  // namespace litscape::http
