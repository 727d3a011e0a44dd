#pragma once

// In-process HTTP stubs on 127.0.0.1 with a random port.

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace stub {

class Server {
public:
    Server() = default;
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;
    ~Server() { stop(); }

    httplib::Server& http() { return server_; }

    void start() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }
    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port_) + path;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

inline std::string atom_feed(long total, int start, int count, const std::string& prefix = "2401.") {
    std::string xml =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<feed xmlns=\"http://www.w3.org/2005/Atom\" "
        "xmlns:opensearch=\"http://a9.com/-/spec/opensearch/1.1/\">\n"
        "  <title>ArXiv Query</title>\n"
        "  <opensearch:totalResults>" + std::to_string(total) + "</opensearch:totalResults>\n";
    for (int i = start; i < start + count && i < total; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "%s%05d", prefix.c_str(), i);
        xml += "  <entry>\n    <id>http://arxiv.org/abs/" + std::string(id) + "v1</id>\n"
               "    <title>Paper " + std::to_string(i) + "\n  on finance</title>\n"
               "    <summary>  Abstract of paper " + std::to_string(i) + ".  </summary>\n"
               "  </entry>\n";
    }
    return xml + "</feed>\n";
}

// Fake arXiv API with `total` matching papers; records every request.
struct Arxiv {
    struct Request {
        int start;
        int max_results;
        std::string query;
        std::chrono::steady_clock::time_point at;
    };

    explicit Arxiv(long total, int fail_first = 0, int fail_status = 503)
        : total_(total), fail_left_(fail_first), fail_status_(fail_status) {
        server.http().Get("/api/query", [this](const httplib::Request& req, httplib::Response& res) {
            Request r{std::stoi(req.get_param_value("start")),
                      std::stoi(req.get_param_value("max_results")),
                      req.get_param_value("search_query"), std::chrono::steady_clock::now()};
            {
                std::lock_guard lock(mu_);
                requests_.push_back(r);
            }
            if (fail_left_ > 0) {
                --fail_left_;
                res.status = fail_status_;
                res.set_content("busy", "text/plain");
                return;
            }
            res.set_content(atom_feed(total_, r.start, r.max_results), "application/atom+xml");
        });
        server.start();
    }

    std::string endpoint() const { return server.url("/api/query"); }
    std::vector<Request> requests() {
        std::lock_guard lock(mu_);
        return requests_;
    }

    Server server;

private:
    long total_;
    std::atomic<int> fail_left_;
    int fail_status_;
    std::mutex mu_;
    std::vector<Request> requests_;
};

}  // namespace stub
