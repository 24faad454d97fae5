// HTTP side of the probe: the live client and the local simulator shim.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "riga/probe.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

namespace riga::probe {

namespace {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // without trailing slash
};

SplitUrl split_url(std::string url) {
  if (url.find("://") == std::string::npos) url = "https://" + url;
  const auto host_start = url.find("://") + 3;
  const auto slash = url.find('/', host_start);
  SplitUrl out;
  out.base = url.substr(0, slash);
  out.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

void set_timeouts(httplib::Client& cli, std::uint64_t timeout_ms) {
  const auto secs = static_cast<time_t>(timeout_ms / 1000);
  const auto usecs = static_cast<time_t>((timeout_ms % 1000) * 1000);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
}

}  // namespace

bool HttpFetcher::get(const std::string& gateway, const cid::CidV0& cid, std::uint64_t timeout_ms) {
  const SplitUrl url = split_url(gateway);
  httplib::Client cli(url.base);
  cli.set_follow_location(true);
  set_timeouts(cli, timeout_ms);
  const auto res = cli.Get(url.path + "/ipfs/" + cid.text());
  return res && res->status >= 200 && res->status < 300 && !res->body.empty();
}

struct ShimServer::Impl {
  // How long the shim holds a request it cannot serve; clients give up
  // well before this.
  static constexpr std::uint64_t kHangMs = 30000;

  const store::Store& store;
  gateway::GatewayProfile profile;
  httplib::Server server;
  std::thread thread;
  std::mutex mu;
  std::atomic<bool> stopping{false};
  int port = -1;

  Impl(const store::Store& s, gateway::GatewayProfile p) : store(s), profile(std::move(p)) {}

  void nap(std::uint64_t ms) {
    const auto until = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
    while (!stopping && std::chrono::steady_clock::now() < until) {
      std::this_thread::sleep_for(std::min<std::chrono::nanoseconds>(
          std::chrono::milliseconds(10), until - std::chrono::steady_clock::now()));
    }
  }

  void handle(const httplib::Request& req, httplib::Response& res) {
    std::optional<cid::CidV0> cid;
    try {
      cid = cid::CidV0::parse(req.matches[1].str());
    } catch (const cid::CodecError&) {
      res.status = 400;
      return;
    }
    gateway::RequestResult result = [&] {
      std::lock_guard lock(mu);
      return profile.request(store, *cid, kHangMs, 0);
    }();
    if (auto* f = std::get_if<gateway::Fetched>(&result)) {
      nap(f->latency_ms);
      res.status = 200;
      res.set_content(std::string(f->content.begin(), f->content.end()), "application/octet-stream");
      return;
    }
    nap(std::get<gateway::Dropped>(result).elapsed_ms);
    res.status = 504;
  }
};

ShimServer::ShimServer(const store::Store& store, gateway::GatewayProfile profile)
    : impl_(std::make_unique<Impl>(store, std::move(profile))) {}

ShimServer::~ShimServer() { stop(); }

void ShimServer::start() {
  if (impl_->thread.joinable()) return;
  impl_->server.Get(R"(/ipfs/([^/]+))",
                    [this](const httplib::Request& req, httplib::Response& res) { impl_->handle(req, res); });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port < 0) throw std::runtime_error("shim: cannot bind a local port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ShimServer::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  impl_->stopping = true;
  impl_->server.stop();
  impl_->thread.join();
}

std::string ShimServer::base_url() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

}  // namespace riga::probe
