// Lives in its own translation unit so the rest of the library never pays
// for the httplib header.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "promptforge/backend.hpp"

namespace promptforge {

namespace {

class HttplibTransport : public Transport {
  public:
    explicit HttplibTransport(int timeout_seconds) : timeout_seconds_(timeout_seconds) {}

    Response post(const std::string& url, const std::string& bearer_token,
                  const std::string& json_body) override {
        // Split "scheme://authority/path" into client base and request path.
        const size_t scheme_end = url.find("://");
        if (scheme_end == std::string::npos) return {};
        const size_t path_start = url.find('/', scheme_end + 3);
        const std::string base =
            path_start == std::string::npos ? url : url.substr(0, path_start);
        const std::string path =
            path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(base);
        client.set_connection_timeout(timeout_seconds_, 0);
        client.set_read_timeout(timeout_seconds_, 0);
        httplib::Headers headers;
        if (!bearer_token.empty())
            headers.emplace("Authorization", "Bearer " + bearer_token);
        auto result = client.Post(path, headers, json_body, "application/json");
        if (!result) return {};
        return Response{true, result->status, result->body};
    }

  private:
    int timeout_seconds_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(int timeout_seconds) {
    return std::make_unique<HttplibTransport>(timeout_seconds);
}

}  // namespace promptforge
