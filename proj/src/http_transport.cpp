#include <httplib.h>

#include "attn/fetch.hpp"

namespace attn {

HttpTransport make_http_transport(std::chrono::seconds timeout) {
    return [timeout](const std::string& base_url, const std::string& path) {
        httplib::Client client(base_url);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_follow_location(true);
        auto res = client.Get(path);
        if (!res) return HttpResponse{0, {}};
        return HttpResponse{res->status, res->body};
    };
}

} // namespace attn
