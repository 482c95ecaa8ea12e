#pragma once

#include <string>
#include <string_view>

namespace gnssrag {

/// "http://host:port/path" split into the client origin and request path.
struct HttpUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // starts with '/'
};

/// Throws ParameterError("url") unless the scheme is http or https.
HttpUrl parse_http_url(std::string_view url);

}  // namespace gnssrag
