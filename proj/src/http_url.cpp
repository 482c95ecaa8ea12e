#include "gnssrag/http_url.hpp"

#include "gnssrag/error.hpp"

namespace gnssrag {

HttpUrl parse_http_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw ParameterError("url", "missing scheme in '" + std::string(url) + "'");
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw ParameterError("url", "unsupported scheme '" + std::string(scheme) + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

}  // namespace gnssrag
