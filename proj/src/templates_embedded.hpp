#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gnssrag::detail {

/// (file stem, contents) for every file under templates/v1, generated at configure time.
const std::vector<std::pair<std::string, std::string>>& embedded_templates();

}  // namespace gnssrag::detail
