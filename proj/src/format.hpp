#pragma once

#include <string>
#include <string_view>

namespace dosskit::detail {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(std::string_view text);

}  // namespace dosskit::detail
