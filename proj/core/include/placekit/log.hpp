#pragma once

#include <functional>
#include <string_view>

namespace placekit {

// Library warnings go through this sink; the default writes a line to
// standard error. Passing an empty function silences warnings.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace placekit
