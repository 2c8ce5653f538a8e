#pragma once

#include <string>

namespace ted {

// Shortest decimal string that parses back to exactly the same double;
// keeps CSV reports byte-reproducible across runs.
std::string csv_double(double v);

}  // namespace ted
