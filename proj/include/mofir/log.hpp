#pragma once

#include <string>

namespace mofir {

/// Sets the global log level from MOFIR_LOG (error, info or debug; default
/// info). Unrecognised values fall back to info with a warning.
void init_logging();

}  // namespace mofir
