#pragma once

#include <filesystem>

namespace ofdmlink {

/// Directory holding the packaged PDP and LDPC tables. Honors $OFDMLINK_DATA_DIR.
std::filesystem::path data_directory();

}  // namespace ofdmlink
