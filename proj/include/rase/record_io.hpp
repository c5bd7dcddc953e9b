#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rase/synth.hpp"

namespace rase {

inline constexpr std::uint32_t kDumpFormatVersion = 1;

/// Self-describing run dump: magic + version + a JSON header echoing the
/// configuration, followed by fixed-size binary shot blocks (little-endian
/// 64-bit floats, interleaved real/imag). Byte-identical for identical
/// (config, seed) inputs.
struct RunDump {
  std::uint32_t format_version = kDumpFormatVersion;
  std::string header_json;  // config echo plus run metadata
  std::vector<ShotRecord> records;
};

void write_dump(std::ostream& out, const RunDump& dump);
void write_dump_file(const std::string& path, const RunDump& dump);

// Throws DataFormatError on bad magic, truncation, or a format version this
// build cannot migrate.
RunDump read_dump(std::istream& in);
RunDump read_dump_file(const std::string& path);

}  // namespace rase
