#include "rase/record_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <type_traits>

#include "rase/errors.hpp"

namespace rase {

namespace {

constexpr char kMagic[8] = {'R', 'A', 'S', 'E', 'D', 'M', 'P', '\0'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), sizeof(T));
  } else {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
}

template <typename T>
T get_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes{};
  in.read(bytes.data(), sizeof(T));
  if (!in) throw DataFormatError("record dump truncated");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_dump(std::ostream& out, const RunDump& dump) {
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, dump.format_version);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dump.header_json.size()));
  out.write(dump.header_json.data(),
            static_cast<std::streamsize>(dump.header_json.size()));

  put_le<std::uint64_t>(out, dump.records.size());
  const std::uint64_t samples = dump.records.empty() ? 0 : dump.records.front().trace.size();
  put_le<std::uint64_t>(out, samples);

  for (const ShotRecord& rec : dump.records) {
    if (rec.trace.size() != samples) {
      throw DataFormatError("write_dump: ragged shot records");
    }
    put_le<std::uint64_t>(out, rec.shot_id);
    put_le<std::uint64_t>(out, rec.truth.rng_stream_id);
    put_le<double>(out, rec.truth.interferometer_phase_rad);
    for (const auto& s : rec.trace) {
      put_le<double>(out, s.real());
      put_le<double>(out, s.imag());
    }
  }
  if (!out) throw DataFormatError("write_dump: stream write failed");
}

void write_dump_file(const std::string& path, const RunDump& dump) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataFormatError("cannot open for writing: " + path);
  write_dump(out, dump);
}

RunDump read_dump(std::istream& in) {
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataFormatError("not a rase record dump (bad magic)");
  }

  RunDump dump;
  dump.format_version = get_le<std::uint32_t>(in);
  if (dump.format_version != kDumpFormatVersion) {
    throw DataFormatError("record dump format version " +
                          std::to_string(dump.format_version) + " unsupported; this build " +
                          "reads version " + std::to_string(kDumpFormatVersion) +
                          " and no migration path exists");
  }

  const auto header_len = get_le<std::uint32_t>(in);
  dump.header_json.resize(header_len);
  in.read(dump.header_json.data(), header_len);
  if (!in) throw DataFormatError("record dump truncated in header");

  const auto n_shots = get_le<std::uint64_t>(in);
  const auto samples = get_le<std::uint64_t>(in);
  dump.records.resize(n_shots);
  for (ShotRecord& rec : dump.records) {
    rec.shot_id = get_le<std::uint64_t>(in);
    rec.truth.rng_stream_id = get_le<std::uint64_t>(in);
    rec.truth.interferometer_phase_rad = get_le<double>(in);
    rec.trace.resize(samples);
    for (auto& s : rec.trace) {
      const double re = get_le<double>(in);
      const double im = get_le<double>(in);
      s = {re, im};
    }
  }
  return dump;
}

RunDump read_dump_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open record dump: " + path);
  return read_dump(in);
}

}  // namespace rase
