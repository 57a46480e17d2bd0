#ifndef SQZ_TRACE_IO_HPP
#define SQZ_TRACE_IO_HPP

// SQZT trace files (little-endian):
//
//   char[4]  magic "SQZT"
//   u16      version (1: splitmix64-counter / Boost ziggurat generator)
//   u8       trace kind (0 squeezed, 1 shot, 2 electronic)
//   u64      sample_rate_hz
//   u64      rep_rate_hz
//   u64      n_samples
//   f64      ramp_start_rad
//   f64      ramp_end_rad
//   f64      clearance_db
//   u64      seed
//   u16      kernel_len
//   f64[kernel_len]  kernel
//   f32[n_samples]   samples

#include "sqz/synth.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sqz
{

inline constexpr char trace_magic[4] = {'S', 'Q', 'Z', 'T'};
inline constexpr std::uint16_t trace_version = 1;

void write_trace(std::ostream &out, const HomodyneTrace &trace);
void write_trace(const std::filesystem::path &path, const HomodyneTrace &trace);

HomodyneTrace read_trace(std::istream &in);
HomodyneTrace read_trace(const std::filesystem::path &path);

/// JSON array of {path, kind, avg_power_w}.
void write_manifest(const std::filesystem::path &path, const std::vector<ManifestEntry> &entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path &path);

std::string sha256_file(const std::filesystem::path &path);

} // namespace sqz

#endif // SQZ_TRACE_IO_HPP
