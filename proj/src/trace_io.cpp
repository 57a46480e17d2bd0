#include "sqz/trace_io.hpp"
#include "sqz/error.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <memory>

namespace sqz
{

namespace
{

static_assert(std::numeric_limits<float>::is_iec559 && std::numeric_limits<double>::is_iec559);

template <typename T>
void put_le(std::ostream &out, T value)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    const U bits = std::bit_cast<U>(value);
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream &in)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!in.read(reinterpret_cast<char *>(bytes.data()), bytes.size()))
        fail(ErrorCode::data, "trace file truncated in header");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bits |= static_cast<U>(bytes[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

} // namespace

void write_trace(std::ostream &out, const HomodyneTrace &trace)
{
    require(trace.kernel.size() <= 0xffff, "kernel too long for the trace format");
    out.write(trace_magic, 4);
    put_le<std::uint16_t>(out, trace_version);
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(trace.kind));
    put_le<std::uint64_t>(out, trace.sample_rate_hz);
    put_le<std::uint64_t>(out, trace.rep_rate_hz);
    put_le<std::uint64_t>(out, trace.samples.size());
    put_le<double>(out, trace.ramp_start_rad);
    put_le<double>(out, trace.ramp_end_rad);
    put_le<double>(out, trace.clearance_db);
    put_le<std::uint64_t>(out, trace.seed);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(trace.kernel.size()));
    for (double k : trace.kernel)
        put_le<double>(out, k);

    if constexpr (std::endian::native == std::endian::little)
    {
        out.write(reinterpret_cast<const char *>(trace.samples.data()),
                  static_cast<std::streamsize>(trace.samples.size() * sizeof(float)));
    }
    else
    {
        for (float s : trace.samples)
            put_le<float>(out, s);
    }
    if (!out)
        fail(ErrorCode::data, "failed writing trace");
}

void write_trace(const std::filesystem::path &path, const HomodyneTrace &trace)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorCode::data, "cannot open " + path.string() + " for writing");
    write_trace(out, trace);
}

HomodyneTrace read_trace(std::istream &in)
{
    char magic[4] = {};
    if (!in.read(magic, 4) || std::memcmp(magic, trace_magic, 4) != 0)
        fail(ErrorCode::data, "not an SQZT trace (bad magic)");
    const auto version = get_le<std::uint16_t>(in);
    if (version != trace_version)
        fail(ErrorCode::data, "unsupported SQZT version " + std::to_string(version));

    HomodyneTrace t;
    const auto kind = get_le<std::uint8_t>(in);
    if (kind > 2)
        fail(ErrorCode::data, "unknown trace kind " + std::to_string(kind));
    t.kind = static_cast<TraceKind>(kind);
    t.sample_rate_hz = get_le<std::uint64_t>(in);
    t.rep_rate_hz = get_le<std::uint64_t>(in);
    const auto n_samples = get_le<std::uint64_t>(in);
    t.ramp_start_rad = get_le<double>(in);
    t.ramp_end_rad = get_le<double>(in);
    t.clearance_db = get_le<double>(in);
    t.seed = get_le<std::uint64_t>(in);
    const auto kernel_len = get_le<std::uint16_t>(in);
    t.kernel.resize(kernel_len);
    for (auto &k : t.kernel)
        k = get_le<double>(in);

    if (n_samples > (std::uint64_t{1} << 34))
        fail(ErrorCode::data, "implausible sample count " + std::to_string(n_samples));
    t.samples.resize(n_samples);
    if constexpr (std::endian::native == std::endian::little)
    {
        const auto bytes = static_cast<std::streamsize>(n_samples * sizeof(float));
        if (!in.read(reinterpret_cast<char *>(t.samples.data()), bytes))
            fail(ErrorCode::data, "trace file truncated: expected " + std::to_string(n_samples) + " samples");
    }
    else
    {
        for (auto &s : t.samples)
            s = get_le<float>(in);
    }
    if (in.peek() != std::char_traits<char>::eof())
        fail(ErrorCode::data, "trailing bytes after trace samples");
    return t;
}

HomodyneTrace read_trace(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::data, "cannot open trace " + path.string());
    try
    {
        return read_trace(in);
    }
    catch (const Error &e)
    {
        fail(e.code(), path.string() + ": " + e.what());
    }
}

void write_manifest(const std::filesystem::path &path, const std::vector<ManifestEntry> &entries)
{
    nlohmann::json doc = nlohmann::json::array();
    for (const auto &e : entries)
        doc.push_back({{"path", e.path}, {"kind", to_string(e.kind)}, {"avg_power_w", e.avg_power_w}});
    std::ofstream out(path);
    if (!out)
        fail(ErrorCode::data, "cannot write manifest " + path.string());
    out << doc.dump(2) << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::data, "cannot open manifest " + path.string());
    std::vector<ManifestEntry> entries;
    try
    {
        const auto doc = nlohmann::json::parse(in);
        if (!doc.is_array())
            fail(ErrorCode::data, "manifest must be a JSON array");
        for (const auto &item : doc)
        {
            ManifestEntry e;
            e.path = item.at("path").get<std::string>();
            e.kind = parse_trace_kind(item.at("kind").get<std::string>());
            e.avg_power_w = item.at("avg_power_w").get<double>();
            entries.push_back(std::move(e));
        }
    }
    catch (const nlohmann::json::exception &e)
    {
        fail(ErrorCode::data, "manifest " + path.string() + ": " + e.what());
    }
    return entries;
}

std::string sha256_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::data, "cannot open " + path.string());

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 20);
    while (in)
    {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0)
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);

    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i)
    {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

} // namespace sqz
