#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "talkface/audiofeat.hpp"
#include "talkface/error.hpp"

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace talkface::audio {

namespace {

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t at)
{
    T v;
    std::memcpy(&v, buf.data() + at, sizeof(T));
    return v;
}

template <typename T>
void put_le(std::string& out, T v)
{
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    out.append(bytes, sizeof(T));
}

void write_wav(const std::filesystem::path& path, const Waveform& w, std::uint16_t format, std::uint16_t bits)
{
    const std::uint32_t bytes_per_sample = bits / 8;
    const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * bytes_per_sample);
    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    put_le<std::uint32_t>(out, 36 + data_bytes);
    out += "WAVEfmt ";
    put_le<std::uint32_t>(out, 16);
    put_le<std::uint16_t>(out, format);
    put_le<std::uint16_t>(out, 1);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate) * bytes_per_sample);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(bytes_per_sample));
    put_le<std::uint16_t>(out, bits);
    out += "data";
    put_le<std::uint32_t>(out, data_bytes);
    for (double s : w.samples) {
        if (format == 3) {
            put_le<float>(out, static_cast<float>(s));
        } else {
            const double clipped = std::clamp(s, -1.0, 1.0);
            put_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(clipped * 32767.0)));
        }
    }
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::data, "cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::data, "cannot open " + path.string());
    const std::vector<char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const std::string name = path.string();
    require(buf.size() >= 12 && std::memcmp(buf.data(), "RIFF", 4) == 0 && std::memcmp(buf.data() + 8, "WAVE", 4) == 0,
            ErrorKind::data, name + ": not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const std::string id(buf.data() + pos, 4);
        const auto size = read_le<std::uint32_t>(buf, pos + 4);
        const std::size_t body = pos + 8;
        require(body + size <= buf.size(), ErrorKind::data,
                name + ": chunk '" + id + "' truncated at byte " + std::to_string(body));
        if (id == "fmt ") {
            require(size >= 16, ErrorKind::data, name + ": short fmt chunk");
            format = read_le<std::uint16_t>(buf, body);
            channels = read_le<std::uint16_t>(buf, body + 2);
            rate = read_le<std::uint32_t>(buf, body + 4);
            bits = read_le<std::uint16_t>(buf, body + 14);
            if (format == 0xFFFE && size >= 26)  // WAVE_FORMAT_EXTENSIBLE: subformat tag
                format = read_le<std::uint16_t>(buf, body + 24);
            have_fmt = true;
        } else if (id == "data") {
            require(have_fmt, ErrorKind::data, name + ": data chunk before fmt chunk");
            require(channels == 1, ErrorKind::data, name + ": expected mono audio");
            Waveform w;
            w.sample_rate = static_cast<int>(rate);
            if (format == 1 && bits == 16) {
                w.samples.resize(size / 2);
                for (std::size_t i = 0; i < w.samples.size(); ++i)
                    w.samples[i] = read_le<std::int16_t>(buf, body + 2 * i) / 32768.0;
            } else if (format == 3 && bits == 32) {
                w.samples.resize(size / 4);
                for (std::size_t i = 0; i < w.samples.size(); ++i)
                    w.samples[i] = read_le<float>(buf, body + 4 * i);
            } else {
                fail(ErrorKind::data, name + ": unsupported sample format (need PCM16 or float32)");
            }
            return w;
        }
        pos = body + size + (size & 1u);
    }
    fail(ErrorKind::data, name + ": no data chunk");
}

void write_wav_float(const std::filesystem::path& path, const Waveform& w)
{
    write_wav(path, w, 3, 32);
}

void write_wav_pcm16(const std::filesystem::path& path, const Waveform& w)
{
    write_wav(path, w, 1, 16);
}

}  // namespace talkface::audio
