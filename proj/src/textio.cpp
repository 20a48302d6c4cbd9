#include "talkface/textio.hpp"

#include <array>
#include <cmath>

#include "talkface/error.hpp"

namespace talkface::textio {

void append_double(std::string& out, double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), res.ptr);
}

void append_hexfloat(std::string& out, double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::hex);
    out.append(buf.data(), res.ptr);
}

bool parse_double(std::string_view token, double& out)
{
    const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

bool parse_hexfloat(std::string_view token, double& out)
{
    bool negative = false;
    if (!token.empty() && token.front() == '-') {
        negative = true;
        token.remove_prefix(1);
    }
    const auto res = std::from_chars(token.data(), token.data() + token.size(), out, std::chars_format::hex);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        return false;
    if (negative)
        out = -out;
    return true;
}

bool parse_int(std::string_view token, long& out)
{
    const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

TokenCursor::TokenCursor(std::string_view line, std::size_t line_offset, std::size_t line_no, std::string name)
  : tokens_(split(line)), base_(line.data()), offset_(line_offset), line_no_(line_no), name_(std::move(name))
{ }

void TokenCursor::error(const std::string& msg, std::size_t at_token) const
{
    std::size_t byte = offset_;
    if (at_token < tokens_.size())
        byte += static_cast<std::size_t>(tokens_[at_token].data() - base_);
    fail(ErrorKind::data,
         name_ + ":" + std::to_string(line_no_) + ": " + msg + " (byte " + std::to_string(byte) + ")");
}

void TokenCursor::expect(std::string_view tag)
{
    if (pos_ >= tokens_.size())
        error("truncated record, expected '" + std::string(tag) + "'");
    if (tokens_[pos_] != tag)
        error("expected '" + std::string(tag) + "', found '" + std::string(tokens_[pos_]) + "'");
    ++pos_;
}

double TokenCursor::real()
{
    if (pos_ >= tokens_.size())
        error("truncated record");
    double v = 0.0;
    if (!parse_double(tokens_[pos_], v) || !std::isfinite(v))
        error("bad number '" + std::string(tokens_[pos_]) + "'");
    ++pos_;
    return v;
}

long TokenCursor::integer()
{
    if (pos_ >= tokens_.size())
        error("truncated record");
    long v = 0;
    if (!parse_int(tokens_[pos_], v))
        error("bad integer '" + std::string(tokens_[pos_]) + "'");
    ++pos_;
    return v;
}

std::vector<Line> lines(std::string_view text, const std::string& name)
{
    std::vector<Line> out;
    std::size_t offset = 0;
    while (offset < text.size()) {
        const std::size_t eol = text.find('\n', offset);
        if (eol == std::string_view::npos)
            fail(ErrorKind::data, name + ":" + std::to_string(out.size() + 1) +
                                      ": truncated record, no line terminator (byte " + std::to_string(offset) + ")");
        out.push_back({text.substr(offset, eol - offset), offset, out.size() + 1});
        offset = eol + 1;
    }
    return out;
}

}  // namespace talkface::textio
