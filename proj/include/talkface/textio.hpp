#pragma once

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace talkface::textio {

/// Shortest decimal form that parses back to the identical double.
void append_double(std::string& out, double v);
/// Exact hexadecimal float form (used for checkpoints).
void append_hexfloat(std::string& out, double v);

bool parse_double(std::string_view token, double& out);
bool parse_hexfloat(std::string_view token, double& out);
bool parse_int(std::string_view token, long& out);

/// Whitespace tokenizer over a single line.
std::vector<std::string_view> split(std::string_view line);

/// Cursor over the tokens of one record line. Errors are data errors naming
/// the file, line number and byte offset of the offending token.
class TokenCursor {
public:
    TokenCursor(std::string_view line, std::size_t line_offset, std::size_t line_no, std::string name);

    [[noreturn]] void error(const std::string& msg, std::size_t at_token) const;
    [[noreturn]] void error(const std::string& msg) const { error(msg, pos_); }

    bool done() const { return pos_ == tokens_.size(); }
    bool peek(std::string_view tag) const { return pos_ < tokens_.size() && tokens_[pos_] == tag; }
    std::size_t position() const { return pos_; }

    void expect(std::string_view tag);
    /// Finite decimal real.
    double real();
    long integer();

private:
    std::vector<std::string_view> tokens_;
    const char* base_;
    std::size_t offset_;
    std::size_t line_no_;
    std::string name_;
    std::size_t pos_ = 0;
};

/// Splits text into newline-terminated lines. A final line without a
/// terminator is a truncated record and raises a data error with its offset.
struct Line {
    std::string_view text;
    std::size_t offset = 0;
    std::size_t number = 0;
};
std::vector<Line> lines(std::string_view text, const std::string& name);

}  // namespace talkface::textio
