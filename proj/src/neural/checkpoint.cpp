#include "talkface/neural/checkpoint.hpp"

#include <sstream>

#include "talkface/error.hpp"
#include "talkface/hash.hpp"
#include "talkface/textio.hpp"

namespace talkface::nn {

namespace {

constexpr std::string_view kMagic = "talkface-checkpoint 1";

void append_values(std::string& out, const std::vector<double>& values)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ' ';
        textio::append_hexfloat(out, values[i]);
    }
    out += '\n';
}

class LineReader {
public:
    LineReader(std::string_view text, std::string name) : text_(text), name_(std::move(name)) { }

    bool next(std::string_view& line)
    {
        if (pos_ >= text_.size())
            return false;
        const std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos)
            fail(ErrorKind::data, name_ + ": truncated line at byte " + std::to_string(pos_));
        line = text_.substr(pos_, end - pos_);
        line_start_ = pos_;
        pos_ = end + 1;
        ++line_no_;
        return true;
    }

    std::string where() const
    {
        return name_ + ":" + std::to_string(line_no_) + " (byte " + std::to_string(line_start_) + ")";
    }

    std::vector<double> values(std::size_t expected)
    {
        std::string_view line;
        require(next(line), ErrorKind::data, name_ + ": missing value line");
        const auto tokens = textio::split(line);
        require(tokens.size() == expected, ErrorKind::data,
                where() + ": expected " + std::to_string(expected) + " values, got " + std::to_string(tokens.size()));
        std::vector<double> out(expected);
        for (std::size_t i = 0; i < expected; ++i)
            require(textio::parse_hexfloat(tokens[i], out[i]), ErrorKind::data, where() + ": bad value");
        return out;
    }

private:
    std::string_view text_;
    std::string name_;
    std::size_t pos_ = 0;
    std::size_t line_start_ = 0;
    std::size_t line_no_ = 0;
};

}  // namespace

std::string save_checkpoint(const std::filesystem::path& path, const ParameterSet& params,
                            const std::map<std::string, std::string>& meta, const Adam* adam)
{
    std::string body(kMagic);
    body += '\n';
    for (const auto& [k, v] : meta) {
        require(k.find_first_of(" \n") == std::string::npos && v.find('\n') == std::string::npos, ErrorKind::usage,
                "checkpoint metadata must be single-line");
        body += "meta " + k + " " + v + "\n";
    }
    for (const Parameter& p : params.all()) {
        body += "param " + p.name + " " + std::to_string(p.value.rank());
        for (std::size_t d : p.value.shape)
            body += " " + std::to_string(d);
        body += " fan_in " + std::to_string(p.fan_in) + "\n";
        append_values(body, p.value.values);
    }
    if (adam) {
        body += "adam " + std::to_string(adam->steps()) + "\n";
        for (std::size_t i = 0; i < params.size(); ++i) {
            body += "adam.m " + params[i].name + "\n";
            append_values(body, adam->first_moment()[i]);
            body += "adam.v " + params[i].name + "\n";
            append_values(body, adam->second_moment()[i]);
        }
    }
    const std::string digest = sha256_hex(body);
    body += "sha256 " + digest + "\n";
    write_file(path, body);
    return digest;
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    const std::string text = read_file(path);
    const std::string name = path.string();
    require(text.size() > kMagic.size() && text.compare(0, kMagic.size(), kMagic) == 0, ErrorKind::data,
            name + ": not a talkface checkpoint");
    require(text.back() == '\n', ErrorKind::data, name + ": truncated checkpoint");
    const std::size_t last = text.rfind('\n', text.size() - 2);
    require(last != std::string::npos, ErrorKind::data, name + ": truncated checkpoint");
    const std::string_view trailer(text.data() + last + 1, text.size() - last - 2);
    require(trailer.rfind("sha256 ", 0) == 0, ErrorKind::data, name + ": missing checksum trailer");
    const std::string_view body(text.data(), last + 1);
    Checkpoint ck;
    ck.digest = std::string(trailer.substr(7));
    require(sha256_hex(body) == ck.digest, ErrorKind::data, name + ": checksum mismatch");

    LineReader reader(body, name);
    std::string_view line;
    reader.next(line);  // magic
    while (reader.next(line)) {
        const auto tok = textio::split(line);
        require(!tok.empty(), ErrorKind::data, reader.where() + ": empty line");
        if (tok[0] == "meta") {
            require(tok.size() >= 2, ErrorKind::data, reader.where() + ": bad meta line");
            const std::size_t vpos = 5 + tok[1].size();  // after "meta <key>"
            std::string value(vpos < line.size() ? line.substr(vpos + 1) : std::string_view{});
            ck.meta[std::string(tok[1])] = value;
        } else if (tok[0] == "param") {
            long rank = 0;
            require(tok.size() >= 3 && textio::parse_int(tok[2], rank) && rank >= 0 &&
                        tok.size() == static_cast<std::size_t>(rank) + 5,
                    ErrorKind::data, reader.where() + ": bad param header");
            std::vector<std::size_t> shape;
            for (long d = 0; d < rank; ++d) {
                long dim = 0;
                require(textio::parse_int(tok[3 + d], dim) && dim >= 0, ErrorKind::data,
                        reader.where() + ": bad dimension");
                shape.push_back(static_cast<std::size_t>(dim));
            }
            long fan_in = 1;
            require(textio::parse_int(tok[tok.size() - 1], fan_in), ErrorKind::data, reader.where() + ": bad fan_in");
            const ParamId id = ck.params.add(std::string(tok[1]), shape, static_cast<std::size_t>(fan_in));
            ck.params[id].value.values = reader.values(ck.params[id].value.size());
        } else if (tok[0] == "adam") {
            long steps = 0;
            require(tok.size() == 2 && textio::parse_int(tok[1], steps), ErrorKind::data,
                    reader.where() + ": bad adam header");
            ck.adam_steps = static_cast<std::uint64_t>(steps);
        } else if (tok[0] == "adam.m" || tok[0] == "adam.v") {
            require(tok.size() == 2, ErrorKind::data, reader.where() + ": bad moment header");
            const ParamId id = ck.params.find(std::string(tok[1]));
            auto& dst = tok[0] == "adam.m" ? ck.adam_m : ck.adam_v;
            require(dst.size() == id, ErrorKind::data, reader.where() + ": optimizer moments out of order");
            dst.push_back(reader.values(ck.params[id].value.size()));
        } else {
            fail(ErrorKind::data, reader.where() + ": unknown record '" + std::string(tok[0]) + "'");
        }
    }
    if (ck.adam_steps)
        require(ck.adam_m.size() == ck.params.size() && ck.adam_v.size() == ck.params.size(), ErrorKind::data,
                name + ": incomplete optimizer state");
    return ck;
}

void restore_params(ParameterSet& into, const Checkpoint& ckpt)
{
    require(into.size() == ckpt.params.size(), ErrorKind::data,
            "checkpoint has " + std::to_string(ckpt.params.size()) + " tensors, model expects " +
                std::to_string(into.size()));
    for (std::size_t i = 0; i < into.size(); ++i) {
        const Parameter& src = ckpt.params[i];
        Parameter& dst = into[i];
        require(src.name == dst.name && src.value.shape == dst.value.shape, ErrorKind::data,
                "checkpoint tensor " + src.name + " does not match model tensor " + dst.name);
        dst.value.values = src.value.values;
    }
}

void restore_optimizer(Adam& into, const Checkpoint& ckpt)
{
    require(ckpt.adam_steps.has_value(), ErrorKind::data, "checkpoint carries no optimizer state");
    require(into.first_moment().size() == ckpt.adam_m.size(), ErrorKind::data, "optimizer state size mismatch");
    into.first_moment() = ckpt.adam_m;
    into.second_moment() = ckpt.adam_v;
    into.set_steps(*ckpt.adam_steps);
}

}  // namespace talkface::nn
