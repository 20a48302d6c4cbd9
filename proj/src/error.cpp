#include "talkface/error.hpp"

namespace talkface {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::structural: return "structural error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::geometry: return "geometry error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::data: return "data error";
    case ErrorKind::config: return "config error";
    case ErrorKind::usage: return "usage error";
    }
    return "error";
}

}  // namespace talkface
