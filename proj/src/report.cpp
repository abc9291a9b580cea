#include "mwtrap/report.hpp"

#include <cmath>
#include <cstdio>

#include "mwtrap/io.hpp"

namespace mwtrap::report {

namespace {

void append_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void append_number(std::string& out, double v) {
    if (std::isnan(v)) {
        out += "null";
    } else if (std::isinf(v)) {
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
    } else {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        out += buf;
    }
}

void dump_value(std::string& out, const Json& j, int indent, int depth) {
    const std::string pad(std::size_t(indent) * std::size_t(depth + 1), ' ');
    const std::string close_pad(std::size_t(indent) * std::size_t(depth), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                append_escaped(out, key);
                out += ": ";
                dump_value(out, value, indent, depth + 1);
            }
            out += '\n' + close_pad + '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& value : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                dump_value(out, value, indent, depth + 1);
            }
            out += '\n' + close_pad + ']';
            return;
        }
        case Json::value_t::string:
            append_escaped(out, j.get<std::string>());
            return;
        case Json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            return;
        case Json::value_t::number_integer:
            out += std::to_string(j.get<long long>());
            return;
        case Json::value_t::number_unsigned:
            out += std::to_string(j.get<unsigned long long>());
            return;
        case Json::value_t::number_float:
            append_number(out, j.get<double>());
            return;
        default:
            out += "null";
            return;
    }
}

}  // namespace

std::string dump(const Json& j, int indent) {
    std::string out;
    dump_value(out, j, indent, 0);
    out += '\n';
    return out;
}

std::string digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_digest(const std::filesystem::path& path) {
    return digest(io::read_text_file(path));
}

Json make_report(const std::string& command) {
    Json j;
    j["command"] = command;
    j["schema_version"] = 1;
    j["params"] = Json::object();
    j["inputs"] = Json::object();
    j["results"] = Json::object();
    j["warnings"] = Json::array();
    return j;
}

}  // namespace mwtrap::report
