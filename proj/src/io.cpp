#include "mwtrap/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mwtrap/constants.hpp"
#include "mwtrap/errors.hpp"

namespace mwtrap::io {

namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

double parse_double(const std::string& token, long line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(token, &pos);
        if (pos != trim(token).size() && pos != token.size()) {
            throw std::invalid_argument(token);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError("invalid number '" + token + "'", line);
    }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

// Reads a CSV with an exact expected header; returns rows of numeric fields.
std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          const std::string& header) {
    const auto lines = read_lines(path);
    if (lines.empty()) {
        throw ParseError("'" + path.string() + "' is empty", 1);
    }
    if (trim(lines[0]) != header) {
        throw ParseError("expected header '" + header + "' in '" + path.string() + "'", 1);
    }
    const std::size_t ncols = split(header, ',').size();
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != ncols) {
            throw ParseError("expected " + std::to_string(ncols) + " fields, got " +
                                 std::to_string(fields.size()),
                             long(i + 1));
        }
        std::vector<double> row;
        row.reserve(ncols);
        for (const auto& f : fields) row.push_back(parse_double(f, long(i + 1)));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ParseError("'" + path.string() + "' has no data rows", long(lines.size()));
    }
    return rows;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

}  // namespace

fitting::FrequencyTrace read_touchstone_s1p(const std::filesystem::path& path) {
    const auto lines = read_lines(path);

    double unit_scale = 1e9;  // Touchstone default frequency unit is GHz
    TouchstoneFormat format = TouchstoneFormat::MA;
    bool option_seen = false;

    fitting::FrequencyTrace trace;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const long lineno = long(i + 1);
        std::string line = lines[i];
        const auto bang = line.find('!');
        if (bang != std::string::npos) line = line.substr(0, bang);
        line = trim(line);
        if (line.empty()) continue;

        if (line[0] == '#') {
            if (option_seen) continue;  // the standard ignores repeated option lines
            option_seen = true;
            std::istringstream is(line.substr(1));
            std::string tok;
            std::vector<std::string> toks;
            while (is >> tok) toks.push_back(upper(tok));
            // Format: # [unit] [S] [RI|MA|DB] [R n]; all fields optional.
            for (std::size_t k = 0; k < toks.size(); ++k) {
                const std::string& t = toks[k];
                if (t == "HZ") unit_scale = 1.0;
                else if (t == "KHZ") unit_scale = 1e3;
                else if (t == "MHZ") unit_scale = 1e6;
                else if (t == "GHZ") unit_scale = 1e9;
                else if (t == "S") continue;
                else if (t == "RI") format = TouchstoneFormat::RI;
                else if (t == "MA") format = TouchstoneFormat::MA;
                else if (t == "DB") format = TouchstoneFormat::DB;
                else if (t == "R") ++k;  // reference impedance value follows
                else throw ParseError("unrecognized Touchstone option '" + t + "'", lineno);
            }
            continue;
        }

        std::istringstream is(line);
        double f, v1, v2;
        if (!(is >> f >> v1 >> v2)) {
            throw ParseError("expected 'freq value value' data line", lineno);
        }
        std::string extra;
        if (is >> extra) {
            throw ParseError("unexpected trailing field '" + extra + "'", lineno);
        }
        trace.frequency_hz.push_back(f * unit_scale);
        switch (format) {
            case TouchstoneFormat::RI:
                trace.s11.emplace_back(v1, v2);
                break;
            case TouchstoneFormat::MA:
                trace.s11.push_back(std::polar(v1, v2 * constants::pi / 180.0));
                break;
            case TouchstoneFormat::DB:
                trace.s11.push_back(
                    std::polar(db_to_magnitude(v1), v2 * constants::pi / 180.0));
                break;
        }
    }
    if (trace.s11.empty()) {
        throw ParseError("'" + path.string() + "' contains no data lines", long(lines.size()));
    }
    trace.kind = format == TouchstoneFormat::DB ? fitting::TraceKind::DbMagnitude
                                                : fitting::TraceKind::Complex;
    trace.validate();
    return trace;
}

void write_touchstone_s1p(const std::filesystem::path& path,
                          const fitting::FrequencyTrace& trace, TouchstoneFormat format) {
    trace.validate();
    auto out = open_out(path);
    const char* fmt_name = format == TouchstoneFormat::RI   ? "RI"
                           : format == TouchstoneFormat::MA ? "MA"
                                                            : "DB";
    out << "# HZ S " << fmt_name << " R 50\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const Phasor v = trace.s11[i];
        double v1, v2;
        switch (format) {
            case TouchstoneFormat::RI: v1 = v.real(); v2 = v.imag(); break;
            case TouchstoneFormat::MA: v1 = std::abs(v); v2 = std::arg(v) * 180.0 / constants::pi; break;
            case TouchstoneFormat::DB: v1 = to_db(v); v2 = std::arg(v) * 180.0 / constants::pi; break;
        }
        out << fmt(trace.frequency_hz[i]) << ' ' << fmt(v1) << ' ' << fmt(v2) << '\n';
    }
}

fitting::FrequencyTrace read_s11_csv(const std::filesystem::path& path) {
    const auto rows = read_csv(path, "freq_hz,s11_db");
    fitting::FrequencyTrace trace;
    trace.kind = fitting::TraceKind::DbMagnitude;
    for (const auto& row : rows) {
        trace.frequency_hz.push_back(row[0]);
        trace.s11.emplace_back(db_to_magnitude(row[1]), 0.0);
    }
    trace.validate();
    return trace;
}

void write_s11_csv(const std::filesystem::path& path, const fitting::FrequencyTrace& trace) {
    trace.validate();
    auto out = open_out(path);
    out << "freq_hz,s11_db\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << fmt(trace.frequency_hz[i]) << ',' << fmt(trace.magnitude_db(i)) << '\n';
    }
}

fitting::FieldProfile read_profile_csv(const std::filesystem::path& path) {
    const auto rows = read_csv(path, "x_um,bpar_uT,power_w");
    fitting::FieldProfile profile;
    profile.power_watts = rows[0][2];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i][2] != profile.power_watts) {
            throw ParseError("inconsistent power_w column (profiles carry one input power)",
                             long(i + 2));
        }
        profile.x_m.push_back(rows[i][0] * 1e-6);
        profile.b_par_t.push_back(rows[i][1] * 1e-6);
    }
    profile.validate();
    return profile;
}

void write_profile_csv(const std::filesystem::path& path,
                       const fitting::FieldProfile& profile) {
    profile.validate();
    auto out = open_out(path);
    out << "x_um,bpar_uT,power_w\n";
    for (std::size_t i = 0; i < profile.x_m.size(); ++i) {
        out << fmt(profile.x_m[i] * 1e6) << ',' << fmt(profile.b_par_t[i] * 1e6) << ','
            << fmt(profile.power_watts) << '\n';
    }
}

std::vector<std::pair<double, double>> read_heating_csv(const std::filesystem::path& path) {
    const auto rows = read_csv(path, "temp_k,rate_q_per_s");
    std::vector<std::pair<double, double>> out;
    for (const auto& row : rows) out.emplace_back(row[0], row[1]);
    return out;
}

std::vector<std::pair<double, double>> read_qint_csv(const std::filesystem::path& path) {
    const auto rows = read_csv(path, "temp_k,q_int");
    std::vector<std::pair<double, double>> out;
    for (const auto& row : rows) out.emplace_back(row[0], row[1]);
    return out;
}

std::vector<std::pair<double, lumped::ResonatorParams>> read_params_csv(
    const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || trim(lines[0]) != "temp_k,q_tot,q_ext,q_int") {
        throw ParseError("expected header 'temp_k,q_tot,q_ext,q_int' in '" + path.string() + "'",
                         1);
    }
    std::vector<std::pair<double, lumped::ResonatorParams>> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 4) {
            throw ParseError("expected 4 fields", long(i + 1));
        }
        lumped::ResonatorParams p;
        const double t = parse_double(fields[0], long(i + 1));
        p.q_tot = parse_double(fields[1], long(i + 1));
        p.q_ext = parse_double(fields[2], long(i + 1));
        if (!trim(fields[3]).empty()) {
            p.q_int = parse_double(fields[3], long(i + 1));
        }
        out.emplace_back(t, p);
    }
    if (out.empty()) {
        throw ParseError("'" + path.string() + "' has no data rows", long(lines.size()));
    }
    return out;
}

fields::WireLayout read_layout_json(const std::filesystem::path& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("invalid JSON in '" + path.string() + "': " + e.what());
    }
    try {
        fields::WireLayout layout;
        for (const auto& [key, value] : j.items()) {
            if (key != "name" && key != "power_watts" && key != "segments") {
                throw ParseError("unknown layout key '" + key + "'");
            }
        }
        layout.name = j.at("name").get<std::string>();
        layout.power_watts = j.at("power_watts").get<double>();
        for (const auto& seg : j.at("segments")) {
            for (const auto& [key, value] : seg.items()) {
                if (key != "start" && key != "end" && key != "current") {
                    throw ParseError("unknown segment key '" + key + "'");
                }
            }
            auto vec = [](const ordered_json& a) {
                if (!a.is_array() || a.size() != 3) {
                    throw ParseError("segment endpoints must be [x, y, z]");
                }
                return fields::Vec3{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
            };
            const auto& cur = seg.at("current");
            layout.segments.push_back(
                {vec(seg.at("start")), vec(seg.at("end")),
                 Phasor{cur.at("re").get<double>(), cur.at("im").get<double>()}});
        }
        layout.validate();
        return layout;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid layout in '" + path.string() + "': " + e.what());
    }
}

void write_layout_json(const std::filesystem::path& path, const fields::WireLayout& layout) {
    layout.validate();
    ordered_json j;
    j["name"] = layout.name;
    j["power_watts"] = layout.power_watts;
    j["segments"] = ordered_json::array();
    for (const auto& s : layout.segments) {
        ordered_json seg;
        seg["start"] = {s.start.x, s.start.y, s.start.z};
        seg["end"] = {s.end.x, s.end.y, s.end.z};
        seg["current"] = {{"re", s.current.real()}, {"im", s.current.imag()}};
        j["segments"].push_back(seg);
    }
    write_text_file(path, j.dump(2) + "\n");
}

void write_field_map_csv(const std::filesystem::path& path,
                         const std::vector<fields::FieldSample>& samples) {
    auto out = open_out(path);
    out << "x_m,y_m,z_m,Bpar_re_T,Bpar_im_T,Bperp_T\n";
    for (const auto& s : samples) {
        out << fmt(s.position.x) << ',' << fmt(s.position.y) << ',' << fmt(s.position.z) << ','
            << fmt(s.b_par().real()) << ',' << fmt(s.b_par().imag()) << ',' << fmt(s.b_perp())
            << '\n';
    }
}

std::vector<fields::FieldSample> read_field_map_csv(const std::filesystem::path& path) {
    const auto rows = read_csv(path, "x_m,y_m,z_m,Bpar_re_T,Bpar_im_T,Bperp_T");
    std::vector<fields::FieldSample> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        fields::FieldSample s;
        s.position = {row[0], row[1], row[2]};
        s.b.x = {row[3], row[4]};
        s.b.y = {row[5], 0.0};  // perpendicular magnitude; the y/z split is not stored
        s.b.z = {0.0, 0.0};
        out.push_back(s);
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << content;
}

}  // namespace mwtrap::io
