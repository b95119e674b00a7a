#include "fairtest/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "fairtest/errors.hpp"

namespace fairtest {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void schema_fail(std::size_t line, std::string_view column, const std::string& what) {
    std::ostringstream msg;
    msg << "row " << line << ", column '" << column << "': " << what;
    throw SchemaError(msg.str());
}

double parse_real(std::string_view field, std::size_t line, std::string_view column) {
    field = trim(field);
    if (field.empty()) schema_fail(line, column, "missing value");
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        schema_fail(line, column, "'" + std::string(field) + "' is not a number");
    if (!std::isfinite(v)) schema_fail(line, column, "value is not finite");
    return v;
}

int parse_binary(std::string_view field, std::size_t line, std::string_view column) {
    field = trim(field);
    if (field == "0") return 0;
    if (field == "1") return 1;
    if (field.empty()) schema_fail(line, column, "missing value");
    schema_fail(line, column, "'" + std::string(field) + "' is not 0 or 1");
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::string& path, std::string_view content) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SchemaError("cannot write '" + path + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw SchemaError("failed writing '" + path + "'");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw SchemaError("cannot move output into place at '" + path + "'");
    }
}

std::string fingerprint(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

LoadedData parse_dataset_csv(std::string_view text, const std::optional<CovariateSpace>& box) {
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start < text.size()) {
            std::size_t nl = text.find('\n', start);
            if (nl == std::string_view::npos) nl = text.size();
            lines.push_back(text.substr(start, nl - start));
            start = nl + 1;
        }
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw SchemaError("data file is empty");

    const auto header = split_fields(lines[0]);
    std::map<std::string, std::size_t> col;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < header.size(); ++k) {
        std::string name(trim(header[k]));
        if (name.empty()) schema_fail(1, "#" + std::to_string(k + 1), "empty column name");
        if (col.count(name)) schema_fail(1, name, "duplicate column");
        col[name] = k;
        names.push_back(name);
    }

    std::size_t d = 0;
    while (col.count("x" + std::to_string(d + 1))) ++d;
    if (d == 0) throw SchemaError("header has no covariate columns (expected x1, x2, ...)");
    for (const char* required : {"s", "w"})
        if (!col.count(required)) throw SchemaError(std::string("missing required column '") + required + "'");
    const bool has_y = col.count("y") > 0;
    const bool has_label = col.count("label") > 0;
    if (has_y && has_label) throw SchemaError("columns 'y' and 'label' are mutually exclusive");
    if (!has_y && !has_label) throw SchemaError("missing required column 'y'");
    const bool has_scores = col.count("score_0") || col.count("score_1");
    if (has_scores && !(col.count("score_0") && col.count("score_1")))
        throw SchemaError("score columns come in pairs: need both 'score_0' and 'score_1'");
    for (const auto& name : names) {
        bool known = name == "s" || name == "w" || name == "y" || name == "label" || name == "score_0" ||
                     name == "score_1";
        for (std::size_t j = 1; j <= d && !known; ++j) known = name == "x" + std::to_string(j);
        if (!known) schema_fail(1, name, "unknown column");
    }

    std::vector<std::array<double, 2>> scores;
    std::vector<Sample> samples;
    samples.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::size_t line = r + 1;
        const auto fields = split_fields(lines[r]);
        if (fields.size() != header.size()) {
            std::ostringstream msg;
            msg << "row " << line << ": expected " << header.size() << " fields, found " << fields.size();
            throw SchemaError(msg.str());
        }
        Sample s;
        s.x.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            const std::string name = "x" + std::to_string(j + 1);
            s.x[j] = parse_real(fields[col[name]], line, name);
        }
        s.s = parse_binary(fields[col["s"]], line, "s");
        s.w = parse_binary(fields[col["w"]], line, "w");
        if (has_label) {
            s.y = parse_binary(fields[col["label"]], line, "label") == s.w ? 1.0 : 0.0;
        } else {
            s.y = parse_real(fields[col["y"]], line, "y");
        }
        if (has_scores) {
            scores.push_back({parse_real(fields[col["score_0"]], line, "score_0"),
                                  parse_real(fields[col["score_1"]], line, "score_1")});
            for (int a = 0; a < 2; ++a)
                if (scores.back()[static_cast<std::size_t>(a)] < 0.0 || scores.back()[static_cast<std::size_t>(a)] > 1.0)
                    schema_fail(line, "score_" + std::to_string(a), "propensity outside [0, 1]");
        }
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw SchemaError("data file has a header but no rows");

    std::vector<Vec> points;
    points.reserve(samples.size());
    for (const auto& s : samples) points.push_back(s.x);
    CovariateSpace space = box ? *box : CovariateSpace::from_points(points);
    if (box) {
        for (std::size_t r = 0; r < samples.size(); ++r) {
            if (!space.contains(samples[r].x, 0.0)) {
                for (std::size_t j = 0; j < d; ++j)
                    if (samples[r].x[j] < space.lower()[j] || samples[r].x[j] > space.upper()[j])
                        schema_fail(r + 2, "x" + std::to_string(j + 1), "value outside the configured box");
            }
        }
    }
    try {
        return LoadedData{Dataset(std::move(samples), std::move(space)), std::move(scores), has_label, names,
                          fingerprint(text)};
    } catch (const DomainError& e) {
        throw SchemaError(std::string("invalid dataset: ") + e.what());
    }
}

LoadedData read_dataset_csv(const std::string& path, const std::optional<CovariateSpace>& box) {
    return parse_dataset_csv(read_text(path), box);
}

std::string dataset_to_csv(const Dataset& data, const std::vector<std::array<double, 2>>& scores) {
    std::string out;
    for (std::size_t j = 0; j < data.dim(); ++j) out += "x" + std::to_string(j + 1) + ",";
    out += "s,w,y";
    if (!scores.empty()) out += ",score_0,score_1";
    out += '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& s = data[i];
        for (double v : s.x) out += format_double(v) + ",";
        out += std::to_string(s.s) + "," + std::to_string(s.w) + "," + format_double(s.y);
        if (!scores.empty()) out += "," + format_double(scores[i][0]) + "," + format_double(scores[i][1]);
        out += '\n';
    }
    return out;
}

} // namespace fairtest
