#pragma once

// CSV output with a fixed serialisation: 17 significant digits for reals,
// plain decimal for counts, header row always first.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fpt {

using csv_cell = std::variant<double, std::uint64_t, std::string>;

inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class csv_table {
public:
    explicit csv_table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<csv_cell> row) { rows_.push_back(std::move(row)); }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<csv_cell>>& rows() const { return rows_; }

    std::string str() const {
        std::string out;
        append_line(out, header_);
        for (const auto& row : rows_) {
            std::vector<std::string> cells;
            for (const auto& c : row) cells.push_back(render(c));
            append_line(out, cells);
        }
        return out;
    }

private:
    static std::string render(const csv_cell& c) {
        if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
        if (const auto* u = std::get_if<std::uint64_t>(&c)) return std::to_string(*u);
        return std::get<std::string>(c);
    }

    static void append_line(std::string& out, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out += ',';
            out += cells[i];
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<csv_cell>> rows_;
};

}  // namespace fpt
