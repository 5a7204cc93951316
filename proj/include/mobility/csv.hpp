#pragma once

// Minimal CSV I/O tuned for large flat files: chunked reads, from_chars/
// to_chars number handling, no locale. Fields must not contain commas or
// newlines (all schemas in this project satisfy that).

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mobility/error.hpp"

namespace mobility {

inline bool parse_i64(std::string_view s, int64_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

/// Shortest decimal string that round-trips the value; NaN becomes "".
inline std::string format_double(double v) {
    if (v != v) return "";
    char tmp[32];
    auto [p, ec] = std::to_chars(tmp, tmp + sizeof(tmp), v);
    (void)ec;
    return std::string(tmp, p);
}

/// Splits one CSV line. A field that starts with '"' runs to the closing
/// quote and may contain commas (used for WKT columns); embedded quotes are
/// not supported.
inline void split_fields(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    size_t start = 0;
    while (start <= line.size()) {
        if (start < line.size() && line[start] == '"') {
            size_t close = line.find('"', start + 1);
            if (close == std::string_view::npos) {
                out.push_back(line.substr(start + 1));
                return;
            }
            out.push_back(line.substr(start + 1, close - start - 1));
            if (close + 1 >= line.size()) return;
            start = close + 2;  // skip closing quote and comma
        } else {
            size_t comma = line.find(',', start);
            if (comma == std::string_view::npos) {
                out.push_back(line.substr(start));
                return;
            }
            out.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
    }
}

/// Streams a CSV file line by line without loading it whole. The first line
/// is delivered to `header_fn`, every following non-empty line to `row_fn`
/// as a field vector. Throws InputError if the file cannot be opened.
class CsvReader {
public:
    using HeaderFn = std::function<void(const std::vector<std::string_view>&)>;
    using RowFn = std::function<void(const std::vector<std::string_view>&)>;

    static void read(const std::string& path, const HeaderFn& header_fn, const RowFn& row_fn) {
        FILE* f = std::fopen(path.c_str(), "rb");
        if (!f) throw InputError("cannot open file: " + path);
        std::vector<char> buf(1 << 20);
        std::string carry;
        std::vector<std::string_view> fields;
        bool saw_header = false;
        size_t n;
        while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) {
            size_t pos = 0;
            while (pos < n) {
                const char* nl = static_cast<const char*>(std::memchr(buf.data() + pos, '\n', n - pos));
                if (!nl) {
                    carry.append(buf.data() + pos, n - pos);
                    break;
                }
                size_t len = static_cast<size_t>(nl - (buf.data() + pos));
                std::string_view line;
                if (carry.empty()) {
                    line = std::string_view(buf.data() + pos, len);
                } else {
                    carry.append(buf.data() + pos, len);
                    line = carry;
                }
                deliver(trim_cr(line), saw_header, header_fn, row_fn, fields);
                carry.clear();
                pos += len + 1;
            }
        }
        if (!carry.empty()) deliver(trim_cr(carry), saw_header, header_fn, row_fn, fields);
        std::fclose(f);
    }

private:
    static std::string_view trim_cr(std::string_view line) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    }

    static void deliver(std::string_view line, bool& saw_header, const HeaderFn& header_fn,
                        const RowFn& row_fn, std::vector<std::string_view>& fields) {
        if (line.empty()) return;
        split_fields(line, fields);
        if (!saw_header) {
            saw_header = true;
            if (header_fn) header_fn(fields);
        } else if (row_fn) {
            row_fn(fields);
        }
    }
};

/// Buffered CSV writer with deterministic number formatting.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : path_(path) {
        f_ = std::fopen(path.c_str(), "wb");
        if (!f_) throw InputError("cannot open file for writing: " + path);
        buf_.reserve(1 << 20);
    }
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;
    ~CsvWriter() {
        if (f_) {
            flush();
            std::fclose(f_);
        }
    }

    void field(std::string_view s) {
        sep();
        buf_.append(s);
    }

    /// Field wrapped in quotes; use for values that contain commas (WKT).
    void field_quoted(std::string_view s) {
        sep();
        buf_.push_back('"');
        buf_.append(s);
        buf_.push_back('"');
    }
    void field(int64_t v) {
        sep();
        char tmp[24];
        auto [p, ec] = std::to_chars(tmp, tmp + sizeof(tmp), v);
        (void)ec;
        buf_.append(tmp, p);
    }
    void field(int v) { field(static_cast<int64_t>(v)); }
    void field(uint64_t v) { field(static_cast<int64_t>(v)); }

    /// Shortest round-trip float field (reparses to the identical double);
    /// NaN is written as an empty field (absent).
    void field_full(double v) {
        sep();
        if (v != v) return;
        char tmp[32];
        auto [p, ec] = std::to_chars(tmp, tmp + sizeof(tmp), v);
        (void)ec;
        buf_.append(tmp, p);
    }

    /// Fixed-precision float field; NaN is written as an empty field (absent).
    void field(double v, int precision) {
        sep();
        if (v != v) return;
        char tmp[64];
        int len = std::snprintf(tmp, sizeof(tmp), "%.*f", precision, v);
        buf_.append(tmp, static_cast<size_t>(len));
    }

    void end_row() {
        buf_.push_back('\n');
        row_open_ = false;
        if (buf_.size() > (1 << 20) - 4096) flush();
    }

    void row(std::initializer_list<std::string_view> fields) {
        for (auto f : fields) field(f);
        end_row();
    }

private:
    void sep() {
        if (row_open_) buf_.push_back(',');
        row_open_ = true;
    }
    void flush() {
        if (!buf_.empty()) {
            std::fwrite(buf_.data(), 1, buf_.size(), f_);
            buf_.clear();
        }
    }

    std::string path_;
    FILE* f_ = nullptr;
    std::string buf_;
    bool row_open_ = false;
};

} // namespace mobility
