#include "edgartext/tar.hpp"

#include <cstdio>
#include <cstring>
#include <optional>
#include <stdexcept>

namespace edgartext {

namespace {

constexpr size_t kBlock = 512;

bool is_zero_block(const char* p) {
    for (size_t i = 0; i < kBlock; ++i)
        if (p[i] != 0) return false;
    return true;
}

std::optional<uint64_t> parse_octal(const char* p, size_t n) {
    uint64_t v = 0;
    size_t i = 0;
    while (i < n && (p[i] == ' ' || p[i] == '\0')) ++i;
    bool any = false;
    for (; i < n; ++i) {
        char c = p[i];
        if (c == ' ' || c == '\0') break;
        if (c < '0' || c > '7') return std::nullopt;
        v = v * 8 + static_cast<uint64_t>(c - '0');
        any = true;
    }
    if (!any) return std::nullopt;
    return v;
}

/// Header checksum: sum of all bytes with the chksum field treated as spaces.
unsigned header_checksum(const char* p) {
    unsigned sum = 0;
    for (size_t i = 0; i < kBlock; ++i) {
        if (i >= 148 && i < 156)
            sum += ' ';
        else
            sum += static_cast<unsigned char>(p[i]);
    }
    return sum;
}

bool header_valid(const char* p) {
    if (std::memcmp(p + 257, "ustar", 5) != 0) return false;
    auto stored = parse_octal(p + 148, 8);
    return stored && *stored == header_checksum(p);
}

std::string field_string(const char* p, size_t n) {
    size_t len = 0;
    while (len < n && p[len] != '\0') ++len;
    return std::string(p, len);
}

void put_octal(char* dst, size_t n, uint64_t v) {
    // n-1 octal digits, NUL terminated.
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*llo", static_cast<int>(n - 1),
                  static_cast<unsigned long long>(v));
    std::memcpy(dst, buf, n - 1);
    dst[n - 1] = '\0';
}

}  // namespace

TarReadResult read_tar(std::string_view data) {
    TarReadResult result;
    size_t off = 0;
    int zero_run = 0;
    while (off + kBlock <= data.size()) {
        const char* hdr = data.data() + off;
        if (is_zero_block(hdr)) {
            if (++zero_run == 2) break;  // end-of-archive marker
            off += kBlock;
            continue;
        }
        zero_run = 0;
        if (!header_valid(hdr)) {
            // Corrupt header: note it once, then scan forward for the next
            // block that parses as a valid header.
            size_t resync = off + kBlock;
            while (resync + kBlock <= data.size() &&
                   !header_valid(data.data() + resync) && !is_zero_block(data.data() + resync))
                resync += kBlock;
            char msg[160];
            std::snprintf(msg, sizeof(msg),
                          "corrupt tar header at offset %zu; skipped %zu bytes", off,
                          resync - off);
            result.errors.emplace_back(msg);
            off = resync;
            continue;
        }
        auto size = parse_octal(hdr + 124, 12);
        std::string name = field_string(hdr, 100);
        std::string prefix = field_string(hdr + 345, 155);
        if (!prefix.empty()) name = prefix + "/" + name;
        if (!size) {
            result.errors.push_back("unreadable size field for tar member '" + name + "'");
            off += kBlock;
            continue;
        }
        size_t payload = static_cast<size_t>(*size);
        size_t padded = (payload + kBlock - 1) / kBlock * kBlock;
        if (off + kBlock + payload > data.size()) {
            result.errors.push_back("truncated tar member '" + name + "'");
            break;
        }
        char type = hdr[156];
        if (type == '0' || type == '\0') {
            result.entries.push_back(
                TarEntry{std::move(name), std::string(data.substr(off + kBlock, payload))});
        }
        off += kBlock + padded;
    }
    return result;
}

std::string write_tar(const std::vector<TarEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        if (e.name.size() > 99) throw std::runtime_error("tar member name too long: " + e.name);
        char hdr[kBlock];
        std::memset(hdr, 0, sizeof(hdr));
        std::memcpy(hdr, e.name.data(), e.name.size());
        put_octal(hdr + 100, 8, 0644);     // mode
        put_octal(hdr + 108, 8, 0);        // uid
        put_octal(hdr + 116, 8, 0);        // gid
        put_octal(hdr + 124, 12, e.data.size());
        put_octal(hdr + 136, 12, 0);       // mtime pinned to epoch
        hdr[156] = '0';                    // regular file
        std::memcpy(hdr + 257, "ustar", 5);
        hdr[262] = '\0';
        hdr[263] = '0';
        hdr[264] = '0';
        unsigned sum = header_checksum(hdr);
        char chk[8];
        std::snprintf(chk, sizeof(chk), "%06o", sum);
        std::memcpy(hdr + 148, chk, 6);
        hdr[154] = '\0';
        hdr[155] = ' ';
        out.append(hdr, kBlock);
        out += e.data;
        size_t pad = (kBlock - e.data.size() % kBlock) % kBlock;
        out.append(pad, '\0');
    }
    out.append(2 * kBlock, '\0');
    return out;
}

}  // namespace edgartext
