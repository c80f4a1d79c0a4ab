#include "edgartext/gzip.hpp"

#include <zlib.h>

#include <cstring>
#include <stdexcept>

namespace edgartext {

namespace {
constexpr int kGzipWindowBits = 15 + 16;  // 32 KiB window, gzip wrapper
}

std::string gzip_compress(std::string_view data, int level) {
    z_stream zs;
    std::memset(&zs, 0, sizeof(zs));
    if (deflateInit2(&zs, level, Z_DEFLATED, kGzipWindowBits, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2 failed");

    // Pin every header field zlib would otherwise fill from the environment.
    gz_header header;
    std::memset(&header, 0, sizeof(header));
    header.time = 0;
    header.os = 255;  // "unknown", the most portable value
    if (deflateSetHeader(&zs, &header) != Z_OK) {
        deflateEnd(&zs);
        throw std::runtime_error("deflateSetHeader failed");
    }

    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());

    std::string out;
    char buf[1 << 15];
    int ret;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = deflate(&zs, Z_FINISH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            deflateEnd(&zs);
            throw std::runtime_error("deflate failed");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (ret != Z_STREAM_END);
    deflateEnd(&zs);
    return out;
}

std::string gzip_decompress(std::string_view data) {
    z_stream zs;
    std::memset(&zs, 0, sizeof(zs));
    if (inflateInit2(&zs, kGzipWindowBits) != Z_OK)
        throw std::runtime_error("inflateInit2 failed");

    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());

    std::string out;
    char buf[1 << 15];
    int ret;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret == Z_STREAM_END) {
            out.append(buf, sizeof(buf) - zs.avail_out);
            // Support concatenated members, as produced by some mirrors.
            if (zs.avail_in == 0) break;
            if (inflateReset2(&zs, kGzipWindowBits) != Z_OK) {
                inflateEnd(&zs);
                throw std::runtime_error("inflateReset2 failed");
            }
            continue;
        }
        if (ret != Z_OK) {
            inflateEnd(&zs);
            throw std::runtime_error("inflate failed: corrupt gzip stream");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
        if (zs.avail_in == 0 && ret == Z_OK && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw std::runtime_error("inflate failed: truncated gzip stream");
        }
    } while (true);
    inflateEnd(&zs);
    return out;
}

bool looks_like_gzip(std::string_view data) {
    return data.size() >= 2 && static_cast<unsigned char>(data[0]) == 0x1f &&
           static_cast<unsigned char>(data[1]) == 0x8b;
}

}  // namespace edgartext
