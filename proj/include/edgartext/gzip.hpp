#pragma once

#include <string>
#include <string_view>

namespace edgartext {

/// Gzip-compress a buffer.  The member header is fully pinned (mtime = 0, no
/// name, no OS field drift) so identical input bytes always produce identical
/// output bytes, which the shard checksums rely on.
std::string gzip_compress(std::string_view data, int level = 9);

/// Inflate a gzip member (or a concatenation of members).  Throws
/// std::runtime_error on malformed input.
std::string gzip_decompress(std::string_view data);

bool looks_like_gzip(std::string_view data);

}  // namespace edgartext
