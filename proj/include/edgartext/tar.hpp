#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace edgartext {

struct TarEntry {
    std::string name;
    std::string data;
};

struct TarReadResult {
    std::vector<TarEntry> entries;   // regular files, in archive order
    std::vector<std::string> errors; // one message per skipped/corrupt member
};

/// Read a ustar archive from memory.  Malformed members are skipped with an
/// error message and reading resynchronizes on the next valid header, so one
/// bad member does not sink the rest of a daily archive.
TarReadResult read_tar(std::string_view data);

/// Serialize regular-file entries as a ustar archive (fixed mode/uid/gid and
/// zero mtime: archives built for tests must be byte-stable).
std::string write_tar(const std::vector<TarEntry>& entries);

}  // namespace edgartext
