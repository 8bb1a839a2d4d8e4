#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace meshpde::validate {

struct FileReport {
    std::string path;
    std::string detected_type;  // graph / trajectory / checkpoint / manifest / unknown
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Checks magic, version, checksum and structural invariants of any
/// PGN1/PTR1/PMP1/manifest file and lists every violation found.
FileReport validate_file(const std::filesystem::path& path);

std::string report_text(const FileReport& report);

}  // namespace meshpde::validate
