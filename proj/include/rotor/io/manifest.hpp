#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rotor/io/csv.hpp"
#include "rotor/version.hpp"

namespace rotor::io {

using ordered_json = nlohmann::ordered_json;

inline std::string sha256_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string() + " for digest");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw IoError("EVP_MD_CTX_new failed");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const std::streamsize got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(got));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

// Record of one experiment run: resolved configuration, produced files
// with content digests, and the success/failure status. Serialized as
// manifest.json in the output directory; contains no timestamps so a rerun
// with identical config reproduces it byte for byte.
class Manifest {
public:
    Manifest(std::string mode, ordered_json config, std::filesystem::path dir)
        : dir_(std::move(dir)) {
        doc_["tool"] = "rotorsim";
        doc_["version"] = rotor::version;
        doc_["mode"] = std::move(mode);
        doc_["config"] = std::move(config);
        doc_["outputs"] = ordered_json::array();
        doc_["status"] = "success";
    }

    // Register a file that already exists in the output directory.
    void add_output(const std::filesystem::path& relative) {
        const auto full = dir_ / relative;
        ordered_json entry;
        entry["path"] = relative.generic_string();
        entry["bytes"] = static_cast<std::uint64_t>(std::filesystem::file_size(full));
        entry["sha256"] = sha256_hex(full);
        doc_["outputs"].push_back(std::move(entry));
    }

    void add_report(const std::string& key, ordered_json value) { doc_[key] = std::move(value); }

    void mark_failure(const std::string& stage, const std::string& error) {
        doc_["status"] = "failure";
        doc_["failure"] = ordered_json{{"stage", stage}, {"error", error}};
    }

    const ordered_json& json() const { return doc_; }
    const std::filesystem::path& dir() const { return dir_; }

    std::filesystem::path write() const {
        const auto path = dir_ / "manifest.json";
        auto out = open_output(path);
        out << doc_.dump(2) << '\n';
        if (!out) throw IoError("write failed: " + path.string());
        return path;
    }

private:
    ordered_json doc_;
    std::filesystem::path dir_;
};

} // namespace rotor::io
