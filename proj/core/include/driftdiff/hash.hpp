// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace driftdiff {

/// Incremental 128-bit BLAKE2b content hash (libsodium generichash).
class ContentHasher {
public:
    ContentHasher();
    ~ContentHasher();
    ContentHasher(const ContentHasher&) = delete;
    ContentHasher& operator=(const ContentHasher&) = delete;

    void update(std::string_view bytes);
    /// Length-prefixed update; keeps field boundaries unambiguous.
    void update_field(std::string_view bytes);
    std::string hex_digest();

private:
    struct State;
    std::unique_ptr<State> state_;
};

std::string content_hash(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

/// SipHash-2-4 keyed hash. The salt is stretched to a 16-byte key once.
class KeyedHasher {
public:
    explicit KeyedHasher(std::string_view salt);
    std::uint64_t operator()(std::string_view data) const;

private:
    unsigned char key_[16];
};

std::uint64_t keyed_hash64(std::string_view salt, std::string_view data);

} // namespace driftdiff
