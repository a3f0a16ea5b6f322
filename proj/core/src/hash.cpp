// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/hash.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <mutex>

#include <sodium.h>

#include "driftdiff/error.hpp"

namespace driftdiff {

namespace {

constexpr std::size_t kDigestBytes = 16;

void ensure_sodium() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
    });
}

std::string to_hex(const unsigned char* data, std::size_t n) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(n * 2, '0');
    for (std::size_t i = 0; i < n; ++i) {
        out[2 * i] = kDigits[data[i] >> 4];
        out[2 * i + 1] = kDigits[data[i] & 0xF];
    }
    return out;
}

} // namespace

struct ContentHasher::State {
    crypto_generichash_state st;
};

ContentHasher::ContentHasher() : state_(std::make_unique<State>()) {
    ensure_sodium();
    crypto_generichash_init(&state_->st, nullptr, 0, kDigestBytes);
}

ContentHasher::~ContentHasher() = default;

void ContentHasher::update(std::string_view bytes) {
    crypto_generichash_update(&state_->st, reinterpret_cast<const unsigned char*>(bytes.data()),
                              bytes.size());
}

void ContentHasher::update_field(std::string_view bytes) {
    std::array<unsigned char, 8> len{};
    std::uint64_t n = bytes.size();
    for (auto& b : len) {
        b = static_cast<unsigned char>(n & 0xFF);
        n >>= 8;
    }
    crypto_generichash_update(&state_->st, len.data(), len.size());
    update(bytes);
}

std::string ContentHasher::hex_digest() {
    std::array<unsigned char, kDigestBytes> out{};
    crypto_generichash_final(&state_->st, out.data(), out.size());
    return to_hex(out.data(), out.size());
}

std::string content_hash(std::string_view bytes) {
    ContentHasher h;
    h.update(bytes);
    return h.hex_digest();
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnreadableSource, "cannot open " + path.string());
    ContentHasher h;
    std::string buf(1 << 20, '\0');
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
    }
    return h.hex_digest();
}

static_assert(crypto_shorthash_KEYBYTES == 16);

KeyedHasher::KeyedHasher(std::string_view salt) {
    ensure_sodium();
    crypto_generichash(key_, sizeof(key_), reinterpret_cast<const unsigned char*>(salt.data()),
                       salt.size(), nullptr, 0);
}

std::uint64_t KeyedHasher::operator()(std::string_view data) const {
    std::array<unsigned char, crypto_shorthash_BYTES> out{};
    crypto_shorthash(out.data(), reinterpret_cast<const unsigned char*>(data.data()), data.size(),
                     key_);
    std::uint64_t v = 0;
    std::memcpy(&v, out.data(), sizeof(v));
    return v;
}

std::uint64_t keyed_hash64(std::string_view salt, std::string_view data) {
    return KeyedHasher(salt)(data);
}

} // namespace driftdiff
