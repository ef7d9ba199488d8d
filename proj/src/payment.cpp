#include "alienzoo/payment.hpp"

#include <array>

#include <sodium.h>

#include "alienzoo/errors.hpp"

namespace alienzoo {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw Error("libsodium failed to initialize");
}

}  // namespace

std::string base32_encode(const unsigned char* data, std::size_t n) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";
  std::string out;
  unsigned buffer = 0;
  int bits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    buffer = (buffer << 8) | data[i];
    bits += 8;
    while (bits >= 5) {
      out.push_back(kAlphabet[(buffer >> (bits - 5)) & 31]);
      bits -= 5;
    }
  }
  if (bits > 0) out.push_back(kAlphabet[(buffer << (5 - bits)) & 31]);
  return out;
}

std::string generate_payment_token() {
  ensure_sodium();
  std::array<unsigned char, 16> raw{};
  randombytes_buf(raw.data(), raw.size());
  return base32_encode(raw.data(), raw.size());
}

std::string hash_token(const std::string& token) {
  ensure_sodium();
  std::array<unsigned char, crypto_hash_sha256_BYTES> digest{};
  crypto_hash_sha256(digest.data(), reinterpret_cast<const unsigned char*>(token.data()),
                     token.size());
  std::array<char, crypto_hash_sha256_BYTES * 2 + 1> hex{};
  sodium_bin2hex(hex.data(), hex.size(), digest.data(), digest.size());
  return std::string(hex.data());
}

std::string PaymentStore::issue(const std::string& session_id, std::int64_t now_ms) {
  if (issued(session_id)) {
    throw ProtocolError("payment code for session " + session_id + " was already issued");
  }
  auto token = generate_payment_token();
  records_[session_id] = {hash_token(token), now_ms, false};
  return token;
}

void PaymentStore::restore(const std::string& session_id, PaymentRecord record) {
  records_[session_id] = std::move(record);
}

std::optional<std::string> PaymentStore::verify(const std::string& token) const {
  const auto h = hash_token(token);
  for (const auto& [id, rec] : records_) {
    if (!rec.deleted && rec.code_hash.size() == h.size() &&
        sodium_memcmp(rec.code_hash.data(), h.data(), h.size()) == 0) {
      return id;
    }
  }
  return std::nullopt;
}

void PaymentStore::remove(const std::string& session_id) {
  auto it = records_.find(session_id);
  if (it == records_.end()) throw NotFoundError("no payment code for session " + session_id);
  it->second.deleted = true;
  it->second.code_hash.clear();
}

}  // namespace alienzoo
