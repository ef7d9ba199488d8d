#pragma once

#include <map>
#include <optional>
#include <string>

namespace alienzoo {

/// 128 random bits, RFC 4648 base32 without padding (26 characters).
std::string generate_payment_token();
/// Lowercase hex SHA-256 of the token text.
std::string hash_token(const std::string& token);
std::string base32_encode(const unsigned char* data, std::size_t n);

struct PaymentRecord {
  std::string code_hash;
  std::int64_t issued_at_ms = 0;
  bool deleted = false;

  friend bool operator==(const PaymentRecord&, const PaymentRecord&) = default;
};

/// Hashes only; the plaintext leaves through the return value of issue() and nowhere else.
/// Not thread-safe.
class PaymentStore {
 public:
  /// Throws ProtocolError if the session already has a code (deleted or not).
  std::string issue(const std::string& session_id, std::int64_t now_ms);
  /// Records an already-hashed issuance (event replay).
  void restore(const std::string& session_id, PaymentRecord record);
  /// Session the token belongs to, unless unknown or deleted.
  std::optional<std::string> verify(const std::string& token) const;
  /// Throws NotFoundError when nothing was issued for the session.
  void remove(const std::string& session_id);

  bool issued(const std::string& session_id) const { return records_.count(session_id) > 0; }
  const std::map<std::string, PaymentRecord>& records() const { return records_; }

 private:
  std::map<std::string, PaymentRecord> records_;
};

}  // namespace alienzoo
